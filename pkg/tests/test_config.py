import json

import numpy as np
import numpy.testing as npt
import pytest

import photonfilter as pf
from photonfilter.config import RunConfig

FULL = {
    "system": {
        "s": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]],
        "l": [[0, 0], [1, 0]],   # plain reals are accepted and canonicalized
        "h": [[0.1, [0, -0.2]], [[0, 0.2], -0.1]],
        "eta": [[0, 0], [1, 0]],
    },
    "wavepacket": {"omega": 1.46, "t0": 4.0},
    "beamsplitter": {"r": 0.7071067811865476, "theta": -1.5707963267948966},
    "scheme": "hd-pc",
    "grid": {"t_start": 0.0, "t_end": 10.0, "dt": 0.001},
    "ensemble": {"n_traj": 400, "seed": 42},
    "output": {"observables": ["pe"]},
}


def test_full_config_parses():
    cfg = RunConfig.from_dict(FULL)
    assert cfg.scheme == "hd-pc"
    assert cfg.r == pytest.approx(np.sqrt(0.5))
    assert cfg.n_traj == 400 and cfg.seed == 42
    assert cfg.dim == 2
    assert cfg.l == (((0.0, 0.0), (0.0, 0.0)), ((1.0, 0.0), (0.0, 0.0)))
    assert cfg.h[0][1] == (0.0, -0.2)


def test_empty_config_gets_two_level_defaults():
    cfg = RunConfig.from_dict({})
    assert cfg.omega == 1.46 and cfg.t0 == 4.0
    assert cfg.r == 0.0 and cfg.theta == 0.0
    assert cfg.scheme == "hd-hd"
    assert (cfg.t_start, cfg.t_end, cfg.dt) == (0.0, 10.0, 1e-3)
    assert cfg.n_traj == 100 and cfg.seed == 0
    assert cfg.observables == ("pe",)
    npt.assert_array_equal(cfg.initial_state(), [0, 1])
    ctx = cfg.context()
    npt.assert_array_equal(ctx.system.l[0], pf.sigma_minus())


def test_round_trip_equality():
    cfg = RunConfig.from_dict(FULL)
    assert RunConfig.from_dict(cfg.to_dict()) == cfg
    assert RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


def test_load_round_trip(tmp_path):
    cfg = RunConfig.from_dict(FULL)
    p = tmp_path / "run.cfg"
    p.write_text(json.dumps(cfg.to_dict()))
    assert RunConfig.load(p) == cfg


def test_load_rejects_malformed_json(tmp_path):
    p = tmp_path / "broken.cfg"
    p.write_text("{not json")
    with pytest.raises(pf.ConfigError) as exc:
        RunConfig.load(p)
    assert "json" in str(exc.value)


def test_load_missing_file_is_os_error(tmp_path):
    with pytest.raises(OSError):
        RunConfig.load(tmp_path / "absent.cfg")


@pytest.mark.parametrize("mutate, needle", [
    (lambda d: d.update(bogus={}), "bogus"),
    (lambda d: d.update(scheme="photon-count"), "scheme"),
    (lambda d: d["grid"].update(dt=0.0), "grid"),
    (lambda d: d["grid"].update(dt="fast"), "grid.dt"),
    (lambda d: d["wavepacket"].update(omega=-1.0), "wavepacket.omega"),
    (lambda d: d["beamsplitter"].update(r=1.5), "beamsplitter.r"),
    (lambda d: d["system"].update(eta=[[0, 0], [0, 0]]), "system.eta"),
    (lambda d: d["system"].update(h=[[0] * 3] * 3), "system.h"),
    (lambda d: d["system"].update(s=[[2, 0], [0, 2]]), "system"),
    (lambda d: d["system"].update(l=[[0, 0], [1, 0], [0, 0]]), "system.l"),
    (lambda d: d["ensemble"].update(n_traj=0), "ensemble.n_traj"),
    (lambda d: d["ensemble"].update(n_traj=2.5), "ensemble.n_traj"),
    (lambda d: d["ensemble"].update(seed=-1), "ensemble.seed"),
    (lambda d: d["output"].update(observables="pe"), "output.observables"),
])
def test_invalid_configs_name_the_field(mutate, needle):
    data = json.loads(json.dumps(FULL))
    mutate(data)
    with pytest.raises(pf.ConfigError) as exc:
        RunConfig.from_dict(data)
    assert needle in str(exc.value)


def test_config_error_is_value_error_with_field():
    err = pf.ConfigError("grid.dt", "bad")
    assert isinstance(err, ValueError)
    assert err.field == "grid.dt"
    assert "grid.dt" in str(err)


def test_overrides():
    cfg = RunConfig.from_dict(FULL)
    out = cfg.with_overrides(scheme="hd-hd", n_traj=7, seed=1)
    assert (out.scheme, out.n_traj, out.seed) == ("hd-hd", 7, 1)
    assert cfg.scheme == "hd-pc"  # original unchanged
    assert cfg.with_overrides() == cfg
    with pytest.raises(pf.ConfigError):
        cfg.with_overrides(scheme="nope")
    with pytest.raises(pf.ConfigError):
        cfg.with_overrides(n_traj=0)


def test_built_objects_match_fields():
    cfg = RunConfig.from_dict(FULL)
    grid = cfg.grid()
    assert (grid.t_start, grid.t_end, grid.dt) == (0.0, 10.0, 1e-3)
    ctx = cfg.context()
    assert ctx.scheme == "hd-pc"
    assert ctx.bs.r == cfg.r and ctx.bs.theta == cfg.theta
    assert ctx.wp.omega == 1.46
    want_h = np.array([[0.1, -0.2j], [0.2j, -0.1]])
    npt.assert_allclose(ctx.system.h, want_h)
