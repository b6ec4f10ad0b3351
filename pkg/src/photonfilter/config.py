"""Run configuration: JSON schema, validation, and a canonical round-trip form.

Complex entries are written as [re, im] pairs; plain numbers are accepted on
input and canonicalized. ``RunConfig.from_dict(cfg.to_dict()) == cfg`` holds
for every valid config.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .filters import SCHEMES, FilterContext
from .integrate import TimeGrid
from .operators import sigma_minus
from .pulses import WavePacket
from .slh import BeamSplitterParams, make_model

_DEFAULT_GRID = {"t_start": 0.0, "t_end": 10.0, "dt": 1e-3}
_SECTIONS = ("system", "wavepacket", "beamsplitter", "scheme", "grid",
             "ensemble", "output")


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _pair(field, v):
    if _is_number(v):
        return (float(v), 0.0)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(map(_is_number, v)):
        return (float(v[0]), float(v[1]))
    raise ConfigError(field, f"expected a number or [re, im] pair, got {v!r}")


def _matrix(field, v):
    if not isinstance(v, (list, tuple)) or not v:
        raise ConfigError(field, "expected a non-empty list of rows")
    rows = []
    for i, row in enumerate(v):
        if not isinstance(row, (list, tuple)) or not row:
            raise ConfigError(field, f"row {i} is not a non-empty list")
        rows.append(tuple(_pair(field, x) for x in row))
    if any(len(r) != len(rows) for r in rows):
        raise ConfigError(field, f"expected a square matrix, got {len(rows)} rows "
                                 f"of widths {sorted({len(r) for r in rows})}")
    return tuple(rows)


def _vector(field, v):
    if not isinstance(v, (list, tuple)) or not v:
        raise ConfigError(field, "expected a non-empty list of entries")
    return tuple(_pair(field, x) for x in v)


def _real(field, v):
    if not _is_number(v):
        raise ConfigError(field, f"expected a real number, got {v!r}")
    return float(v)


def _int(field, v):
    if not isinstance(v, int) or isinstance(v, bool):
        raise ConfigError(field, f"expected an integer, got {v!r}")
    return v


def _section(data, name):
    block = data.get(name, {})
    if not isinstance(block, dict):
        raise ConfigError(name, "expected a JSON object")
    return block


def _get(block, section, key, parse, default=None, required=False):
    field = f"{section}.{key}"
    if key not in block:
        if required:
            raise ConfigError(field, "missing required key")
        return default
    return parse(field, block[key])


def _pairs_matrix(a):
    """numpy complex matrix -> tuple-of-tuples of (re, im)."""
    return tuple(tuple((float(x.real), float(x.imag)) for x in row) for row in a)


def _complex_array(pairs):
    return np.array([[complex(re, im) for re, im in row] for row in pairs])


@dataclass(frozen=True)
class RunConfig:
    """Validated, canonical run description (all fields plain hashable data)."""

    s: tuple
    l: tuple
    h: tuple
    eta: tuple
    omega: float
    t0: float
    r: float
    theta: float
    scheme: str
    t_start: float
    t_end: float
    dt: float
    n_traj: int
    seed: int
    observables: tuple

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("root", "config must be a JSON object")
        for key in data:
            if key not in _SECTIONS:
                raise ConfigError(key, "unknown config section")

        sysb = _section(data, "system")
        dflt_s = _pairs_matrix(np.eye(2, dtype=complex))
        dflt_l = _pairs_matrix(sigma_minus())
        dflt_h = _pairs_matrix(np.zeros((2, 2), dtype=complex))
        s = _get(sysb, "system", "s", _matrix, dflt_s)
        ll = _get(sysb, "system", "l", _matrix, dflt_l)
        h = _get(sysb, "system", "h", _matrix, dflt_h)
        eta = _get(sysb, "system", "eta", _vector, ((0.0, 0.0), (1.0, 0.0)))
        d = len(ll)
        for name, m in (("s", s), ("h", h)):
            if len(m) != d:
                raise ConfigError(f"system.{name}",
                                  f"dimension {len(m)} does not match l ({d})")
        if len(eta) != d:
            raise ConfigError("system.eta",
                              f"length {len(eta)} does not match operators ({d})")
        if not any(re * re + im * im > 0 for re, im in eta):
            raise ConfigError("system.eta", "initial state vector is zero")

        wpb = _section(data, "wavepacket")
        omega = _get(wpb, "wavepacket", "omega", _real, 1.46)
        t0 = _get(wpb, "wavepacket", "t0", _real, 4.0)
        if omega <= 0:
            raise ConfigError("wavepacket.omega", "must be positive")

        bsb = _section(data, "beamsplitter")
        r = _get(bsb, "beamsplitter", "r", _real, 0.0)
        theta = _get(bsb, "beamsplitter", "theta", _real, 0.0)
        if not 0.0 <= r <= 1.0:
            raise ConfigError("beamsplitter.r", f"must lie in [0, 1], got {r}")

        scheme = data.get("scheme", "hd-hd")
        if scheme not in SCHEMES:
            raise ConfigError("scheme",
                              f"must be one of {sorted(SCHEMES)}, got {scheme!r}")

        gb = _section(data, "grid")
        t_start = _get(gb, "grid", "t_start", _real, _DEFAULT_GRID["t_start"])
        t_end = _get(gb, "grid", "t_end", _real, _DEFAULT_GRID["t_end"])
        dt = _get(gb, "grid", "dt", _real, _DEFAULT_GRID["dt"])

        eb = _section(data, "ensemble")
        n_traj = _get(eb, "ensemble", "n_traj", _int, 100)
        seed = _get(eb, "ensemble", "seed", _int, 0)
        if n_traj < 1:
            raise ConfigError("ensemble.n_traj", "must be at least 1")
        if seed < 0:
            raise ConfigError("ensemble.seed", "must be non-negative")

        ob = _section(data, "output")
        obs = ob.get("observables", ["pe"])
        if (not isinstance(obs, (list, tuple)) or not obs
                or not all(isinstance(x, str) for x in obs)):
            raise ConfigError("output.observables", "expected a list of names")

        cfg = cls(s=s, l=ll, h=h, eta=eta, omega=omega, t0=t0, r=r,
                  theta=theta, scheme=scheme, t_start=t_start, t_end=t_end,
                  dt=dt, n_traj=n_traj, seed=seed, observables=tuple(obs))
        cfg._check_buildable()
        return cfg

    def _check_buildable(self):
        """Construct the physical objects once so bad values fail at parse time."""
        try:
            self.grid()
        except ValueError as e:
            raise ConfigError("grid", str(e)) from e
        try:
            ctx = self.context()
            ctx.system.validate()
        except ValueError as e:
            raise ConfigError("system", str(e)) from e

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as e:
                raise ConfigError("json", f"{path}: {e}") from e
        return cls.from_dict(data)

    def to_dict(self):
        return {
            "system": {
                "s": [list(map(list, row)) for row in self.s],
                "l": [list(map(list, row)) for row in self.l],
                "h": [list(map(list, row)) for row in self.h],
                "eta": [list(p) for p in self.eta],
            },
            "wavepacket": {"omega": self.omega, "t0": self.t0},
            "beamsplitter": {"r": self.r, "theta": self.theta},
            "scheme": self.scheme,
            "grid": {"t_start": self.t_start, "t_end": self.t_end, "dt": self.dt},
            "ensemble": {"n_traj": self.n_traj, "seed": self.seed},
            "output": {"observables": list(self.observables)},
        }

    def with_overrides(self, scheme=None, n_traj=None, seed=None):
        cfg = self
        if scheme is not None:
            if scheme not in SCHEMES:
                raise ConfigError("scheme",
                                  f"must be one of {sorted(SCHEMES)}, got {scheme!r}")
            cfg = replace(cfg, scheme=scheme)
        if n_traj is not None:
            if n_traj < 1:
                raise ConfigError("ensemble.n_traj", "must be at least 1")
            cfg = replace(cfg, n_traj=n_traj)
        if seed is not None:
            if seed < 0:
                raise ConfigError("ensemble.seed", "must be non-negative")
            cfg = replace(cfg, seed=seed)
        return cfg

    @property
    def dim(self):
        return len(self.l)

    def context(self):
        model = make_model(_complex_array(self.s), _complex_array(self.l),
                           _complex_array(self.h))
        return FilterContext(system=model,
                             wp=WavePacket(omega=self.omega, t0=self.t0),
                             bs=BeamSplitterParams(r=self.r, theta=self.theta),
                             scheme=self.scheme)

    def grid(self):
        return TimeGrid(t_start=self.t_start, t_end=self.t_end, dt=self.dt)

    def initial_state(self):
        return np.array([complex(re, im) for re, im in self.eta])
