"""Time-stepping engines.

Conditional trajectories use Euler-Maruyama with per-step Bernoulli thinning
for the counting channel; the deterministic (noise-averaged) hierarchy uses
classical RK4.

For speed, the four-matrix hierarchy is flattened to one complex vector of
length 4*d*d (slot order rho00, rho01, rho10, rho11, each row-major) and
every filter coefficient becomes a precomputed matrix or covector acting on
that vector:

    vec(A rho B) = (A kron B^T) vec(rho)        (row-major vec)
    Tr[A rho]    = vec(A^T) . vec(rho)

The time dependence enters only through xi(t), so each coefficient matrix is
assembled per step as  M0 + xi*Mxi + conj(xi)*Mxic (+ |xi|^2*Mxi2).  A whole
ensemble advances as one (m, 4d^2) array; all trajectories at a fixed time
share the coefficient matrices, so the per-step cost is a handful of small
matrix products regardless of m. Results for a given (seed, index) do not
depend on how trajectories are grouped into batches, because every
trajectory owns a counter-based noise stream keyed by its index.

The matrix-form functions in ``filters`` are the readable reference; tests
pin this engine against them step by step.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolationError
from .filters import (EPSILON_NU, NU_DIVERGED, SCHEME_HDHD, SCHEME_HDPC,
                      HierarchyState)
from .operators import basis_state, projector

JUMP_CAP = 100          # diagnostic bound; no sane run gets near it
JUMP_PROB_WARN = 0.1    # per-step click probability above which dt is suspect


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid over [t_start, t_end] with step dt."""

    t_start: float
    t_end: float
    dt: float

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_end <= self.t_start:
            raise ValueError("t_end must exceed t_start")
        if abs(self.n_steps * self.dt - (self.t_end - self.t_start)) > self.dt:
            raise ValueError("grid span is not a whole number of steps")

    @property
    def n_steps(self):
        return max(1, int(round((self.t_end - self.t_start) / self.dt)))

    @property
    def times(self):
        return self.t_start + self.dt * np.arange(self.n_steps + 1)


@dataclass(frozen=True)
class NoiseStream:
    """Counter-based noise source, splittable by trajectory.

    The generator is keyed by (seed, trajectory_index), so any trajectory can
    be reproduced in isolation, in any order, on any host. Per run, the
    channel-1 normals are drawn first and the scheme-specific block second;
    the channel-1 stream is therefore identical across schemes.
    """

    seed: int
    trajectory_index: int = 0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if int(self.trajectory_index) < 0:
            raise ValueError("trajectory index must be non-negative")

    def draw(self, n_steps, scheme):
        """(channel-1 standard normals, auxiliary block) for one run.

        The auxiliary block holds channel-2 standard normals for ``hd-hd``
        and uniform click variates for ``hd-pc``.
        """
        key = np.array([self.seed, self.trajectory_index], dtype=np.uint64)
        gen = np.random.Generator(np.random.Philox(key=key))
        dw1 = gen.standard_normal(n_steps)
        aux = gen.standard_normal(n_steps) if scheme == SCHEME_HDHD else gen.random(n_steps)
        return dw1, aux


# slot order in the flattened hierarchy vector
_SLOTS = ("00", "01", "10", "11")


def hierarchy_to_vec(st):
    return np.concatenate([getattr(st, "rho" + jk).reshape(-1) for jk in _SLOTS])


def vec_to_hierarchy(v, dim):
    d2 = dim * dim
    mats = [v[i * d2:(i + 1) * d2].reshape(dim, dim).copy() for i in range(4)]
    return HierarchyState(rho00=mats[0], rho01=mats[1], rho10=mats[2], rho11=mats[3])


def ground_initial_state(dim):
    """Start in the last basis state (the ground state of a two-level system)."""
    return HierarchyState.initial(basis_state(dim, dim - 1))


def _coerce_initial(initial, dim):
    """Accept None, a hierarchy, or a bare system state vector."""
    if initial is None:
        return ground_initial_state(dim)
    if isinstance(initial, HierarchyState):
        return initial
    return HierarchyState.initial(np.asarray(initial, dtype=complex))


def default_observables(dim):
    """For two-level systems, the excited-state population; otherwise empty."""
    if dim == 2:
        return {"pe": projector(basis_state(2, 0))}
    return {}


def _sandwich(a, b):
    # vec(A rho B) = (A kron B^T) vec(rho)
    return np.kron(a, b.T)


class CompiledFilter:
    """Flattened-form coefficient blocks of one FilterContext.

    Every matrix is stored transposed so a batch advances as ``V @ M``; for
    a single flat vector ``v @ M`` equals the untransposed matrix acting on v.
    """

    def __init__(self, ctx):
        self.ctx = ctx
        d = ctx.dim
        self.dim = d
        d2 = d * d
        self.n = 4 * d2
        s, l, h, sd, ld = ctx.pieces()
        eye = np.eye(d)
        eip = np.exp(1j * ctx.bs.theta)
        eim = np.conj(eip)
        pre = lambda a: _sandwich(a, eye)
        post = lambda b: _sandwich(eye, b)
        ldl = ld @ l

        def blocks(entries):
            m = np.zeros((self.n, self.n), dtype=complex)
            for row, col, val in entries:
                i, j = _SLOTS.index(row), _SLOTS.index(col)
                m[i * d2:(i + 1) * d2, j * d2:(j + 1) * d2] = val
            return m.T.copy()

        lstar = (-1j * (pre(h) - post(h)) + _sandwich(l, ld)
                 - 0.5 * (pre(ldl) + post(ldl)))
        diag = lambda val: [(jk, jk, val) for jk in _SLOTS]

        self.a0 = blocks(diag(lstar))
        m_xi = _sandwich(s, ld) - pre(ld @ s)
        m_xic = _sandwich(l, sd) - post(sd @ l)
        self.a_xi = blocks([("11", "01", m_xi), ("10", "00", m_xi)])
        self.a_xic = blocks([("11", "10", m_xic), ("01", "00", m_xic)])
        self.a_xi2 = blocks([("11", "00", _sandwich(s, sd) - np.eye(d2))])

        self.b0 = blocks(diag(eim * post(ld) + eip * pre(l)))
        self.b_xi = blocks([("11", "01", eip * pre(s)), ("10", "00", eip * pre(s))])
        self.b_xic = blocks([("11", "10", eim * post(sd)), ("01", "00", eim * post(sd))])

        self.p0 = blocks(diag(eim * post(ld) - eip * pre(l)))
        self.p_xi = blocks([("11", "01", -eip * pre(s)), ("10", "00", -eip * pre(s))])
        self.p_xic = blocks([("11", "10", eim * post(sd)), ("01", "00", eim * post(sd))])

        self.j0 = blocks(diag(_sandwich(l, ld)))
        self.j_xi = blocks([("11", "01", _sandwich(s, ld)), ("10", "00", _sandwich(s, ld))])
        self.j_xic = blocks([("11", "10", _sandwich(l, sd)), ("01", "00", _sandwich(l, sd))])
        self.j_xi2 = blocks([("11", "00", _sandwich(s, sd))])

        def functional(jk, a):
            v = np.zeros(self.n, dtype=complex)
            i = _SLOTS.index(jk)
            v[i * d2:(i + 1) * d2] = a.T.reshape(-1)
            return v

        self.k0 = functional("11", eim * ld + eip * l)
        self.k_xi = functional("01", eip * s)
        self.k_xic = functional("10", eim * sd)
        self.k2_0 = functional("11", eip * l - eim * ld)
        self.k2_xi = functional("01", eip * s)
        self.k2_xic = functional("10", -eim * sd)
        self.nu0 = functional("11", ldl)
        self.nu_xi = functional("01", ld @ s)
        self.nu_xic = functional("10", sd @ l)
        self.nu_xi2 = functional("00", eye.astype(complex))
        self.trace11 = functional("11", eye.astype(complex))

        # index permutation realizing the transpose of a flattened d x d block
        self.perm_t = np.arange(d2).reshape(d, d).T.reshape(-1)
        self.s00 = slice(0, d2)
        self.s01 = slice(d2, 2 * d2)
        self.s10 = slice(2 * d2, 3 * d2)
        self.s11 = slice(3 * d2, 4 * d2)

    def drift_t(self, xi):
        a = self.a0 + xi * self.a_xi + np.conj(xi) * self.a_xic
        return a + (abs(xi) ** 2) * self.a_xi2

    def diff1_t(self, xi):
        return self.b0 + xi * self.b_xi + np.conj(xi) * self.b_xic

    def diff2_t(self, xi):
        return self.p0 + xi * self.p_xi + np.conj(xi) * self.p_xic

    def jump_t(self, xi):
        j = self.j0 + xi * self.j_xi + np.conj(xi) * self.j_xic
        return j + (abs(xi) ** 2) * self.j_xi2

    def k_vec(self, xi):
        return self.k0 + xi * self.k_xi + np.conj(xi) * self.k_xic

    def k2_vec(self, xi):
        return self.k2_0 + xi * self.k2_xi + np.conj(xi) * self.k2_xic

    def nu_vec(self, xi):
        return (self.nu0 + xi * self.nu_xi + np.conj(xi) * self.nu_xic
                + (abs(xi) ** 2) * self.nu_xi2)

    def obs_vec(self, op):
        v = np.zeros(self.n, dtype=complex)
        v[self.s11] = np.asarray(op, dtype=complex).T.reshape(-1)
        return v


@dataclass
class TrajectoryRecord:
    """One conditional trajectory: observable curves plus the measurement record."""

    times: np.ndarray
    observable_curves: dict
    record_y1: np.ndarray
    record_y2: np.ndarray
    jump_times: np.ndarray
    trajectory_index: int = 0
    max_trace_dev: float = 0.0
    max_herm_dev: float = 0.0
    final_state: HierarchyState | None = None
    aborted: bool = False
    abort_step: int | None = None
    abort_reason: str | None = None


@dataclass
class MasterCurve:
    """Noise-averaged hierarchy evolution: observables plus output flux."""

    times: np.ndarray
    curves: dict
    nu_bar: np.ndarray

    def expected_jumps(self, r):
        """Mean click count over the run at reflectivity r: r^2 integral of nu_bar."""
        return float(r * r * np.trapezoid(self.nu_bar, self.times))

    def peak(self, name="pe"):
        c = self.curves[name]
        i = int(np.argmax(c))
        return float(c[i]), float(self.times[i])


class BatchResult:
    """Raw output of run_batch; rows correspond to trajectories."""

    def __init__(self, m, n_steps, obs_names, n_state):
        self.curves = {name: np.empty((m, n_steps + 1)) for name in obs_names}
        self.dy1 = np.zeros((m, n_steps))
        self.y2 = np.zeros((m, n_steps))
        self.jump_steps = [[] for _ in range(m)]
        self.alive = np.ones(m, dtype=bool)
        self.abort_step = np.full(m, -1, dtype=np.int64)
        self.abort_reason = [None] * m
        self.max_trace_dev = np.zeros(m)
        self.max_herm_dev = np.zeros(m)
        self.v_final = np.zeros((m, n_state), dtype=complex)

    def _abort(self, rows, step, reason):
        for j in np.atleast_1d(rows):
            if self.alive[j]:
                self.alive[j] = False
                self.abort_step[j] = step
                self.abort_reason[j] = reason


def run_batch(ctx, grid, dw1_std, aux, observables=None, hygiene=True,
              initial=None, check_every=50):
    """Advance many trajectories of one context in lock step.

    ``dw1_std`` and ``aux`` are (m, n_steps) arrays of standard normals and
    the scheme's auxiliary variates (normals for hd-hd, uniforms for hd-pc).
    Rows that violate an invariant are frozen and reported in the result,
    not raised; callers decide whether a dead row is fatal.
    """
    comp = CompiledFilter(ctx)
    obs = default_observables(ctx.dim) if observables is None else observables
    obs_vecs = {name: comp.obs_vec(op) for name, op in obs.items()}
    dw1_std = np.asarray(dw1_std, dtype=float)
    aux = np.asarray(aux, dtype=float)
    m, n_steps = dw1_std.shape
    if aux.shape != (m, n_steps) or n_steps != grid.n_steps:
        raise ValueError("noise arrays do not match the grid")

    dt = grid.dt
    sq = np.sqrt(dt)
    r = ctx.bs.r
    r2 = r * r
    tr_amp = ctx.bs.transmission
    hdpc = ctx.scheme == SCHEME_HDPC
    use_ch1 = r < 1.0
    use_ch2 = r > 0.0

    res = BatchResult(m, n_steps, list(obs_vecs), comp.n)
    alive = res.alive  # mutated in place by res._abort
    times = grid.times
    xi_grid = np.asarray(ctx.wp.xi(times))

    st0 = _coerce_initial(initial, ctx.dim)
    v = np.tile(hierarchy_to_vec(st0), (m, 1))
    jump_counts = np.zeros(m, dtype=np.int64)
    warned_dt = False

    for name, fvec in obs_vecs.items():
        res.curves[name][:, 0] = (v @ fvec).real

    for i in range(n_steps):
        xi = xi_grid[i]
        a_t = comp.drift_t(xi)
        dv = dt * (v @ a_t)

        k1 = v @ comp.k_vec(xi)
        bad = (np.abs(k1.imag) > 1e-8) & alive
        if bad.any():
            res._abort(np.nonzero(bad)[0], i, "gain-parity")
        k1r = k1.real

        dw1 = sq * dw1_std[:, i]
        chi = None
        if use_ch1:
            chi = v @ comp.diff1_t(xi) - k1r[:, None] * v
            dv += (tr_amp * dw1)[:, None] * chi
        res.dy1[:, i] = dw1 + tr_amp * k1r * dt

        if hdpc and use_ch2:
            nu = (v @ comp.nu_vec(xi)).real
            # Euler positivity loss makes small negative excursions normal
            # where the exact intensity touches zero; tolerate those and
            # abort only on clearly diverged states.
            neg = (nu < -NU_DIVERGED) & alive
            if neg.any():
                res._abort(np.nonzero(neg)[0], i, "negative-intensity")
            jv = v @ comp.jump_t(xi)
            p = np.clip(r2 * nu * dt, 0.0, 1.0)
            if not warned_dt and (p >= JUMP_PROB_WARN).any():
                warned_dt = True
                warnings.warn(
                    f"per-step click probability reached {p.max():.3g}; "
                    "the grid dt is too coarse for faithful jump statistics",
                    RuntimeWarning, stacklevel=2)
            # compensated no-click form, division free; the signed intensity
            # keeps the trace identity exact even where nu grazes zero
            dv += -r2 * dt * (jv - nu[:, None] * v)
            clicks = aux[:, i] < p
            res.y2[:, i] = clicks.astype(float)
            for j in np.nonzero(clicks & alive)[0]:
                if nu[j] < EPSILON_NU:
                    res._abort(j, i, "jump-guard")
                    continue
                jump_counts[j] += 1
                if jump_counts[j] > JUMP_CAP:
                    res._abort(j, i, "jump-cap")
                    continue
                res.jump_steps[j].append(i)
                # a click replaces the row by the normalized jump map; the
                # dt/dW remainders are lower order and would seed the
                # post-click state with pre-click noise
                dv[j] = jv[j] / nu[j] - v[j]
        elif not hdpc and use_ch2:
            k2 = v @ comp.k2_vec(xi)
            bad2 = (np.abs(k2.real) > 1e-8) & alive
            if bad2.any():
                res._abort(np.nonzero(bad2)[0], i, "gain-parity")
            k2i = 1j * k2.imag
            dw2 = sq * aux[:, i]
            phi = v @ comp.diff2_t(xi) + k2i[:, None] * v
            dv += (-1j * r) * dw2[:, None] * phi
            # the channel-2 record drift i*r*K2 is real by K2's parity
            res.y2[:, i] = dw2 - r * k2.imag * dt

        dv[~alive] = 0.0
        v = v + dv

        # invariant drift of the raw step, before any hygiene correction
        trace_dev = np.abs((v @ comp.trace11).real - 1.0)
        herm_dev = np.abs(v[:, comp.s10] - np.conj(v[:, comp.s01])[:, comp.perm_t]).max(axis=1)
        np.maximum(res.max_trace_dev, np.where(alive, trace_dev, 0.0),
                   out=res.max_trace_dev)
        np.maximum(res.max_herm_dev, np.where(alive, herm_dev, 0.0),
                   out=res.max_herm_dev)

        if hygiene:
            dead = ~alive
            saved = v[dead].copy() if dead.any() else None
            v11 = v[:, comp.s11]
            v[:, comp.s11] = 0.5 * (v11 + np.conj(v11[:, comp.perm_t]))
            v00 = v[:, comp.s00]
            v[:, comp.s00] = 0.5 * (v00 + np.conj(v00[:, comp.perm_t]))
            v[:, comp.s10] = np.conj(v[:, comp.s01])[:, comp.perm_t]
            tr = (v @ comp.trace11).real
            collapsed = (tr < 1e-6) & alive
            if collapsed.any():
                res._abort(np.nonzero(collapsed)[0], i, "trace-collapse")
            scale = np.where(alive & (tr > 1e-6), 1.0 / np.where(tr == 0.0, 1.0, tr), 1.0)
            v = v * scale[:, None]
            if saved is not None:
                v[dead] = saved

        if (i + 1) % check_every == 0 or i == n_steps - 1:
            finite = np.isfinite(v).all(axis=1)
            if not finite.all():
                res._abort(np.nonzero(~finite & alive)[0], i, "nan")
                v[~finite] = 0.0

        for name, fvec in obs_vecs.items():
            res.curves[name][:, i + 1] = (v @ fvec).real

    res.v_final = v
    return res


def batch_record(ctx, grid, res, row, traj_index, raise_on_abort=False):
    """Package one row of a batch result as a TrajectoryRecord."""
    if not res.alive[row] and raise_on_abort:
        step = int(res.abort_step[row])
        raise InvariantViolationError(
            f"trajectory aborted at step {step} (t={grid.times[step]:.6g}): "
            f"{res.abort_reason[row]}",
            step=step, time=float(grid.times[step]),
            state=vec_to_hierarchy(res.v_final[row], ctx.dim))
    jumps = np.asarray([grid.times[s + 1] for s in res.jump_steps[row]], dtype=float)
    # populations are reported in [0, 1]; the raw functional value (which
    # first-order stepping lets stray outside near pinned states) stays
    # available on the batch result
    curves = {k: (np.clip(c[row], 0.0, 1.0) if k == "pe" else c[row].copy())
              for k, c in res.curves.items()}
    return TrajectoryRecord(
        times=grid.times,
        observable_curves=curves,
        record_y1=res.dy1[row].copy(),
        record_y2=res.y2[row].copy(),
        jump_times=jumps,
        trajectory_index=traj_index,
        max_trace_dev=float(res.max_trace_dev[row]),
        max_herm_dev=float(res.max_herm_dev[row]),
        final_state=vec_to_hierarchy(res.v_final[row], ctx.dim),
        aborted=not bool(res.alive[row]),
        abort_step=None if res.abort_step[row] < 0 else int(res.abort_step[row]),
        abort_reason=res.abort_reason[row])


def simulate_trajectory(ctx, grid, noise, observables=None, hygiene=True,
                        initial=None):
    """Integrate one conditional trajectory.

    ``noise`` is anything with ``draw(n_steps, scheme)``; pass a
    ``NoiseStream`` for reproducible runs. Raises InvariantViolationError
    (with step index and state snapshot) if the run aborts.
    """
    dw1, aux = noise.draw(grid.n_steps, ctx.scheme)
    res = run_batch(ctx, grid, np.reshape(dw1, (1, -1)), np.reshape(aux, (1, -1)),
                    observables=observables, hygiene=hygiene, initial=initial)
    return batch_record(ctx, grid, res, 0,
                        getattr(noise, "trajectory_index", 0), raise_on_abort=True)


def solve_master(ctx, grid, observables=None, initial=None):
    """Evolve the noise-averaged hierarchy (the dt terms only) with RK4.

    Both schemes share the same drift, so the result is scheme independent.
    Also tabulates nu_bar(t), the averaged output flux, whose time integral
    times r^2 predicts the mean click count.
    """
    comp = CompiledFilter(ctx)
    obs = default_observables(ctx.dim) if observables is None else observables
    obs_vecs = {name: comp.obs_vec(op) for name, op in obs.items()}
    dt = grid.dt
    times = grid.times
    n = grid.n_steps
    xi_full = np.asarray(ctx.wp.xi(times))
    xi_half = np.asarray(ctx.wp.xi(times[:-1] + 0.5 * dt))

    st0 = _coerce_initial(initial, ctx.dim)
    v = hierarchy_to_vec(st0)

    curves = {name: np.empty(n + 1) for name in obs_vecs}
    nu_bar = np.empty(n + 1)
    for name, fvec in obs_vecs.items():
        curves[name][0] = (v @ fvec).real
    nu_bar[0] = (v @ comp.nu_vec(xi_full[0])).real

    a_left = comp.drift_t(xi_full[0])
    for i in range(n):
        a_mid = comp.drift_t(xi_half[i])
        a_right = comp.drift_t(xi_full[i + 1])
        k1 = v @ a_left
        k2 = (v + 0.5 * dt * k1) @ a_mid
        k3 = (v + 0.5 * dt * k2) @ a_mid
        k4 = (v + dt * k3) @ a_right
        v = v + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        a_left = a_right
        for name, fvec in obs_vecs.items():
            curves[name][i + 1] = (v @ fvec).real
        nu_bar[i + 1] = (v @ comp.nu_vec(xi_full[i + 1])).real
        if (i + 1) % 200 == 0 and not np.isfinite(v).all():
            raise InvariantViolationError("master solve produced non-finite values",
                                          step=i, time=float(times[i + 1]))
    if not np.isfinite(v).all():
        raise InvariantViolationError("master solve produced non-finite values")
    return MasterCurve(times=times, curves=curves, nu_bar=nu_bar)
