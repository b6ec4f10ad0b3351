"""Conditional-state filters for a single-photon-driven system under two-channel monitoring.

The system output passes a beam splitter (reflectivity r, phase theta) that
mixes it with vacuum; channel 1 is always homodyne-detected, channel 2 is
either photon-counted (scheme ``hd-pc``) or homodyne-detected (``hd-hd``).

Because a single-photon input is non-Markovian for the system alone, the
conditional state is carried by four coupled matrices rho^jk (j, k in {0, 1});
rho11 is the physical conditional density matrix. Both schemes share one
deterministic drift; they differ in their noise terms and gains.

Everything here is the plain matrix-form reference implementation; the
vectorized stepping engine lives in ``integrate`` and is cross-checked
against these functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, IllConditionedJumpError, InvariantViolationError
from .operators import as_operator, dagger, norm_inf
from .pulses import WavePacket
from .slh import BeamSplitterParams, SlhModel

SCHEME_HDPC = "hd-pc"
SCHEME_HDHD = "hd-hd"
SCHEMES = (SCHEME_HDPC, SCHEME_HDHD)

# Guard on the jump map's 1/nu; jumps are sampled with probability
# proportional to nu, so hitting this is measure-zero and fails loudly.
EPSILON_NU = 1e-12

# Euler steps lose positivity at O(dt) where the exact intensity touches
# zero, so small negative excursions are expected mid-run; only an intensity
# this far below zero marks a genuinely diverged state.
NU_DIVERGED = 1e-2


@dataclass
class HierarchyState:
    """The four conditional matrices advanced jointly by either filter."""

    rho00: np.ndarray
    rho01: np.ndarray
    rho10: np.ndarray
    rho11: np.ndarray

    @classmethod
    def initial(cls, eta):
        """Start of a run: rho11 = rho00 = |eta><eta|, off-diagonal slots zero."""
        eta = np.asarray(eta, dtype=complex).reshape(-1)
        nrm = np.linalg.norm(eta)
        if nrm == 0:
            raise InvariantViolationError("initial state vector is zero")
        eta = eta / nrm
        rho = np.outer(eta, eta.conj())
        z = np.zeros_like(rho)
        return cls(rho00=rho.copy(), rho01=z.copy(), rho10=z.copy(), rho11=rho)

    @property
    def dim(self):
        return self.rho11.shape[0]

    def copy(self):
        return HierarchyState(self.rho00.copy(), self.rho01.copy(),
                              self.rho10.copy(), self.rho11.copy())

    def validate(self, tol_herm=1e-9, tol_trace=1e-8):
        if norm_inf(self.rho11 - dagger(self.rho11)) > tol_herm:
            raise InvariantViolationError("rho11 is not Hermitian")
        if norm_inf(self.rho00 - dagger(self.rho00)) > tol_herm:
            raise InvariantViolationError("rho00 is not Hermitian")
        if norm_inf(self.rho10 - dagger(self.rho01)) > tol_herm:
            raise InvariantViolationError("rho10 != rho01 adjoint")
        if abs(np.trace(self.rho11).real - 1.0) > tol_trace:
            raise InvariantViolationError(
                f"Tr rho11 = {np.trace(self.rho11).real} drifted from 1")
        return self


def hygiene(st):
    """Numerical floor-sweep between steps.

    Hermitizes the diagonal slots, resets rho10 to the adjoint of rho01, and
    rescales all four matrices by 1/Tr(rho11). The four matrices share one
    normalization, so they are jointly scaled.
    """
    tr = np.trace(st.rho11).real
    if abs(tr) < 1e-300:
        raise InvariantViolationError("Tr rho11 vanished; cannot renormalize")
    f = 1.0 / tr
    r11 = (st.rho11 + dagger(st.rho11)) * (0.5 * f)
    r00 = (st.rho00 + dagger(st.rho00)) * (0.5 * f)
    r01 = st.rho01 * f
    return HierarchyState(rho00=r00, rho01=r01, rho10=dagger(r01), rho11=r11)


@dataclass(frozen=True)
class FilterContext:
    """Everything fixed over one run: the system triple, the pulse, the
    beam splitter setting, and which detection scheme sits on channel 2."""

    system: SlhModel
    wp: WavePacket
    bs: BeamSplitterParams
    scheme: str

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.system.n_channels != 1:
            raise DimensionMismatchError("the monitored system must be single-channel")

    @property
    def dim(self):
        return self.system.dim

    def pieces(self):
        """(S, L, H, S†, L†) of the single-channel system."""
        s = self.system.s
        l = self.system.l[0]
        return s, l, self.system.h, dagger(s), dagger(l)


def _phases(ctx):
    th = ctx.bs.theta
    return np.exp(1j * th), np.exp(-1j * th)


def _gain_terms(ctx, st, t):
    """The four scalar traces the gains are assembled from."""
    s, l, _, sd, ld = ctx.pieces()
    xi = ctx.wp.xi(t)
    a = np.trace(ld @ st.rho11)            # Tr[L† rho11]
    b = np.trace(l @ st.rho11)             # Tr[L rho11]
    c = np.trace(s @ st.rho01) * xi        # Tr[S rho01] xi
    d = np.trace(sd @ st.rho10) * np.conj(xi)  # Tr[S† rho10] xi*
    return a, b, c, d


def k_gain(ctx, st, t):
    """Channel-1 homodyne gain; real for any state satisfying the
    hierarchy invariants."""
    eip, eim = _phases(ctx)
    a, b, c, d = _gain_terms(ctx, st, t)
    k = eim * a + eip * b + eip * c + eim * d
    if not abs(k.imag) <= 1e-8:
        raise InvariantViolationError(f"channel-1 gain has imaginary part {k.imag}")
    return float(k.real)


def k1_k2_gains(ctx, st, t):
    """Both homodyne gains: K1 real, K2 purely imaginary (so that i*r*K2,
    the channel-2 record drift, is real).

    K2 is the antisymmetric counterpart of K1: conjugating it flips its
    sign. The sign convention here is the one under which the channel-2
    noise term is trace free and Hermiticity preserving; the one-step
    observable-picture duality test pins it.
    """
    eip, eim = _phases(ctx)
    a, b, c, d = _gain_terms(ctx, st, t)
    k1 = eim * (a + d) + eip * (b + c)
    k2 = eip * (b + c) - eim * (a + d)
    if not abs(k1.imag) <= 1e-8:
        raise InvariantViolationError(f"channel-1 gain has imaginary part {k1.imag}")
    if not abs(k2.real) <= 1e-8:
        raise InvariantViolationError(f"channel-2 gain has real part {k2.real}")
    return float(k1.real), 1j * float(k2.imag)


def _nu_raw(ctx, st, t):
    s, l, _, sd, ld = ctx.pieces()
    xi = ctx.wp.xi(t)
    nu = (np.trace(ld @ l @ st.rho11)
          + np.trace(ld @ s @ st.rho01) * xi
          + np.trace(sd @ l @ st.rho10) * np.conj(xi)
          + np.trace(st.rho00) * abs(xi) ** 2)
    return nu.real


def nu_intensity(ctx, st, t):
    """Output photon flux into the detectors; channel-2 jumps arrive at rate
    r^2 * nu. Non-negative for any valid state, up to round-off; round-off
    dust below zero is clamped, anything clearly negative is an error."""
    val = _nu_raw(ctx, st, t)
    if not val > -1e-8:
        raise InvariantViolationError(f"jump intensity {val} is negative")
    return max(val, 0.0)


def drift(ctx, st, t):
    """The shared deterministic part of both filters (the dt coefficients).

    Averaging either filter over its noise leaves exactly these terms, so
    this is also the right-hand side of the master hierarchy.
    """
    s, l, h, sd, ld = ctx.pieces()
    xi = ctx.wp.xi(t)
    xic = np.conj(xi)
    ax2 = abs(xi) ** 2

    def lstar(rho):
        ldl = ld @ l
        return (-1j * (h @ rho - rho @ h) + l @ rho @ ld
                - 0.5 * (ldl @ rho + rho @ ldl))

    s01, s00 = s @ st.rho01, s @ st.rho00
    r10sd, r00sd = st.rho10 @ sd, st.rho00 @ sd
    d11 = (lstar(st.rho11)
           + (s01 @ ld - ld @ s01) * xi
           + (l @ r10sd - r10sd @ l) * xic
           + (s00 @ sd - st.rho00) * ax2)
    d10 = lstar(st.rho10) + (s00 @ ld - ld @ s00) * xi
    d01 = lstar(st.rho01) + (l @ r00sd - r00sd @ l) * xic
    d00 = lstar(st.rho00)
    return HierarchyState(rho00=d00, rho01=d01, rho10=d10, rho11=d11)


def _diffusion1(ctx, st, t, k):
    """Channel-1 (homodyne) noise coefficient, shared by both schemes;
    ``k`` is the scheme's channel-1 gain."""
    s, l, _, sd, _ = ctx.pieces()
    eip, eim = _phases(ctx)
    xi = ctx.wp.xi(t)
    xic = np.conj(xi)

    def wings(rho):
        return eim * (rho @ dagger(l)) + eip * (l @ rho)

    c11 = wings(st.rho11) + eip * (s @ st.rho01) * xi + eim * (st.rho10 @ sd) * xic - k * st.rho11
    c10 = wings(st.rho10) + eip * (s @ st.rho00) * xi - k * st.rho10
    c01 = wings(st.rho01) + eim * (st.rho00 @ sd) * xic - k * st.rho01
    c00 = wings(st.rho00) - k * st.rho00
    return HierarchyState(rho00=c00, rho01=c01, rho10=c10, rho11=c11)


def _diffusion2(ctx, st, t, k2):
    """Channel-2 homodyne noise coefficient (hd-hd), including the -i*r
    prefactor, so the increment contribution is simply (this) * dW2."""
    s, l, _, sd, _ = ctx.pieces()
    eip, eim = _phases(ctx)
    xi = ctx.wp.xi(t)
    xic = np.conj(xi)
    pref = -1j * ctx.bs.r

    def wings(rho):
        return eim * (rho @ dagger(l)) - eip * (l @ rho)

    c11 = wings(st.rho11) - eip * (s @ st.rho01) * xi + eim * (st.rho10 @ sd) * xic + k2 * st.rho11
    c10 = wings(st.rho10) - eip * (s @ st.rho00) * xi + k2 * st.rho10
    c01 = wings(st.rho01) + eim * (st.rho00 @ sd) * xic + k2 * st.rho01
    c00 = wings(st.rho00) + k2 * st.rho00
    return HierarchyState(rho00=pref * c00, rho01=pref * c01,
                          rho10=pref * c10, rho11=pref * c11)


def jump_map(ctx, st, t):
    """Un-normalized post-detection states; Tr of the rho11 slot equals nu."""
    s, l, _, sd, ld = ctx.pieces()
    xi = ctx.wp.xi(t)
    xic = np.conj(xi)
    j11 = (l @ st.rho11 @ ld + (s @ st.rho01 @ ld) * xi
           + (l @ st.rho10 @ sd) * xic + (s @ st.rho00 @ sd) * abs(xi) ** 2)
    j10 = l @ st.rho10 @ ld + (s @ st.rho00 @ ld) * xi
    j01 = l @ st.rho01 @ ld + (l @ st.rho00 @ sd) * xic
    j00 = l @ st.rho00 @ ld
    return HierarchyState(rho00=j00, rho01=j01, rho10=j10, rho11=j11)


def _add(st, *parts):
    out = st.copy()
    for factor, inc in parts:
        out.rho00 = out.rho00 + factor * inc.rho00
        out.rho01 = out.rho01 + factor * inc.rho01
        out.rho10 = out.rho10 + factor * inc.rho10
        out.rho11 = out.rho11 + factor * inc.rho11
    return out


def hdpc_increment(ctx, st, t, dt, dW, jump):
    """One Euler step of the homodyne + photon-counting filter.

    ``dW`` is the channel-1 innovation increment (already scaled by sqrt(dt));
    ``jump`` says whether channel 2 clicked during the step. The counting
    noise enters compensated: dN = click - r^2 nu dt.
    """
    r = ctx.bs.r
    r2 = r * r
    if r > 0.0 and jump:
        # A click replaces the state by the normalized jump map. The dt and
        # dW remainders are of lower order than the jump itself, and keeping
        # them would seed the post-click state with pre-click noise.
        raw = _nu_raw(ctx, st, t)
        if raw < EPSILON_NU:
            raise IllConditionedJumpError(
                f"jump at t={t} with intensity {raw} below guard {EPSILON_NU}",
                time=t, state=st)
        jm = jump_map(ctx, st, t)
        return HierarchyState(rho00=jm.rho00 / raw, rho01=jm.rho01 / raw,
                              rho10=jm.rho10 / raw, rho11=jm.rho11 / raw)

    k = k_gain(ctx, st, t)
    parts = [(dt, drift(ctx, st, t))]
    if r < 1.0:
        # sqrt(1-r^2) prefactor; skipped entirely at r=1 so the output
        # carries no arithmetic trace of the dW stream
        parts.append((ctx.bs.transmission * dW, _diffusion1(ctx, st, t, k)))
    if r > 0.0:
        # First-order stepping does not preserve positivity exactly, so the
        # intensity can graze zero from below where its exact value vanishes;
        # tolerate that and reserve the error for clearly diverged states.
        raw = _nu_raw(ctx, st, t)
        if raw < -NU_DIVERGED:
            raise InvariantViolationError(
                f"jump intensity {raw} is far below zero", time=t, state=st)
        jm = jump_map(ctx, st, t)
        # (J/nu - st) * (-r^2 nu dt), written division-free; the signed
        # intensity keeps tr(d rho11) = -r^2 dt nu (1 - tr rho11) exactly
        # self-correcting even where the Euler state grazes the boundary
        parts.append((-r2 * dt, jm))
        parts.append((r2 * raw * dt, st))
    return _add(st, *parts)


def hdhd_increment(ctx, st, t, dt, dW1, dW2):
    """One Euler step of the homodyne + homodyne filter.

    Both noise increments come pre-scaled by sqrt(dt). At r=0 the channel-2
    term is skipped (its prefactor is identically zero), so the output is
    bitwise independent of dW2; symmetrically for channel 1 at r=1.
    """
    r = ctx.bs.r
    k1, k2 = k1_k2_gains(ctx, st, t)
    parts = [(dt, drift(ctx, st, t))]
    if r < 1.0:
        parts.append((ctx.bs.transmission * dW1, _diffusion1(ctx, st, t, k1)))
    if r > 0.0:
        parts.append((dW2, _diffusion2(ctx, st, t, k2)))
    return _add(st, *parts)


def heisenberg_increments(ctx, pi_weights, x, t, dt, noise):
    """Observable-picture one-step increments d pi^jk(X), all four components.

    ``pi_weights`` carries the matrices defining the functionals
    pi^jk(X) = Tr[(rho^jk)† X]. ``noise`` is (dW, jump) for hd-pc or
    (dW1, dW2) for hd-hd. Test oracle only; not used by the integrators.
    """
    s, l, h, sd, ld = ctx.pieces()
    x = as_operator(x, ctx.dim)
    eip, eim = _phases(ctx)
    xi = ctx.wp.xi(t)
    xic = np.conj(xi)
    ax2 = abs(xi) ** 2
    r = ctx.bs.r
    r2 = r * r
    tr = ctx.bs.transmission

    def pi(jk, a):
        rho = getattr(pi_weights, "rho" + jk)
        return np.trace(dagger(rho) @ a)

    lind = lambda a: (-1j * (a @ h - h @ a) + ld @ a @ l
                      - 0.5 * (ld @ l @ a + a @ ld @ l))

    drift_terms = {
        "11": (pi("11", lind(x)) + pi("01", sd @ (x @ l - l @ x)) * xic
               + pi("10", (ld @ x - x @ ld) @ s) * xi + pi("00", sd @ x @ s - x) * ax2),
        "10": pi("10", lind(x)) + pi("00", sd @ (x @ l - l @ x)) * xic,
        "01": pi("01", lind(x)) + pi("00", (ld @ x - x @ ld) @ s) * xi,
        "00": pi("00", lind(x)),
    }

    def ch1_bracket(jk, k):
        val = eip * pi(jk, x @ l) + eim * pi(jk, ld @ x) - pi(jk, x) * k
        if jk == "11":
            val += eim * pi("01", sd @ x) * xic + eip * pi("10", x @ s) * xi
        elif jk == "10":
            val += eim * pi("00", sd @ x) * xic
        elif jk == "01":
            val += eip * pi("00", x @ s) * xi
        return val

    if ctx.scheme == SCHEME_HDPC:
        dW, jump = noise
        k = (eip * pi("11", l) + eim * pi("11", ld)
             + eim * pi("01", sd) * xic + eip * pi("10", s) * xi)
        nu = (pi("11", ld @ l) + pi("01", sd @ l) * xic
              + pi("10", ld @ s) * xi + pi("00", np.eye(ctx.dim)) * ax2)
        nu = nu.real

        def jump_bracket(jk):
            val = pi(jk, ld @ x @ l)
            if jk == "11":
                val += (pi("01", sd @ x @ l) * xic + pi("10", ld @ x @ s) * xi
                        + pi("00", sd @ x @ s) * ax2)
            elif jk == "10":
                val += pi("00", sd @ x @ l) * xic
            elif jk == "01":
                val += pi("00", ld @ x @ s) * xi
            return val

        if r > 0.0 and jump:
            # Click steps are pure replacements: the dt and dW remainders
            # are of lower order than the jump and would mix pre-click
            # structure into the post-click functionals.
            if nu < EPSILON_NU:
                raise IllConditionedJumpError(
                    f"jump at t={t} with intensity {nu} below guard", time=t)
            return {jk: jump_bracket(jk) / nu - pi(jk, x)
                    for jk in ("00", "01", "10", "11")}

        out = {}
        for jk in ("00", "01", "10", "11"):
            inc = drift_terms[jk] * dt + tr * ch1_bracket(jk, k) * dW
            if r > 0.0:
                inc += -r2 * dt * (jump_bracket(jk) - nu * pi(jk, x))
            out[jk] = inc
        return out

    dW1, dW2 = noise
    k1 = (eip * pi("11", l) + eim * pi("11", ld)
          + eim * pi("01", sd) * xic + eip * pi("10", s) * xi)
    k2 = (eip * pi("11", l) - eim * pi("11", ld)
          - eim * pi("01", sd) * xic + eip * pi("10", s) * xi)

    def ch2_bracket(jk):
        val = eip * pi(jk, x @ l) - eim * pi(jk, ld @ x) - pi(jk, x) * k2
        if jk == "11":
            val += -eim * pi("01", sd @ x) * xic + eip * pi("10", x @ s) * xi
        elif jk == "10":
            val += -eim * pi("00", sd @ x) * xic
        elif jk == "01":
            val += eip * pi("00", x @ s) * xi
        return val

    out = {}
    for jk in ("00", "01", "10", "11"):
        inc = drift_terms[jk] * dt + tr * ch1_bracket(jk, k1) * dW1
        if r > 0.0:
            inc += 1j * r * ch2_bracket(jk) * dW2
        out[jk] = inc
    return out


def heisenberg_increment_oracle(ctx, pi_weights, x, t, dt, noise):
    """d pi^11(X) for one step; must match Tr[(d rho11)† X] from the
    state-picture increment under identical noise."""
    return heisenberg_increments(ctx, pi_weights, x, t, dt, noise)["11"]
