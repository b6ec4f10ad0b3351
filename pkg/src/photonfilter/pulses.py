"""Single-photon temporal envelopes.

The built-in family is the normalized Gaussian. Anything exposing the same
three evaluators (``xi``, ``w``, ``lam``) works as a drop-in pulse; the
filters only ever call those.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _erfc(x):
    # math.erfc is double-accurate; vectorize by hand for array input
    if np.ndim(x) == 0:
        return math.erfc(float(x))
    flat = np.asarray(x, dtype=float).ravel()
    out = np.fromiter((math.erfc(v) for v in flat), dtype=float, count=flat.size)
    return out.reshape(np.shape(x))


@dataclass(frozen=True)
class WavePacket:
    """Gaussian photon envelope.

    Parameters
    ----------
    omega : float
        Frequency bandwidth (units of the coupling rate). Must be positive.
    t0 : float
        Peak arrival time.
    epsilon_w : float
        Tail-mass cutoff below which the source coupling is clamped to zero.
        Once the photon has fully passed, the source is dark, so the clamp
        is exact in the limit and avoids a 0/0.
    """

    omega: float
    t0: float = 0.0
    epsilon_w: float = 1e-12

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError(f"bandwidth must be positive, got {self.omega}")
        if self.epsilon_w <= 0:
            raise ValueError(f"tail cutoff must be positive, got {self.epsilon_w}")

    def xi(self, t):
        """Envelope amplitude. Real-valued for this family, returned as complex."""
        t = np.asarray(t, dtype=float)
        amp = (self.omega**2 / (2.0 * np.pi)) ** 0.25 * np.exp(
            -self.omega**2 * (t - self.t0) ** 2 / 4.0)
        return amp.astype(complex) if amp.ndim else complex(amp)

    def w(self, t):
        """Remaining tail mass int_t^inf |xi|^2 ds, in closed form."""
        t = np.asarray(t, dtype=float)
        return 0.5 * _erfc((t - self.t0) * self.omega / math.sqrt(2.0))

    def lam(self, t):
        """Source coupling strength xi / sqrt(w), clamped to 0 once w < epsilon_w."""
        w = np.asarray(self.w(t), dtype=float)
        xi = np.asarray(self.xi(t))
        safe = np.where(w >= self.epsilon_w, w, 1.0)
        out = np.where(w >= self.epsilon_w, xi / np.sqrt(safe), 0.0)
        return out if out.ndim else complex(out)


class VacuumPulse:
    """No photon at all: xi = w = lam = 0. Handy for decay-only scenarios."""

    def xi(self, t):
        z = np.zeros(np.shape(t), dtype=complex)
        return z if z.ndim else 0j

    def w(self, t):
        z = np.zeros(np.shape(t), dtype=float)
        return z if z.ndim else 0.0

    def lam(self, t):
        return self.xi(t)
