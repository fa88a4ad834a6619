"""Explicit conjugacy of the two-slope lift to the rigid rotation.

H(x) = h0 ln|x + h1| + h2 on [0, 1), extended by H(x + 1) = H(x) + 1,
satisfies H(F(x)) = H(x) + rho for the two-slope lift.  The additive
constant is normalized so H(0) = 0, which pins the strip origin to the
space-time origin and simplifies control-time bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boundary import Boundary
from .circle_map import (LiftedCircleMap, TranslationMap, TwoSlopeMap,
                         rotation_closed_form)
from .errors import (BoundsUnavailable, ConjugacyResidualTooLarge,
                     UnsupportedKind)
from .quadrature import KINK_JITTER

RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class LogConjugacy:
    """Closed-form conjugacy for the two-slope family."""

    l1: float
    l2: float

    @property
    def h0(self) -> float:
        return 1.0 / np.log(self.l1 / self.l2)

    @property
    def h1(self) -> float:
        return self.l2 / (self.l1 - self.l2)

    @property
    def h2(self) -> float:
        # H(0) = 0 normalization
        return -self.h0 * np.log(abs(self.h1))

    @property
    def rho(self) -> float:
        return rotation_closed_form(self.l1, self.l2)

    @property
    def identity(self) -> bool:
        return False

    def __post_init__(self):
        # log singularity x = -h1 must avoid [0, 1): true for both slope
        # orderings, asserted anyway
        s = -self.h1
        if 0.0 <= s < 1.0:
            raise ConjugacyResidualTooLarge(f"log singularity {s} inside [0,1)")

    def H(self, x):
        x = np.asarray(x, dtype=float)
        n = np.floor(x)
        fr = x - n
        out = n + self.h0 * np.log(np.abs(fr + self.h1)) + self.h2
        return out if out.ndim else float(out)

    def H_prime(self, x):
        """Periodized derivative; right-continuous branch at integers."""
        x = np.asarray(x, dtype=float)
        fr = x - np.floor(x)
        out = self.h0 / (fr + self.h1)
        return out if out.ndim else float(out)

    def H_prime_raw(self, s):
        """Fundamental-branch derivative h0/(s + h1), no periodic reduction.

        This is the branch the damping function is built from; it agrees
        with :meth:`H_prime` only where s itself lies in [0, 1).
        """
        s = np.asarray(s, dtype=float)
        out = self.h0 / (s + self.h1)
        return out if out.ndim else float(out)

    def H_inv(self, y):
        y = np.asarray(y, dtype=float)
        m = np.floor(y)
        yr = y - m
        r = np.exp((yr - self.h2) / self.h0)
        x = (r if self.l1 > self.l2 else -r) - self.h1
        out = m + x
        return out if out.ndim else float(out)

    def H_inv_prime(self, y):
        return 1.0 / self.H_prime(self.H_inv(y))

    def derivative_bounds(self) -> tuple[float, float]:
        lo = (self.l1 - self.l2) / (self.l1 * np.log(self.l1 / self.l2))
        hi = (self.l1 - self.l2) / (self.l2 * np.log(self.l1 / self.l2))
        return (float(min(lo, hi)), float(max(lo, hi)))


@dataclass(frozen=True)
class IdentityConjugacy:
    """Constant boundary: H = I and rho = 2 a0."""

    shift: float

    @property
    def rho(self) -> float:
        return self.shift

    @property
    def identity(self) -> bool:
        return True

    def H(self, x):
        x = np.asarray(x, dtype=float)
        return x if x.ndim else float(x)

    def H_prime(self, x):
        x = np.asarray(x, dtype=float)
        out = np.ones_like(x)
        return out if out.ndim else float(out)

    H_prime_raw = H_prime

    def H_inv(self, y):
        y = np.asarray(y, dtype=float)
        return y if y.ndim else float(y)

    def H_inv_prime(self, y):
        y = np.asarray(y, dtype=float)
        out = np.ones_like(y)
        return out if out.ndim else float(out)

    def derivative_bounds(self) -> tuple[float, float]:
        return (1.0, 1.0)


Conjugacy = LogConjugacy | IdentityConjugacy


def build_conjugacy(m: LiftedCircleMap) -> Conjugacy:
    """Construct H for a closed-form lift and verify the conjugation residual."""
    if isinstance(m, TranslationMap):
        return IdentityConjugacy(m.shift)
    if not isinstance(m, TwoSlopeMap):
        raise UnsupportedKind("no closed-form conjugacy for generic maps")
    c = LogConjugacy(m.l1, m.l2)
    x = np.linspace(0.0, 1.0, 1000, endpoint=False) + KINK_JITTER
    resid = np.max(np.abs(c.H(m.F(x)) - c.H(x) - c.rho))
    if resid > RESIDUAL_TOL:
        raise ConjugacyResidualTooLarge(f"conjugation residual {resid:.3e}")
    return c


def conjugation_residual(c: Conjugacy, m: LiftedCircleMap, n: int = 1000) -> float:
    x = np.linspace(0.0, 1.0, n, endpoint=False) + KINK_JITTER
    return float(np.max(np.abs(c.H(m.F(x)) - c.H(x) - c.rho)))


def eval_H(c: Conjugacy, x):
    return c.H(x)


def eval_H_prime(c: Conjugacy, x):
    return c.H_prime(x)


def eval_H_inv(c: Conjugacy, y):
    return c.H_inv(y)


def derivative_bounds(c: Conjugacy) -> tuple[float, float]:
    return c.derivative_bounds()


def eval_b(c: Conjugacy, boundary: Boundary, t):
    """1-periodic damping function from the fundamental-branch H' ratio.

    b(t) = (H'(a+t) - H'(-a+t)) / (H'(a+t) + H'(-a+t)) with the raw
    (unreduced) branch derivative; on [0, 1) this collapses to the closed
    form -a(t)/(t + h1).
    """
    t = np.asarray(t, dtype=float)
    tr = t - np.floor(t)  # b is 1-periodic; evaluate on [0, 1)
    a = np.asarray(boundary.eval(tr), dtype=float)
    hp_plus = c.H_prime_raw(tr + a)
    hp_minus = c.H_prime_raw(tr - a)
    out = (hp_plus - hp_minus) / (hp_plus + hp_minus)
    return out if out.ndim else float(out)


def b_bounds(c: Conjugacy, boundary: Boundary) -> tuple[float, float]:
    """(c1, c2) with c1 = a_min (l2-l1)/l2, c2 = a_max (l2-l1)/l1; needs l1 < l2."""
    if c.identity or not c.l1 < c.l2:
        raise BoundsUnavailable("positive damping bounds require l1 < l2")
    a_min, a_max = boundary.extrema()
    return (a_min * (c.l2 - c.l1) / c.l2, a_max * (c.l2 - c.l1) / c.l1)
