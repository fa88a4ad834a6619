"""Lifted circle maps F = (I + a) o (I - a)^{-1} and rotation numbers.

For a 1-periodic endpoint profile, F is a lift of a circle homeomorphism:
strictly increasing with F(x + 1) = F(x) + 1.  F(s) is the arrival
coordinate t + a(t) of the characteristic that left the boundary at
departure coordinate s = t - a(t).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .boundary import Boundary, ConstantBoundary, QuasiPeriodicBoundary, TwoSlopeBoundary
from .errors import DegenerateSlopes, UnsupportedKind


@dataclass(frozen=True)
class TwoSlopeMap:
    """Closed-form two-branch lift: slopes l1 on [0, x0), l2 on [x0, 1).

    Kink points (0 and x0 mod 1) take the branch closed on their left
    endpoint, so F' is right-continuous there.
    """

    l1: float
    l2: float

    def __post_init__(self):
        if self.l1 <= 0 or self.l2 <= 0:
            raise ValueError("l1, l2 must be positive")
        if self.l1 == self.l2:
            raise DegenerateSlopes("l1 == l2")

    @property
    def F0(self) -> float:
        return self.l2 * (self.l1 - 1.0) / (self.l1 - self.l2)

    @property
    def x0(self) -> float:
        return (1.0 - self.l2) / (self.l1 - self.l2)

    def F(self, x):
        x = np.asarray(x, dtype=float)
        n = np.floor(x)
        fr = x - n
        val = np.where(fr < self.x0,
                       self.l1 * fr + self.F0,
                       self.l2 * fr + self.F0 + 1.0 - self.l2)
        out = n + val
        return out if out.ndim else float(out)

    def F_inv(self, y):
        y = np.asarray(y, dtype=float)
        m = np.floor(y - self.F0)
        z = y - self.F0 - m  # in [0, 1)
        z0 = self.l1 * self.x0  # branch junction value
        x = np.where(z < z0, z / self.l1, (z - 1.0 + self.l2) / self.l2)
        out = m + x
        return out if out.ndim else float(out)

    def F_prime(self, x):
        x = np.asarray(x, dtype=float)
        fr = x - np.floor(x)
        out = np.where(fr < self.x0, self.l1, self.l2)
        return out if out.ndim else float(out)

    def kinks(self, lo: float, hi: float) -> np.ndarray:
        """Lattice of non-smooth points of F in [lo, hi]."""
        pts = []
        for base in (0.0, self.x0):
            k0 = int(np.floor(lo - base))
            k1 = int(np.ceil(hi - base))
            pts.extend(base + k for k in range(k0, k1 + 1) if lo <= base + k <= hi)
        return np.sort(np.asarray(pts))


@dataclass(frozen=True)
class TranslationMap:
    """Constant boundary: F(x) = x + shift with shift = 2 a0."""

    shift: float

    def F(self, x):
        x = np.asarray(x, dtype=float)
        out = x + self.shift
        return out if out.ndim else float(out)

    def F_inv(self, y):
        y = np.asarray(y, dtype=float)
        out = y - self.shift
        return out if out.ndim else float(out)

    def F_prime(self, x):
        x = np.asarray(x, dtype=float)
        out = np.ones_like(x)
        return out if out.ndim else float(out)

    def kinks(self, lo: float, hi: float) -> np.ndarray:
        return np.empty(0)


@dataclass(frozen=True)
class GenericMap:
    """F via monotone root finding of t - a(t) = x (quasi-periodic profiles).

    L(a) < 1 makes t -> t - a(t) strictly increasing, so the bracketed
    solve is unconditionally safe.
    """

    boundary: Boundary
    tol: float = 1e-12
    _amin: float = field(init=False, repr=False)
    _amax: float = field(init=False, repr=False)

    def __post_init__(self):
        amin, amax = self.boundary.extrema()
        object.__setattr__(self, "_amin", amin)
        object.__setattr__(self, "_amax", amax)

    def _t_of(self, x: float) -> float:
        lo = x + self._amin * 0.5
        hi = x + self._amax * 2.0 + 1e-9
        f = lambda t: t - self.boundary.eval(t) - x
        # widen conservatively if sampled extrema were slightly off
        while f(lo) > 0:
            lo -= self._amax
        while f(hi) < 0:
            hi += self._amax
        return brentq(f, lo, hi, xtol=self.tol, rtol=1e-15)

    def F(self, x):
        if np.ndim(x):
            return np.asarray([self.F(float(v)) for v in np.asarray(x).ravel()]
                              ).reshape(np.shape(x))
        t = self._t_of(float(x))
        return 2.0 * t - float(x)

    def F_inv(self, y):
        if np.ndim(y):
            return np.asarray([self.F_inv(float(v)) for v in np.asarray(y).ravel()]
                              ).reshape(np.shape(y))
        # solve t + a(t) = y; also strictly increasing
        f = lambda t: t + self.boundary.eval(t) - float(y)
        lo = float(y) - 2.0 * self._amax - 1e-9
        hi = float(y) - 0.5 * self._amin
        while f(lo) > 0:
            lo -= self._amax
        while f(hi) < 0:
            hi += self._amax
        t = brentq(f, lo, hi, xtol=self.tol, rtol=1e-15)
        return 2.0 * t - float(y)

    def F_prime(self, x):
        h = 1e-7
        return (self.F(np.asarray(x) + h) - self.F(np.asarray(x) - h)) / (2 * h)

    def kinks(self, lo: float, hi: float) -> np.ndarray:
        return np.empty(0)


LiftedCircleMap = TwoSlopeMap | TranslationMap | GenericMap


def build_map(boundary: Boundary) -> LiftedCircleMap:
    """Construct the lift associated with an endpoint profile."""
    from .boundary import lipschitz_constant
    lipschitz_constant(boundary)  # raises SlopeTooLarge if invalid
    if isinstance(boundary, TwoSlopeBoundary):
        return TwoSlopeMap(boundary.l1, boundary.l2)
    if isinstance(boundary, ConstantBoundary):
        return TranslationMap(2.0 * boundary.a0)
    if isinstance(boundary, QuasiPeriodicBoundary):
        return GenericMap(boundary)
    raise UnsupportedKind(f"unknown boundary type {type(boundary)!r}")


def eval_F(m: LiftedCircleMap, x):
    return m.F(x)


def eval_F_inv(m: LiftedCircleMap, y):
    return m.F_inv(y)


def rotation_closed_form(l1: float, l2: float) -> float:
    """Rotation number of the two-slope lift: ln(l1) / ln(l1/l2)."""
    if l1 == l2:
        raise DegenerateSlopes("l1 == l2")
    if l1 <= 0 or l2 <= 0:
        raise ValueError("l1, l2 must be positive")
    return float(np.log(l1) / np.log(l1 / l2))


def _orbit_estimates(m: LiftedCircleMap, x_seed: float, n: int):
    """Yield (k, (F^k(x) - x)/k) with cancellation-free accumulation.

    The fractional part is iterated separately from the accumulated
    integer displacement, so long orbits (n ~ 1e6) do not lose precision.
    """
    fr = x_seed - np.floor(x_seed)
    fr0 = fr
    acc = 0.0
    for k in range(1, n + 1):
        y = m.F(fr)
        w = np.floor(y)
        acc += w
        fr = y - w
        yield k, (acc + fr - fr0) / k


def rotation_estimate(m: LiftedCircleMap, x_seed: float = 0.0,
                      n: int = 10_000) -> tuple[float, float]:
    """Birkhoff estimate (F^n(x) - x)/n together with the 1/n error bound."""
    if n < 1:
        raise ValueError("n >= 1 required")
    if isinstance(m, TranslationMap):
        return (m.shift, 1.0 / n)
    est = None
    for _, est in _orbit_estimates(m, x_seed, n):
        pass
    return (float(est), 1.0 / n)


def rotation_bounds_qp(m: LiftedCircleMap, x_seed: float = 0.0,
                       n_max: int = 10_000, window: int = 100) -> tuple[float, float]:
    """Running max/min of (F^n(x) - x)/n over the last ``window`` steps.

    Approximates the upper and lower rotation numbers; for genuinely
    periodic profiles the two coincide up to O(1/n).
    """
    if not (1 <= window <= n_max):
        raise ValueError("need n_max >= window >= 1")
    if isinstance(m, TranslationMap):
        return (m.shift, m.shift)
    hi = -np.inf
    lo = np.inf
    for k, est in _orbit_estimates(m, x_seed, n_max):
        if k >= n_max - window:
            hi = max(hi, est)
            lo = min(lo, est)
    return (float(hi), float(lo))


def estimate_trajectory(m: LiftedCircleMap, x_seed: float = 0.0,
                        n_max: int = 10_000, window: int = 100,
                        stride: int = 1):
    """Rows (n, estimate, running_max, running_min) every ``stride`` steps.

    The running extrema are taken over the trailing ``window`` estimates,
    matching rotation_bounds_qp at n = n_max.
    """
    if not (1 <= window <= n_max):
        raise ValueError("need n_max >= window >= 1")
    if isinstance(m, TranslationMap):
        return [(n, m.shift, m.shift, m.shift)
                for n in range(stride, n_max + 1, stride)]
    from collections import deque
    recent = deque(maxlen=window)
    rows = []
    for k, est in _orbit_estimates(m, x_seed, n_max):
        recent.append(est)
        if k % stride == 0 or k == n_max:
            rows.append((k, float(est), float(max(recent)),
                         float(min(recent))))
    return rows
