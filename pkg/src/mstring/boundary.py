"""Moving-endpoint profiles a(t).

Three families: the two-slope continuous piecewise-linear 1-periodic
profile, the constant endpoint, and quasi-periodic profiles a(t) = a_hat(w t)
on an m-torus.  All must stay positive and move strictly slower than the
wave speed (|a'| < 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateSlopes, SlopeTooLarge

QP_SAMPLES_PER_PERIOD = 10_000


@dataclass(frozen=True)
class TwoSlopeBoundary:
    """Continuous 1-periodic profile with slopes alpha then beta.

    On the fundamental window [t_start, t_start + 1) the profile rises
    (or falls) with slope alpha up to t_mid and continues with slope beta.
    The breakpoints are chosen so that the induced reflection map has a
    two-branch closed form on [0, 1).
    """

    alpha: float
    beta: float

    def __post_init__(self):
        if not (-1.0 < self.alpha < 1.0) or not (-1.0 < self.beta < 1.0):
            raise SlopeTooLarge(
                f"slopes must lie in (-1, 1), got alpha={self.alpha}, beta={self.beta}")
        if self.alpha == self.beta:
            raise DegenerateSlopes("alpha == beta: use ConstantBoundary instead")
        # positivity: piecewise linear, so checking the two breakpoints suffices
        if self.eval(self.t_start) <= 0 or self.eval(self.t_mid) <= 0:
            raise ValueError("a(t) must be strictly positive on the period")

    @property
    def period(self) -> float:
        return 1.0

    @property
    def l1(self) -> float:
        return (1.0 + self.alpha) / (1.0 - self.alpha)

    @property
    def l2(self) -> float:
        return (1.0 + self.beta) / (1.0 - self.beta)

    @property
    def t_start(self) -> float:
        return self.alpha * (1.0 + self.beta) / (2.0 * (self.alpha - self.beta))

    @property
    def t_mid(self) -> float:
        return (self.alpha * (1.0 + self.beta) - 2.0 * self.beta) / (2.0 * (self.alpha - self.beta))

    def _branch1(self, t):
        a, b = self.alpha, self.beta
        return a * t + a * (1.0 - a) * (1.0 + b) / (2.0 * (a - b))

    def _branch2(self, t):
        a, b = self.alpha, self.beta
        return b * t - b + a * (1.0 - b * b) / (2.0 * (a - b))

    def eval(self, t):
        """a(t), vectorized, reduced to the fundamental window."""
        t = np.asarray(t, dtype=float)
        tr = t - np.floor(t - self.t_start)  # in [t_start, t_start + 1)
        out = np.where(tr <= self.t_mid, self._branch1(tr), self._branch2(tr))
        return out if out.ndim else float(out)

    def extrema(self) -> tuple[float, float]:
        vals = [self.eval(self.t_start), self.eval(self.t_mid)]
        return (min(vals), max(vals))

    def lipschitz_constant(self) -> float:
        return max(abs(self.alpha), abs(self.beta))

    def kink_times(self, lo: float, hi: float) -> np.ndarray:
        """Times in [lo, hi] where a' jumps (breakpoints mod 1)."""
        out = []
        for base in (self.t_start, self.t_mid):
            k0 = int(np.floor(lo - base))
            k1 = int(np.ceil(hi - base))
            out.extend(base + k for k in range(k0, k1 + 1) if lo <= base + k <= hi)
        return np.sort(np.asarray(out))


@dataclass(frozen=True)
class ConstantBoundary:
    """Fixed endpoint a(t) = a0."""

    a0: float

    def __post_init__(self):
        if self.a0 <= 0:
            raise ValueError("a0 must be positive")

    @property
    def period(self) -> float:
        return 1.0  # any value works; a is constant

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, self.a0)
        return out if out.ndim else float(out)

    def extrema(self) -> tuple[float, float]:
        return (self.a0, self.a0)

    def lipschitz_constant(self) -> float:
        return 0.0

    def kink_times(self, lo: float, hi: float) -> np.ndarray:
        return np.empty(0)


@dataclass(frozen=True)
class QuasiPeriodicBoundary:
    """a(t) = a_hat(omega * t) with a_hat 2*pi-periodic in each angle.

    Extrema and the Lipschitz constant have no closed form; they are
    estimated on a dense sample grid whose size is recorded on the
    instance for reporting.
    """

    hat_a: Callable[..., float]
    freq: tuple[float, ...]
    sample_window: float = 0.0   # 0 -> a few multiples of the largest basic period
    samples_per_period: int = QP_SAMPLES_PER_PERIOD
    _grid_stats: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        freq = tuple(float(w) for w in self.freq)
        object.__setattr__(self, "freq", freq)
        if any(w == 0 for w in freq):
            raise ValueError("frequencies must be nonzero")
        self._sample()

    @property
    def basic_periods(self) -> tuple[float, ...]:
        return tuple(2.0 * np.pi / abs(w) for w in self.freq)

    def _sample(self):
        window = self.sample_window or 8.0 * max(self.basic_periods)
        n = int(self.samples_per_period * window / min(self.basic_periods))
        n = min(max(n, 10_000), 2_000_000)
        t = np.linspace(0.0, window, n)
        vals = self.eval(t)
        if np.min(vals) <= 0:
            raise ValueError("a(t) must be strictly positive (sampled grid)")
        slopes = np.abs(np.diff(vals) / np.diff(t))
        lip = float(np.max(slopes))
        if lip >= 1.0:
            raise SlopeTooLarge(f"sampled |a'| = {lip:.4f} >= 1")
        self._grid_stats.update(
            window=window, n_samples=n,
            a_min=float(np.min(vals)), a_max=float(np.max(vals)), lipschitz=lip)

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        angles = [w * t for w in self.freq]
        out = np.asarray(self.hat_a(*angles), dtype=float)
        return out if out.ndim else float(out)

    def extrema(self) -> tuple[float, float]:
        return (self._grid_stats["a_min"], self._grid_stats["a_max"])

    def lipschitz_constant(self) -> float:
        return self._grid_stats["lipschitz"]

    @property
    def grid_info(self) -> dict:
        return dict(self._grid_stats)

    def kink_times(self, lo: float, hi: float) -> np.ndarray:
        return np.empty(0)


Boundary = TwoSlopeBoundary | ConstantBoundary | QuasiPeriodicBoundary


def eval_a(boundary: Boundary, t):
    return boundary.eval(t)


def extrema(boundary: Boundary) -> tuple[float, float]:
    return boundary.extrema()


def lipschitz_constant(boundary: Boundary) -> float:
    lip = boundary.lipschitz_constant()
    if lip >= 1.0:
        raise SlopeTooLarge(f"L(a) = {lip} >= 1")
    return lip
