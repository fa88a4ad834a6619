"""Domain flattening between {0 < x < a(t)} and the strip {0 < xi < rho/2}.

xi  = (H(x + t) - H(-x + t)) / 2
tau = (H(x + t) + H(-x + t)) / 2

sends x = 0 to xi = 0 and x = a(t) to xi = rho/2, and maps wave solutions
to wave solutions: the two d'Alembertians differ by the positive factor
H'(H^{-1}(tau + xi)) * H'(H^{-1}(tau - xi)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boundary import Boundary
from .conjugacy import Conjugacy
from .errors import OutOfDomain, OutOfStrip

BOUNDARY_TOL = 1e-10


@dataclass(frozen=True)
class StripPoint:
    xi: float
    tau: float


def phi(c: Conjugacy, x, t, boundary: Boundary | None = None) -> StripPoint:
    """Map a physical point into the strip.

    If ``boundary`` is given, membership 0 <= x <= a(t) is enforced.
    """
    x = float(x)
    t = float(t)
    if boundary is not None:
        a = boundary.eval(t)
        if x < -BOUNDARY_TOL or x > a + BOUNDARY_TOL:
            raise OutOfDomain(f"x={x} outside [0, a(t)={a}]")
    hp = c.H(t + x)
    hm = c.H(t - x)
    return StripPoint(xi=0.5 * (hp - hm), tau=0.5 * (hp + hm))


def phi_inv(c: Conjugacy, p: StripPoint) -> tuple[float, float]:
    """Inverse flattening; raises OutOfStrip for xi outside [0, rho/2]."""
    if p.xi < -BOUNDARY_TOL or p.xi > 0.5 * c.rho + BOUNDARY_TOL:
        raise OutOfStrip(f"xi={p.xi} outside [0, {0.5 * c.rho}]")
    yp = c.H_inv(p.tau + p.xi)
    ym = c.H_inv(p.tau - p.xi)
    return (0.5 * (yp - ym), 0.5 * (yp + ym))


def conformal_factor(c: Conjugacy, p: StripPoint) -> float:
    """Ratio between the physical and strip d'Alembertians at a strip point.

    Strictly positive and bounded by the squared derivative bounds of H.
    """
    return float(c.H_prime(c.H_inv(p.tau + p.xi)) *
                 c.H_prime(c.H_inv(p.tau - p.xi)))


def boundary_tau(c: Conjugacy, boundary: Boundary, t):
    """Strip time of the moving endpoint: tau(a(t), t) = H(t - a(t)) + rho/2."""
    t = np.asarray(t, dtype=float)
    a = np.asarray(boundary.eval(t), dtype=float)
    out = np.asarray(c.H(t - a), dtype=float) + 0.5 * c.rho
    return out if out.ndim else float(out)


def time_of_boundary_tau(c: Conjugacy, boundary: Boundary, m, tau):
    """Invert boundary_tau: physical time whose endpoint strip-time is tau.

    Uses s = H^{-1}(tau - rho/2) and t = (s + F(s)) / 2, exact for
    closed-form conjugacies.
    """
    tau = np.asarray(tau, dtype=float)
    s = c.H_inv(tau - 0.5 * c.rho)
    out = np.asarray(0.5 * (s + m.F(s)), dtype=float)
    return out if out.ndim else float(out)
