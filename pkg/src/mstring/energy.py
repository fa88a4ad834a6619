"""Energies, the two-coordinate equivalence sandwich, observability
functionals, and the damped-strip decay diagnostics.

Conventions follow the source formulas: the physical energy E_u carries a
factor 1/2, the strip energy E_V does not; the equivalence constants absorb
the mismatch.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .boundary import Boundary
from .conjugacy import Conjugacy
from .errors import DeltaOutOfRange
from .quadrature import integrate
from .solver import CharacteristicField, InitialData, StripField


@dataclass
class ObservationReport:
    T: float
    observation_integral: float
    initial_norm: float
    ratio: float          # nan when initial_norm == 0
    boundary_case: str
    quadrature_nodes: int
    ensemble_min_ratio: float | None = None
    ensemble_median_ratio: float | None = None
    ensemble_size: int = 0
    extras: dict = dc_field(default_factory=dict)


# ---------------------------------------------------------------------------
# energies


def energy_u(field: CharacteristicField, t: float, n_nodes: int = 2048) -> float:
    """(1/2) int_0^{a(t)} (u_t^2 + u_x^2) dx  =  int_{t-a}^{t+a} f'(y)^2 dy."""
    t = float(t)
    a = float(field.boundary.eval(t))
    if field.rule == "controlled":
        return energy_u_fd(field, t, n_nodes)
    lo, hi = t - a, t + a
    bps = field.fprime_breakpoints(lo, hi)
    return integrate(lambda y: field.fprime(y) ** 2, lo, hi, bps, n_nodes)


def energy_u_fd(field: CharacteristicField, t: float, n_grid: int = 2000,
                h: float = 1e-4) -> float:
    """Physical energy via central differences of u on a fine grid.

    Used for controlled fields, whose boundary signal is only piecewise
    smooth; avoids differentiating the control.
    """
    t = float(t)
    a = float(field.boundary.eval(t))
    x = np.linspace(h, a - h, n_grid)
    ut = (field.f(t + h + x) - field.f(t - h + x)
          - field.f(t + h - x) + field.f(t - h - x)) / (2 * h)
    ux = (field.f(t + x + h) - field.f(t + x - h)
          + field.f(t - x + h) - field.f(t - x - h)) / (2 * h)
    return float(0.5 * np.trapezoid(ut ** 2 + ux ** 2, x))


def energy_V(sf: StripField, tau: float, n_nodes: int = 2048) -> float:
    """int_0^L (V_xi^2 + V_tau^2) dxi = 2 int_{tau-L}^{tau+L} f'(y)^2 dy."""
    tau = float(tau)
    lo, hi = tau - sf.L, tau + sf.L
    bps = sf.fprime_breakpoints(lo, hi)
    return 2.0 * integrate(lambda y: sf.fprime(y) ** 2, lo, hi, bps, n_nodes)


def strip_energy_of_moving(field: CharacteristicField, c: Conjugacy,
                           t: float, n_nodes: int = 2048) -> float:
    """E_V of the flattened field at the endpoint strip-time of t.

    V = u o Phi^{-1} has profile f o H^{-1}, so after substituting back to
    physical characteristic coordinates,
    E_V(tau_b(t)) = 2 int_{t-a}^{t+a} f'(y)^2 H'(y) dy.
    """
    t = float(t)
    a = float(field.boundary.eval(t))
    lo, hi = t - a, t + a
    bps = list(field.fprime_breakpoints(lo, hi))
    # H' has kinks on the integer lattice
    bps += [k for k in range(int(np.floor(lo)), int(np.ceil(hi)) + 1)]
    return 2.0 * integrate(lambda y: field.fprime(y) ** 2 * c.H_prime(y),
                           lo, hi, bps, n_nodes)


def equivalence_constants(c: Conjugacy) -> tuple[float, float]:
    """(C1, C2) with C1 E_V <= E_u <= C2 E_V.

    Pointwise bounds lam1 <= H' <= lam2 on the quadratic form give the
    integrand sandwich lam1^2/2 .. lam2^2/2 per unit strip measure, and the
    slice measure factor contributes 1/lam2 .. 1/lam1.
    """
    lam1, lam2 = c.derivative_bounds()
    return (lam1 ** 2 / (2.0 * lam2), lam2 ** 2 / (2.0 * lam1))


def initial_norm(data: InitialData, n_nodes: int = 2048) -> float:
    """||phi||_{H^1}^2 + ||psi||_{L^2}^2 = int phi'^2 + int psi^2."""
    bps = [k for k in data.kinks]
    n1 = integrate(lambda x: np.asarray(data.dphi(x)) ** 2, 0.0, data.a0, bps, n_nodes)
    n2 = integrate(lambda x: np.asarray(data.psi(x)) ** 2, 0.0, data.a0, bps, n_nodes)
    return n1 + n2


# ---------------------------------------------------------------------------
# observability


def observation_integral(field: CharacteristicField, T: float,
                         n_nodes: int = 2048) -> ObservationReport:
    """Quadrature of the squared boundary trace over (0, T)."""
    T = float(T)
    # trace(t) is a function of s = t - a(t); map f' kinks back to times
    s0 = -field.a0
    sT = T - float(field.boundary.eval(T))
    bps_s = field.fprime_breakpoints(s0, sT)
    t_bps = list(0.5 * (bps_s + field.map.F(bps_s)))
    t_bps += list(field.boundary.kink_times(0.0, T))
    obs = integrate(lambda t: field.boundary_trace(t) ** 2, 0.0, T, t_bps, n_nodes)
    norm = initial_norm(field.data, n_nodes)
    case = "dirichlet" if field.rule == "dirichlet" else "mixed"
    ratio = obs / norm if norm > 0 else float("nan")
    return ObservationReport(T=T, observation_integral=obs, initial_norm=norm,
                             ratio=ratio, boundary_case=case,
                             quadrature_nodes=n_nodes)


def _unit_fourier_sample(rng: np.random.Generator, a0: float, n_modes: int,
                         flavor: str) -> InitialData:
    """Random sine-series data scaled to unit initial norm."""
    c = rng.standard_normal(n_modes)
    d = rng.standard_normal(n_modes)
    shift = 0.0 if flavor == "dirichlet" else 0.5
    w = (np.arange(1, n_modes + 1) - shift) * np.pi / a0
    norm2 = 0.5 * a0 * float(np.sum(w ** 2 * c ** 2 + d ** 2))
    scale = 1.0 / np.sqrt(norm2)
    phi_coeffs = [(k + 1, scale * c[k]) for k in range(n_modes)]
    psi_coeffs = [(k + 1, scale * d[k]) for k in range(n_modes)]
    return InitialData.fourier(a0, phi_coeffs, psi_coeffs, flavor)


def _adversarial_bumps(a0: float, flavor: str, n: int = 10) -> list[InitialData]:
    """Deterministic boundary-avoiding bump data."""
    out = []
    centers = np.linspace(0.2 * a0, 0.8 * a0, n)
    width = 0.15 * a0
    for i, cc in enumerate(centers):
        on = "phi" if i % 2 == 0 else "psi"
        out.append(InitialData.bump(a0, float(cc), width, 1.0, on=on, flavor=flavor))
    return out


def observability_constant(case: str, boundary: Boundary, T: float,
                           n_samples: int = 100, n_modes: int = 10,
                           seed: int = 0, n_nodes: int = 1024,
                           n_bumps: int = 10) -> ObservationReport:
    """Minimum observation/energy ratio over a seeded data ensemble.

    This is a positivity certificate restricted to the tested span, not a
    proof of the observability constant.
    """
    if case not in ("dirichlet", "mixed"):
        raise ValueError("case must be 'dirichlet' or 'mixed'")
    rule = "dirichlet" if case == "dirichlet" else "neumann"
    a0 = float(boundary.eval(0.0))
    rng = np.random.default_rng(seed)
    datas = [_unit_fourier_sample(rng, a0, n_modes, case) for _ in range(n_samples)]
    datas += _adversarial_bumps(a0, case, n_bumps)
    ratios = []
    for data in datas:
        f = CharacteristicField(data, boundary, rule=rule)
        rep = observation_integral(f, T, n_nodes)
        ratios.append(rep.ratio)
    ratios = np.asarray(ratios)
    return ObservationReport(
        T=float(T), observation_integral=float("nan"), initial_norm=1.0,
        ratio=float("nan"), boundary_case=case, quadrature_nodes=n_nodes,
        ensemble_min_ratio=float(np.min(ratios)),
        ensemble_median_ratio=float(np.median(ratios)),
        ensemble_size=len(ratios),
        extras={"ratios": ratios, "n_random": n_samples, "n_bumps": n_bumps,
                "n_modes": n_modes, "seed": seed})


# ---------------------------------------------------------------------------
# damped-strip diagnostics


def lyapunov_E1(sf: StripField, tau: float, delta: float,
                n_nodes: int = 2048) -> float:
    """E_V + delta * int_0^L xi V_xi V_tau dxi, for 0 <= delta < 1/(2L)."""
    rho = 2.0 * sf.L
    if delta < 0.0 or delta >= 1.0 / rho:
        raise DeltaOutOfRange(f"delta must lie in [0, {1.0 / rho})")
    ev = energy_V(sf, tau, n_nodes)
    if delta == 0.0:
        return ev
    tau = float(tau)
    bps_y = sf.fprime_breakpoints(tau - sf.L, tau + sf.L)
    bps_xi = np.abs(bps_y - tau)

    def integrand(xi):
        # V_xi V_tau = f'(tau+xi)^2 - f'(tau-xi)^2
        return xi * (sf.fprime(tau + xi) ** 2 - sf.fprime(tau - xi) ** 2)

    cross = integrate(integrand, 0.0, sf.L, bps_xi, n_nodes)
    return ev + delta * cross


def dissipation_identity_check(sf: StripField, T: float,
                               n_nodes: int = 4096) -> float:
    """Relative residual of the damped-end energy flux identity

        E_V(T) - E_V(0) = -2 int_0^T b(t(tau)) |V_tau(L, tau)|^2 dtau.

    The factor 2 matches the E_V convention without the leading 1/2.
    """
    e0 = energy_V(sf, 0.0, n_nodes)
    eT = energy_V(sf, float(T), n_nodes)
    bps_y = sf.fprime_breakpoints(-sf.L, float(T) + sf.L)

    def integrand(tau):
        b = np.asarray(sf.b_of_tau(tau), dtype=float)
        return b * sf.right_trace_V_tau(tau) ** 2

    bps_tau = np.concatenate([bps_y - sf.L, bps_y + sf.L])
    flux = integrate(integrand, 0.0, float(T), bps_tau, n_nodes)
    resid = abs(eT - e0 + 2.0 * flux)
    scale = max(e0, 1e-300)
    return resid / scale


def decay_fit(taus, energies, tau_min: float = 0.0) -> tuple[float, float, float]:
    """Least-squares fit E(tau) ~ C e^{-omega tau} E(0) on log E samples.

    Returns (C, omega, r_squared); samples below ``tau_min`` are dropped
    (the decay constants are not sharp during the initial transient).
    """
    taus = np.asarray(taus, dtype=float)
    energies = np.asarray(energies, dtype=float)
    keep = (taus >= tau_min) & (energies > 0)
    t = taus[keep]
    y = np.log(energies[keep] / energies[0])
    A = np.vstack([np.ones_like(t), -t]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    log_c, omega = coef
    fitted = A @ coef
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return (float(np.exp(log_c)), float(omega), r2)
