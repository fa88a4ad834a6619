"""Exact characteristic solvers for the moving-boundary and strip problems.

Everything is carried by the d'Alembert profile derivative f' on the seed
interval [-a(0), a(0)) together with a boundary-extension rule along orbits
of the lifted circle map:

* Dirichlet end  u(a(t), t) = 0      ->  f'(F(s)) =  f'(s) / F'(s)
* Neumann end    u_x(a(t), t) = 0    ->  f'(F(s)) = -f'(s)
* Controlled end u(a(t), t) = r(t)   ->  f(F(s))  =  f(s) + r(t(s))

with s = t - a(t) and F(s) = t + a(t).  The solution is
u(x, t) = f(t + x) - f(t - x), exact up to seed-interval quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .boundary import Boundary, ConstantBoundary
from .circle_map import LiftedCircleMap, build_map
from .conjugacy import Conjugacy, eval_b
from .errors import (BeforeInitialTime, IncompatibleData, OutOfDomain,
                     SingularAtOrigin, UnsupportedKind)
from .quadrature import KINK_JITTER, gauss_rule, integrate
from .transform import time_of_boundary_tau

COMPAT_TOL = 1e-10


# ---------------------------------------------------------------------------
# initial data


class InitialData:
    """Displacement/velocity profiles on (0, a0) with compatibility checks.

    ``flavor`` is ``"dirichlet"`` (phi vanishes at both ends) or ``"mixed"``
    (phi vanishes at the left end only).
    """

    def __init__(self, phi, dphi, psi, a0: float, flavor: str = "dirichlet",
                 kinks: Sequence[float] = (), resolution: int = 8):
        if flavor not in ("dirichlet", "mixed"):
            raise ValueError(f"unknown flavor {flavor!r}")
        self.phi = phi
        self.dphi = dphi
        self.psi = psi
        self.a0 = float(a0)
        self.flavor = flavor
        self.kinks = tuple(float(k) for k in kinks)
        self.resolution = max(1, int(resolution))
        if abs(float(phi(0.0))) > COMPAT_TOL:
            raise IncompatibleData(f"phi(0) = {float(phi(0.0)):.3e} != 0")
        if flavor == "dirichlet" and abs(float(phi(self.a0))) > COMPAT_TOL:
            raise IncompatibleData(f"phi(a0) = {float(phi(self.a0)):.3e} != 0")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, a0: float, flavor: str = "dirichlet") -> "InitialData":
        z = lambda x: np.zeros_like(np.asarray(x, dtype=float))
        return cls(z, z, z, a0, flavor)

    @classmethod
    def fourier(cls, a0: float, phi_coeffs: Sequence[tuple[int, float]] = (),
                psi_coeffs: Sequence[tuple[int, float]] = (),
                flavor: str = "dirichlet") -> "InitialData":
        """Sine-series data: sin(k pi x / a0) for the Dirichlet flavor,
        sin((k - 1/2) pi x / a0) for the mixed flavor."""
        a0 = float(a0)
        shift = 0.0 if flavor == "dirichlet" else 0.5

        def mode_freqs(coeffs):
            return [((k - shift) * np.pi / a0, c) for k, c in coeffs]

        fp = mode_freqs(phi_coeffs)
        fq = mode_freqs(psi_coeffs)

        def phi(x):
            x = np.asarray(x, dtype=float)
            out = np.zeros_like(x)
            for w, c in fp:
                out += c * np.sin(w * x)
            return out

        def dphi(x):
            x = np.asarray(x, dtype=float)
            out = np.zeros_like(x)
            for w, c in fp:
                out += c * w * np.cos(w * x)
            return out

        def psi(x):
            x = np.asarray(x, dtype=float)
            out = np.zeros_like(x)
            for w, c in fq:
                out += c * np.sin(w * x)
            return out

        res = max([k for k, _ in list(phi_coeffs) + list(psi_coeffs)] or [1])
        return cls(phi, dphi, psi, a0, flavor, resolution=res)

    @classmethod
    def bump(cls, a0: float, center: float, width: float, amplitude: float = 1.0,
             on: str = "phi", flavor: str = "dirichlet") -> "InitialData":
        """Smooth compactly supported bump on (center - w/2, center + w/2)."""
        lo, hi = center - width / 2.0, center + width / 2.0
        if not (0.0 < lo and hi < a0):
            raise IncompatibleData("bump support must stay inside (0, a0)")

        def g(x):
            x = np.asarray(x, dtype=float)
            s = 2.0 * (x - center) / width
            out = np.zeros_like(x)
            inner = np.abs(s) < 1.0
            si = s[inner]
            out[inner] = amplitude * np.exp(1.0 - 1.0 / (1.0 - si * si))
            return out

        def dg(x):
            x = np.asarray(x, dtype=float)
            s = 2.0 * (x - center) / width
            out = np.zeros_like(x)
            inner = np.abs(s) < 1.0
            si = s[inner]
            q = 1.0 - si * si
            out[inner] = amplitude * np.exp(1.0 - 1.0 / q) * (-2.0 * si / q ** 2) \
                * (2.0 / width)
            return out

        z = lambda x: np.zeros_like(np.asarray(x, dtype=float))
        if on == "phi":
            return cls(g, dg, z, a0, flavor, kinks=(lo, hi), resolution=16)
        return cls(z, z, g, a0, flavor, kinks=(lo, hi), resolution=16)

    @classmethod
    def from_callables(cls, phi, dphi, psi, a0, flavor="dirichlet",
                       kinks=(), resolution=8):
        return cls(phi, dphi, psi, a0, flavor, kinks, resolution)

    # -- seed profile ------------------------------------------------------

    def fprime_seed(self, y):
        """f' on [-a0, a0): (phi' + psi)/2 on [0, a0), (phi' - psi)/2 mirrored."""
        y = np.asarray(y, dtype=float)
        ay = np.abs(y)
        dphi = np.asarray(self.dphi(ay), dtype=float)
        psi = np.asarray(self.psi(ay), dtype=float)
        out = np.where(y >= 0.0, 0.5 * (dphi + psi), 0.5 * (dphi - psi))
        return out if out.ndim else float(out)

    def seed_kinks(self) -> np.ndarray:
        ks = {0.0, -self.a0}
        for k in self.kinks:
            ks.add(k)
            ks.add(-k)
        return np.sort(np.asarray([k for k in ks if -self.a0 <= k < self.a0]))


def seed_profile(data: InitialData, a0: float | None = None):
    """Callable f' on the seed interval [-a0, a0)."""
    if a0 is not None and abs(a0 - data.a0) > 1e-12:
        raise IncompatibleData("a0 mismatch between data and boundary")
    return data.fprime_seed


# ---------------------------------------------------------------------------
# seed antiderivative with kink-split cached panels


class _Antiderivative:
    """Cached f(y) = int_0^y fp on an interval, panels split at kinks."""

    def __init__(self, fp, lo: float, hi: float, kinks, resolution: int):
        max_panel = (hi - lo) / max(8, 4 * resolution)
        pts = [lo, hi] + [float(k) for k in kinks if lo < k < hi] + [0.0]
        edges = np.unique(np.asarray(pts))
        ref = [edges[0]]
        for a, b in zip(edges[:-1], edges[1:]):
            n = max(1, int(np.ceil((b - a) / max_panel)))
            ref.extend(np.linspace(a, b, n + 1)[1:])
        self.edges = np.asarray(ref)
        self.fp = fp
        x, w = gauss_rule(24)
        half = 0.5 * np.diff(self.edges)
        mid = 0.5 * (self.edges[:-1] + self.edges[1:])
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        vals = np.asarray(fp(nodes), dtype=float).reshape(len(half), 24)
        panel = vals @ w * half
        cum = np.concatenate([[0.0], np.cumsum(panel)])
        i0 = int(np.searchsorted(self.edges, 0.0))
        self.cum = cum - cum[i0]  # anchored at f(0) = 0
        self._x24, self._w24 = x, w

    def __call__(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        idx = np.clip(np.searchsorted(self.edges, y, side="right") - 1,
                      0, len(self.edges) - 2)
        lo = self.edges[idx]
        half = 0.5 * (y - lo)
        mid = 0.5 * (y + lo)
        nodes = (mid[:, None] + half[:, None] * self._x24[None, :]).ravel()
        vals = np.asarray(self.fp(nodes), dtype=float).reshape(len(y), 24)
        out = self.cum[idx] + vals @ self._w24 * half
        return out if np.ndim(y) else float(out)


# ---------------------------------------------------------------------------
# moving-boundary field


class CharacteristicField:
    """Solution of the moving-boundary problem via the profile f'.

    ``rule`` is one of ``"dirichlet"``, ``"neumann"``, ``"controlled"``;
    the controlled rule takes the boundary signal ``r`` (a vectorized
    callable of physical time).
    """

    def __init__(self, data: InitialData, boundary: Boundary,
                 rule: str = "dirichlet", r: Callable | None = None,
                 cmap: LiftedCircleMap | None = None):
        if rule not in ("dirichlet", "neumann", "controlled"):
            raise ValueError(f"unknown rule {rule!r}")
        if rule == "controlled" and r is None:
            raise ValueError("controlled rule needs a boundary signal r")
        a0 = float(boundary.eval(0.0))
        if abs(a0 - data.a0) > 1e-12:
            raise IncompatibleData(
                f"data defined on (0, {data.a0}) but a(0) = {a0}")
        self.data = data
        self.boundary = boundary
        self.rule = rule
        self.r = r
        self.map = cmap if cmap is not None else build_map(boundary)
        self.a0 = a0
        self.a_min, self.a_max = boundary.extrema()
        self._seed_fp = data.fprime_seed
        self._seed_f = _Antiderivative(
            data.fprime_seed, -a0, a0, data.seed_kinks(), data.resolution)
        self._bp_cache_hi = -np.inf
        self._bp_cache = np.empty(0)

    # -- pullback ----------------------------------------------------------

    def _pullback(self, y):
        """Reduce characteristic coordinates to the seed interval.

        Returns (seed points, accumulated rule factor, depth).  The factor
        is 1/F' per crossing for Dirichlet, -1 for Neumann, 1 for the
        controlled rule (whose extension acts on values, not derivatives).
        """
        y = np.atleast_1d(np.asarray(y, dtype=float)).copy()
        if np.any(y < -self.a0 - 1e-12):
            raise BeforeInitialTime("characteristic coordinate below -a(0)")
        fac = np.ones_like(y)
        depth = np.zeros(y.shape, dtype=int)
        mask = y >= self.a0
        while np.any(mask):
            s = self.map.F_inv(y[mask])
            if self.rule == "dirichlet":
                fac[mask] /= self.map.F_prime(s)
            elif self.rule == "neumann":
                fac[mask] = -fac[mask]
            depth[mask] += 1
            y[mask] = s
            mask = y >= self.a0
        return y, fac, depth

    def fprime(self, y):
        """Profile derivative f'(y) for the reflecting rules."""
        if self.rule == "controlled":
            raise UnsupportedKind(
                "controlled fields expose values only; use finite differences")
        shape = np.shape(y)
        s, fac, _ = self._pullback(y)
        out = self._seed_fp(s) * fac
        return out.reshape(shape) if shape else float(out[0])

    def pullback_depth(self, y):
        _, _, depth = self._pullback(y)
        return depth if np.shape(y) else int(depth)

    def f(self, y):
        """Profile value f(y), normalized by f(0) = 0."""
        shape = np.shape(y)
        y = np.atleast_1d(np.asarray(y, dtype=float)).copy()
        if self.rule == "dirichlet":
            s, _, _ = self._pullback(y)
            out = self._seed_f(s)
        elif self.rule == "controlled":
            out = np.zeros_like(y)
            mask = y >= self.a0
            while np.any(mask):
                s = self.map.F_inv(y[mask])
                out[mask] += self.r(0.5 * (s + y[mask]))
                y[mask] = s
                mask = y >= self.a0
            out += self._seed_f(y)
        else:  # neumann: integrate f' outward, kink-split cached panels
            out = self._f_by_integration(y)
        return out.reshape(shape) if shape else float(out[0])

    def _f_by_integration(self, y):
        hi = float(np.max(y))
        if not hasattr(self, "_ext_f") or hi > self._ext_hi:
            self._ext_hi = max(hi, self.a0 + 1.0)
            bps = self.fprime_breakpoints(-self.a0, self._ext_hi)
            self._ext_f = _Antiderivative(
                self.fprime, -self.a0, self._ext_hi, bps, self.data.resolution)
        return self._ext_f(y)

    # -- solution values ---------------------------------------------------

    def _check_domain(self, x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        a = np.asarray(self.boundary.eval(t), dtype=float)
        if np.any(t < -1e-12) or np.any(x < -1e-10) or np.any(x > a + 1e-10):
            raise OutOfDomain("point outside {0 <= x <= a(t), t >= 0}")
        return x, t

    def u(self, x, t):
        x, t = self._check_domain(x, t)
        return self.f(t + x) - self.f(t - x)

    def ut(self, x, t):
        x, t = self._check_domain(x, t)
        if self.rule == "controlled":
            h = 1e-6
            return (self.f(t + h + x) - self.f(t - h + x)
                    - self.f(t + h - x) + self.f(t - h - x)) / (2 * h)
        return self.fprime(t + x) - self.fprime(t - x)

    def ux(self, x, t):
        x, t = self._check_domain(x, t)
        if self.rule == "controlled":
            h = 1e-6
            return (self.f(t + x + h) - self.f(t + x - h)
                    + self.f(t - x + h) - self.f(t - x - h)) / (2 * h)
        return self.fprime(t + x) + self.fprime(t - x)

    def boundary_trace(self, t):
        """Observed boundary quantity: u_x(a(t), t) for Dirichlet,
        u_t(a(t), t) for Neumann, from the reflection relations."""
        t = np.asarray(t, dtype=float)
        s = t - np.asarray(self.boundary.eval(t), dtype=float)
        fp = self.fprime(s)
        if self.rule == "dirichlet":
            Fp = self.map.F_prime(s)
            return fp * (1.0 + Fp) / Fp
        if self.rule == "neumann":
            return -2.0 * fp
        raise UnsupportedKind("no trace formula for the controlled rule")

    # -- kink bookkeeping ---------------------------------------------------

    def fprime_breakpoints(self, lo: float, hi: float) -> np.ndarray:
        """Non-smooth points of f' in [lo, hi]: forward F-orbit closure of
        seed kinks and of the map's own kink lattice."""
        if hi > self._bp_cache_hi:
            seeds = list(self.data.seed_kinks()) + [self.a0] \
                + list(self.map.kinks(-self.a0, hi))
            pts = set()
            for s in seeds:
                if -self.a0 <= s < self.a0:
                    pts.add(float(s))
                y = float(s)
                while True:
                    y = float(self.map.F(y))
                    if y > hi:
                        break
                    pts.add(y)
            arr = np.sort(np.asarray(list(pts)))
            # dedupe to 1e-12
            if len(arr):
                keep = np.concatenate([[True], np.diff(arr) > 1e-12])
                arr = arr[keep]
            self._bp_cache = arr
            self._bp_cache_hi = hi
        arr = self._bp_cache
        return arr[(arr >= lo) & (arr <= hi)]


# ---------------------------------------------------------------------------
# strip fields (constant reflection shift 2L)


class StripField:
    """d'Alembert field on the strip (0, L) with a rule at the right end.

    Rules: ``"dirichlet"`` (conservative), ``"damped"`` with reflection
    coefficient k(tau) = (1 - b(tau)) / (1 + b(tau)), ``"controlled"`` with
    Dirichlet boundary value g(tau) at xi = L.
    """

    def __init__(self, data: InitialData, L: float, rule: str = "dirichlet",
                 b_of_tau: Callable | None = None,
                 b_kinks: Callable | None = None,
                 g: Callable | None = None, gprime: Callable | None = None):
        if rule not in ("dirichlet", "damped", "controlled"):
            raise ValueError(f"unknown rule {rule!r}")
        if abs(data.a0 - L) > 1e-12:
            raise IncompatibleData("data must live on (0, L)")
        if rule == "damped" and b_of_tau is None:
            raise ValueError("damped rule needs b(tau)")
        if rule == "controlled" and (g is None or gprime is None):
            raise ValueError("controlled rule needs g and g'")
        self.data = data
        self.L = float(L)
        self.rule = rule
        self.b_of_tau = b_of_tau
        self.b_kinks = b_kinks
        self.g = g
        self.gprime = gprime
        self._seed_fp = data.fprime_seed
        self._seed_f = _Antiderivative(
            data.fprime_seed, -L, L, data.seed_kinks(), data.resolution)

    def k_of_tau(self, tau):
        b = np.asarray(self.b_of_tau(tau), dtype=float)
        return (1.0 - b) / (1.0 + b)

    def _crossings(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if np.any(y < -self.L - 1e-12):
            raise BeforeInitialTime("characteristic coordinate below -L")
        m = np.maximum(0, np.floor((y + self.L) / (2.0 * self.L)).astype(int))
        return y, m

    def fprime(self, y):
        shape = np.shape(y)
        y, m = self._crossings(y)
        y0 = y - 2.0 * self.L * m
        out = self._seed_fp(y0).astype(float)
        if self.rule == "damped":
            fac = np.ones_like(out)
            for j in range(1, int(np.max(m, initial=0)) + 1):
                sel = m >= j
                fac[sel] *= -self.k_of_tau(y[sel] - (2 * j - 1) * self.L)
            out *= fac
        elif self.rule == "controlled":
            for j in range(1, int(np.max(m, initial=0)) + 1):
                sel = m >= j
                out[sel] += np.asarray(
                    self.gprime(y[sel] - (2 * j - 1) * self.L), dtype=float)
        return out.reshape(shape) if shape else float(out[0])

    def f(self, y):
        shape = np.shape(y)
        y, m = self._crossings(y)
        y0 = y - 2.0 * self.L * m
        out = np.asarray(self._seed_f(y0), dtype=float)
        if self.rule == "controlled":
            for j in range(1, int(np.max(m, initial=0)) + 1):
                sel = m >= j
                out[sel] += np.asarray(
                    self.g(y[sel] - (2 * j - 1) * self.L), dtype=float)
        elif self.rule == "damped":
            raise UnsupportedKind("damped strip exposes f' only")
        return out.reshape(shape) if shape else float(out[0])

    def V_xi(self, xi, tau):
        return self.fprime(tau + xi) + self.fprime(tau - xi)

    def V_tau(self, xi, tau):
        return self.fprime(tau + xi) - self.fprime(tau - xi)

    def right_trace_V_tau(self, tau):
        return self.V_tau(self.L, tau)

    def fprime_breakpoints(self, lo: float, hi: float) -> np.ndarray:
        """Kinks of f': seed kinks and +-L on the 2L lattice, plus images of
        the damping signal's kinks."""
        pts = set()
        bases = set(float(k) for k in self.data.seed_kinks()) | {self.L, -self.L}
        for base in bases:
            k0 = int(np.floor((lo - base) / (2 * self.L)))
            k1 = int(np.ceil((hi - base) / (2 * self.L)))
            for k in range(k0, k1 + 1):
                p = base + 2 * self.L * k
                if lo <= p <= hi:
                    pts.add(p)
        if self.rule == "damped" and self.b_kinks is not None:
            # reflection j at tau_j = y - (2j-1)L: kinks of b map to
            # y = tau_kink + (2j-1)L
            jmax = int(np.ceil((hi + self.L) / (2 * self.L))) + 1
            for tk in np.atleast_1d(self.b_kinks(lo - 2 * self.L * jmax, hi)):
                for j in range(1, jmax + 1):
                    p = tk + (2 * j - 1) * self.L
                    if lo <= p <= hi:
                        pts.add(float(p))
        return np.sort(np.asarray(list(pts)))


def strip_solve(data: InitialData, L: float, end_rule: str = "dirichlet",
                **kwargs) -> StripField:
    """Build a strip field; alias constructor matching the operation map."""
    return StripField(data, L, end_rule, **kwargs)


def transformed_damping(c: Conjugacy, boundary: Boundary,
                        cmap: LiftedCircleMap):
    """b(t(tau)) for the damped strip system plus its kink locations in tau.

    t(tau) inverts the endpoint strip-time map; b's kinks sit at integer
    physical times and at the profile's slope breaks.
    """

    def b_of_tau(tau):
        t = time_of_boundary_tau(c, boundary, cmap, tau)
        return eval_b(c, boundary, t)

    def kinks(lo, hi):
        from .transform import boundary_tau
        # invert roughly: physical kink times covering [lo, hi] in tau
        t_lo = float(time_of_boundary_tau(c, boundary, cmap, lo)) - 2.0
        t_hi = float(time_of_boundary_tau(c, boundary, cmap, hi)) + 2.0
        tk = set(float(v) for v in boundary.kink_times(t_lo, t_hi))
        tk |= set(range(int(np.floor(t_lo)), int(np.ceil(t_hi)) + 1))
        taus = boundary_tau(c, boundary, np.asarray(sorted(tk)))
        return taus[(taus >= lo) & (taus <= hi)]

    return b_of_tau, kinks


# ---------------------------------------------------------------------------
# 3-D radial reduction


def radial_reduce(phi3, dphi3, psi3, a0: float) -> InitialData:
    """Wrap radial data u(r) into string data w = r u for the 1-D solver."""
    r_small = 1e-8
    if abs(r_small * float(phi3(r_small))) > 1e-6:
        raise SingularAtOrigin("r * phi3(r) must vanish at r = 0")

    def phi(r):
        r = np.asarray(r, dtype=float)
        return r * np.asarray(phi3(r), dtype=float)

    def dphi(r):
        r = np.asarray(r, dtype=float)
        return np.asarray(phi3(r), dtype=float) + r * np.asarray(dphi3(r), dtype=float)

    def psi(r):
        r = np.asarray(r, dtype=float)
        return r * np.asarray(psi3(r), dtype=float)

    return InitialData(phi, dphi, psi, a0, flavor="dirichlet")


def radial_lift(field: CharacteristicField):
    """u(r, t) = w(r, t) / r with the removable singularity at r = 0."""

    def u3(r, t):
        r = np.asarray(r, dtype=float)
        t = np.asarray(t, dtype=float)
        small = r < 1e-9
        # keep placeholder radii inside the domain; they are overwritten below
        r_safe = np.where(small, 0.5 * field.a_min, r)
        vals = np.asarray(field.u(r_safe, t), dtype=float) / r_safe
        if np.any(small):
            # limit w(r,t)/r -> w_r(0,t) = 2 f'(t)
            lim = 2.0 * np.asarray(field.fprime(np.broadcast_to(t, r.shape) if r.ndim else t),
                                   dtype=float)
            vals = np.where(small, lim, vals)
        return vals if vals.ndim else float(vals)

    return u3
