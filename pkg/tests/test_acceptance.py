"""End-to-end acceptance checks.

Each test prints a single PASS/FAIL line (run with -s to see them all) and
asserts the same condition, so the suite doubles as a human-readable report.
"""

import time

import numpy as np
import pytest

from mstring.boundary import (ConstantBoundary, QuasiPeriodicBoundary,
                              TwoSlopeBoundary)
from mstring.circle_map import (build_map, rotation_bounds_qp,
                                rotation_closed_form, rotation_estimate)
from mstring.cli import main as cli_main
from mstring.conjugacy import build_conjugacy, conjugation_residual
from mstring.control import (ControlPlan, strip_mode_data,
                             synthesize_moving_control, verify_control)
from mstring.energy import (decay_fit, dissipation_identity_check, energy_u,
                            energy_V, equivalence_constants, lyapunov_E1,
                            observability_constant, observation_integral,
                            strip_energy_of_moving)
from mstring.solver import (CharacteristicField, InitialData, StripField,
                            radial_lift, radial_reduce, transformed_damping)
from mstring.transform import phi as strip_phi

RHO = np.log(2.0) / np.log(3.0)


def report(name: str, ok: bool, detail: str = "") -> bool:
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}" + (f"  ({detail})" if detail else ""))
    return ok


# 1 -------------------------------------------------------------------------


def test_criterion_01_rotation_number(map_a):
    t0 = time.perf_counter()
    est, _ = rotation_estimate(map_a, n=10_000)
    elapsed = time.perf_counter() - t0
    err = abs(est - RHO)
    ok = err <= 1.1e-4 and elapsed < 1.0
    assert report("01 rotation-number agreement",
                  ok, f"error {err:.3e}, {elapsed:.3f} s")


# 2 -------------------------------------------------------------------------


def test_criterion_02_conjugacy_residual(map_a, conj_a, map_b, conj_b):
    ra = conjugation_residual(conj_a, map_a, n=1000)
    rb = conjugation_residual(conj_b, map_b, n=1000)
    m0 = build_map(ConstantBoundary(0.5))
    r0 = conjugation_residual(build_conjugacy(m0), m0, n=1000)
    ok = ra <= 1e-12 and rb <= 1e-12 and r0 <= 1e-15
    assert report("02 conjugacy residual (both orderings + constant)",
                  ok, f"{ra:.2e} / {rb:.2e} / {r0:.2e}")


# 3 -------------------------------------------------------------------------


def test_criterion_03_flattening(conj_a, case_a):
    worst_right = 0.0
    worst_left = 0.0
    for t in np.linspace(0.0, 10.0, 100):
        a = float(case_a.eval(t))
        worst_right = max(worst_right,
                          abs(strip_phi(conj_a, a, t).xi - 0.5 * conj_a.rho))
        worst_left = max(worst_left, abs(strip_phi(conj_a, 0.0, t).xi))
    ok = worst_right <= 1e-10 and worst_left <= 1e-12
    assert report("03 boundary flattening",
                  ok, f"right {worst_right:.2e}, left {worst_left:.2e}")


# 4 -------------------------------------------------------------------------


def _fd_residual(fld, x, t, h):
    ht, hx = h, 0.5 * h
    utt = (fld.u(x, t + ht) - 2 * fld.u(x, t) + fld.u(x, t - ht)) / ht ** 2
    uxx = (fld.u(x + hx, t) - 2 * fld.u(x, t) + fld.u(x - hx, t)) / hx ** 2
    return utt - uxx


def test_criterion_04_solver_exactness(case_a):
    rng = np.random.default_rng(42)
    a0 = float(case_a.eval(0.0))
    hs = (1e-2, 5e-3, 2.5e-3)
    min_order = np.inf
    worst_dirichlet = 0.0
    for _ in range(20):
        c = rng.standard_normal(3) * 0.5
        d = rng.standard_normal(3) * 0.5
        data = InitialData.fourier(a0, [(k + 1, c[k]) for k in range(3)],
                                   [(k + 1, d[k]) for k in range(3)])
        fld = CharacteristicField(data, case_a)
        bps = fld.fprime_breakpoints(-a0, 6.0)
        # the field is only piecewise C^2; keep each stencil clear of the
        # profile's derivative jumps
        pts = []
        while len(pts) < 5:
            t = float(rng.uniform(0.5, 4.0))
            a = float(case_a.eval(t))
            x = float(rng.uniform(0.05, 0.9)) * a
            clear = min(np.min(np.abs(bps - (t + x))),
                        np.min(np.abs(bps - (t - x))))
            if clear > 0.03 and 0.02 < x < a - 0.02:
                pts.append((x, t))
        res = [float(np.sqrt(np.mean([_fd_residual(fld, x, t, h) ** 2
                                      for x, t in pts]))) for h in hs]
        min_order = min(min_order, np.log2(res[0] / res[1]),
                        np.log2(res[1] / res[2]))
        ts = np.linspace(0.0, 5.0, 50)
        av = np.asarray(case_a.eval(ts))
        worst_dirichlet = max(worst_dirichlet,
                              float(np.max(np.abs(fld.u(av, ts)))))
    ok = min_order >= 1.9 and worst_dirichlet <= 1e-10
    assert report("04 solver exactness",
                  ok, f"order {min_order:.3f}, trace {worst_dirichlet:.2e}")


# 5 -------------------------------------------------------------------------


def test_criterion_05_strip_conservation(conj_a):
    L = 0.5 * conj_a.rho
    data = InitialData.fourier(L, phi_coeffs=[(1, 1.0), (3, -0.3)],
                               psi_coeffs=[(2, 0.5)])
    sf = StripField(data, L)
    taus = np.linspace(0.0, 20.0 * conj_a.rho, 41)
    es = np.asarray([energy_V(sf, float(t), n_nodes=4096) for t in taus])
    drift = float(np.max(np.abs(es - es[0])) / es[0])
    ok = drift <= 1e-8
    assert report("05 strip energy conservation", ok, f"drift {drift:.2e}")


# 6 -------------------------------------------------------------------------


def test_criterion_06_energy_sandwich(case_a, conj_a, map_a,
                                      case_b, conj_b, map_b):
    rng = np.random.default_rng(5)
    violations = 0
    checked = 0
    for boundary, conj, cmap in ((case_a, conj_a, map_a),
                                 (case_b, conj_b, map_b)):
        C1, C2 = equivalence_constants(conj)
        a0 = float(boundary.eval(0.0))
        for _ in range(50):
            c = rng.standard_normal(2)
            d = rng.standard_normal(2)
            data = InitialData.fourier(a0, [(k + 1, c[k]) for k in range(2)],
                                       [(k + 1, d[k]) for k in range(2)])
            fld = CharacteristicField(data, boundary, cmap=cmap)
            for t in np.linspace(0.0, 4.0, 20):
                eu = energy_u(fld, float(t), n_nodes=1024)
                ev = strip_energy_of_moving(fld, conj, float(t), n_nodes=1024)
                checked += 1
                if not (C1 * ev <= eu * (1 + 1e-9)
                        and eu <= C2 * ev * (1 + 1e-9)):
                    violations += 1
    ok = violations == 0
    assert report("06 two-coordinate energy sandwich",
                  ok, f"{violations}/{checked} violations")


# 7 -------------------------------------------------------------------------


def _damped_strip(conj, boundary, cmap):
    from mstring.transform import boundary_tau
    L = 0.5 * conj.rho
    data = InitialData.fourier(L, phi_coeffs=[(1, 1.0)],
                               psi_coeffs=[(1, -0.4)])
    b_of_tau, b_kinks = transformed_damping(conj, boundary, cmap)
    tau0 = float(boundary_tau(conj, boundary, 0.0))
    shifted = lambda tau: b_of_tau(np.asarray(tau, dtype=float) + tau0)
    kinks = lambda lo, hi: np.asarray(b_kinks(lo + tau0, hi + tau0)) - tau0
    return StripField(data, L, rule="damped", b_of_tau=shifted,
                      b_kinks=kinks)


def test_criterion_07_dissipation_and_decay(case_b, conj_b, map_b):
    sf = _damped_strip(conj_b, case_b, map_b)
    rho = conj_b.rho
    resid = dissipation_identity_check(sf, T=5.0 * rho)
    taus = np.linspace(0.0, 20.0 * rho, 60)
    es = [energy_V(sf, float(t), n_nodes=2048) for t in taus]
    _, omega, r2 = decay_fit(taus, es, tau_min=2.0 * rho)
    ok = resid <= 1e-6 and omega > 0 and r2 >= 0.99
    assert report("07 dissipation identity + decay fit",
                  ok, f"residual {resid:.2e}, omega {omega:.3f}, R^2 {r2:.4f}")


# 8 -------------------------------------------------------------------------


def test_criterion_08_lyapunov_sandwich(case_b, conj_b, map_b):
    sf = _damped_strip(conj_b, case_b, map_b)
    rho = conj_b.rho
    violations = 0
    for frac in (0.1, 0.5, 0.9):
        delta = frac / rho
        for tau in np.linspace(0.0, 8.0 * rho, 9):
            ev = energy_V(sf, float(tau))
            e1 = lyapunov_E1(sf, float(tau), delta)
            if not ((1 - delta * rho) * ev <= e1 * (1 + 1e-10)
                    and e1 <= (1 + delta * rho) * ev * (1 + 1e-10)):
                violations += 1
    ok = violations == 0
    assert report("08 Lyapunov sandwich", ok, f"{violations} violations")


# 9 -------------------------------------------------------------------------


def test_criterion_09_observability(case_a, conj_a, case_b):
    zero = InitialData.zero(float(case_a.eval(0.0)))
    plan = synthesize_moving_control(zero, case_a, conj_a, n_modes=4)
    T = plan.t_rest
    r1 = observability_constant("dirichlet", case_a, T, n_samples=200,
                                n_modes=10, seed=1, n_nodes=512)
    r2 = observability_constant("dirichlet", case_a, T, n_samples=400,
                                n_modes=10, seed=1, n_nodes=512)
    m1, m2 = r1.ensemble_min_ratio, r2.ensemble_min_ratio
    stable = abs(m1 - m2) / m1 <= 0.2
    bump = InitialData.bump(float(case_a.eval(0.0)), center=0.06, width=0.05)
    short = observation_integral(CharacteristicField(bump, case_a), T=0.05)
    rm = observability_constant("mixed", case_b, T, n_samples=100,
                                n_modes=8, seed=2, n_nodes=512)
    ok = (m1 > 0 and stable and short.ratio <= 1e-12
          and rm.ensemble_min_ratio > 0)
    assert report("09 observability positivity",
                  ok, f"min {m1:.3f} (doubled {m2:.3f}), "
                      f"short-window {short.ratio:.1e}, "
                      f"mixed min {rm.ensemble_min_ratio:.3f}")


# 10 ------------------------------------------------------------------------


def test_criterion_10_exact_control(case_a, conj_a):
    t0 = time.perf_counter()
    data = strip_mode_data(conj_a, case_a, k=1)
    ratios = []
    for n in (8, 16, 32, 64):
        plan = synthesize_moving_control(data, case_a, conj_a,
                                         n_modes=n, margin=0.1)
        ratios.append(verify_control(plan, data, case_a))
    monotone = all(b < a for a, b in zip(ratios, ratios[1:]))
    # mutilated control: drop the second half of the signal
    plan = synthesize_moving_control(data, case_a, conj_a,
                                     n_modes=16, margin=0.1)
    cut = 0.5 * (plan.t_rest)

    def broken(t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= cut, np.asarray(plan.f(t), dtype=float), 0.0)

    broken_plan = ControlPlan(
        strip=plan.strip, f=broken, tau_start=plan.tau_start,
        horizon=plan.horizon, t_rest=plan.t_rest, modal_dim=plan.modal_dim,
        gramian_condition_number=plan.gramian_condition_number,
        closed_form_time=plan.closed_form_time)
    mutilated = verify_control(broken_plan, data, case_a)
    elapsed = time.perf_counter() - t0
    ok = (ratios[2] <= 1e-4 and monotone and mutilated >= 1e-2
          and elapsed < 60.0)
    assert report("10 exact controllability",
                  ok, f"ratios {['%.2e' % r for r in ratios]}, "
                      f"mutilated {mutilated:.2e}, {elapsed:.1f} s")


# 11 ------------------------------------------------------------------------


def test_criterion_11_quasi_periodic(map_a):
    n_max, window = 10_000, 100
    hi, lo = rotation_bounds_qp(map_a, n_max=n_max, window=window)
    periodic_ok = (hi - lo) <= 2.0 / (n_max - window)

    base, a1, a2 = 0.5, 0.05, 0.03
    qb = QuasiPeriodicBoundary(
        lambda t1, t2: base + a1 * np.sin(t1) + a2 * np.sin(t2),
        (1.0, np.sqrt(2.0)))
    qm = build_map(qb)
    gaps = []
    for n in (1000, 10_000):
        h, l = rotation_bounds_qp(qm, n_max=n, window=100)
        gaps.append(h - l)
    shrinks = gaps[1] < gaps[0]
    ok = periodic_ok and shrinks
    assert report("11 quasi-periodic rotation bounds",
                  ok, f"periodic gap {hi - lo:.2e}, "
                      f"two-frequency gaps {gaps[0]:.2e} -> {gaps[1]:.2e}")


# 12 ------------------------------------------------------------------------


def test_criterion_12_radial_round_trip(case_a):
    a0 = float(case_a.eval(0.0))
    w = np.pi / a0

    def phi3(r):
        r = np.asarray(r, dtype=float)
        rs = np.where(r < 1e-12, 1.0, r)
        return np.where(r < 1e-12, w, np.sin(w * rs) / rs)

    def dphi3(r):
        r = np.asarray(r, dtype=float)
        rs = np.where(r < 1e-12, 1.0, r)
        out = (w * np.cos(w * rs) * rs - np.sin(w * rs)) / rs ** 2
        return np.where(r < 1e-12, 0.0, out)

    z = lambda r: np.zeros_like(np.asarray(r, dtype=float))
    data = radial_reduce(phi3, dphi3, z, a0)
    fld = CharacteristicField(data, case_a)
    u3 = radial_lift(fld)
    r = np.linspace(1e-3, a0 * 0.999, 80)
    err = float(np.max(np.abs(u3(r, np.zeros_like(r)) - phi3(r))))
    ok = err <= 1e-10
    assert report("12 radial reduction round trip", ok, f"error {err:.2e}")


# 13 ------------------------------------------------------------------------


def test_criterion_13_determinism(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "boundary.kind = twoslope\n"
        "boundary.alpha = 0.3333333333333333\n"
        "boundary.beta = -0.2\n"
        "horizon = 1.5\n"
        "ensemble.seed = 11\n"
        "ensemble.n_samples = 8\n"
        "ensemble.n_modes = 3\n"
        "quad.nodes = 256\n", encoding="utf-8")
    outs = []
    for name in ("o1", "o2"):
        out = tmp_path / name
        code = cli_main(["observe", "--config", str(cfg), "--out", str(out)])
        assert code == 0
        outs.append(out)
    same = all((outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
               for f in ("ratios.csv", "observe_summary.csv"))
    assert report("13 byte-identical reruns", same)
