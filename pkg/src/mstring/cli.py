"""Command-line front end.

Usage: mstring <rotation|simulate|observe|decay|control|quasi>
               --config <path> [--out <dir>]

Configs are flat ``key = value`` text files with ``#`` comments; the key
list is documented in the README.  Every CSV starts with a header row and a
comment line recording the config hash and tool version; numeric cells use
the shortest round-trip decimal representation, so identical config + seed
reruns are byte-identical.  Files are written atomically (temp + rename).

Exit codes: 0 success, 2 config error, 3 precondition violation,
4 invariant or verification failure.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import __version__  # noqa: E402
from .boundary import (ConstantBoundary, QuasiPeriodicBoundary,  # noqa: E402
                       TwoSlopeBoundary)
from .circle_map import (build_map, estimate_trajectory,  # noqa: E402
                         rotation_bounds_qp, rotation_closed_form,
                         rotation_estimate)
from .conjugacy import (build_conjugacy, conjugation_residual,  # noqa: E402
                        derivative_bounds)
from .control import (strip_mode_data, synthesize_moving_control,  # noqa: E402
                      verify_control)
from .energy import (decay_fit, energy_u, energy_V, lyapunov_E1,  # noqa: E402
                     observability_constant)
from .errors import (BeforeInitialTime, ConfigError,  # noqa: E402
                     ConjugacyResidualTooLarge, DegenerateSlopes,
                     DeltaOutOfRange, HorizonTooShort, IllConditionedGramian,
                     IncompatibleData, MstringError, OutOfDomain, OutOfStrip,
                     SlopeTooLarge, UnsupportedKind, WrongSlopeOrder,
                     BoundsUnavailable)
from .solver import (CharacteristicField, InitialData, StripField,  # noqa: E402
                     transformed_damping)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3
EXIT_VERIFICATION = 4

_PRECONDITION_ERRORS = (SlopeTooLarge, DegenerateSlopes, WrongSlopeOrder,
                        HorizonTooShort, DeltaOutOfRange, OutOfDomain,
                        OutOfStrip, BeforeInitialTime, IncompatibleData,
                        UnsupportedKind, BoundsUnavailable)
_VERIFICATION_ERRORS = (ConjugacyResidualTooLarge, IllConditionedGramian)


class VerificationFailure(MstringError):
    """Raised by commands whose numeric check misses its threshold."""


# ---------------------------------------------------------------------------
# config

def parse_config(path: str | Path) -> dict:
    """Flat key = value file; '#' starts a comment; values stay strings."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {p}: {e}") from e
    out = {"__hash__": hashlib.sha256(text.encode()).hexdigest()[:12]}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{p}:{lineno}: expected key = value")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def cfg_float(cfg: dict, key: str, default=None) -> float:
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing config key {key!r}")
        return float(default)
    try:
        v = float(cfg[key])
    except ValueError as e:
        raise ConfigError(f"config key {key!r}: {e}") from e
    if not np.isfinite(v):
        raise ConfigError(f"config key {key!r} must be finite")
    return v


def cfg_int(cfg: dict, key: str, default=None) -> int:
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing config key {key!r}")
        return int(default)
    try:
        return int(cfg[key])
    except ValueError as e:
        raise ConfigError(f"config key {key!r}: {e}") from e


def cfg_str(cfg: dict, key: str, default=None) -> str:
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing config key {key!r}")
        return str(default)
    return cfg[key]


def cfg_modes(cfg: dict, key: str) -> list[tuple[int, float]]:
    """Parse '1:1.0, 3:-0.2' into [(1, 1.0), (3, -0.2)]."""
    raw = cfg.get(key, "")
    out = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            k, c = part.split(":")
            out.append((int(k), float(c)))
        except ValueError as e:
            raise ConfigError(f"config key {key!r}: bad mode {part!r}") from e
    return out


def build_boundary(cfg: dict):
    kind = cfg_str(cfg, "boundary.kind", "twoslope")
    if kind == "twoslope":
        return TwoSlopeBoundary(cfg_float(cfg, "boundary.alpha"),
                                cfg_float(cfg, "boundary.beta"))
    if kind == "constant":
        return ConstantBoundary(cfg_float(cfg, "boundary.a0"))
    if kind == "quasi":
        base = cfg_float(cfg, "boundary.base")
        amp1 = cfg_float(cfg, "boundary.amp1")
        w1 = cfg_float(cfg, "boundary.freq1")
        amp2 = cfg_float(cfg, "boundary.amp2", 0.0)
        w2 = cfg_float(cfg, "boundary.freq2", 1.0)

        def hat(t1, t2):
            return base + amp1 * np.sin(t1) + amp2 * np.sin(t2)

        return QuasiPeriodicBoundary(hat, (w1, w2))
    raise ConfigError(f"unknown boundary.kind {kind!r}")


def build_data(cfg: dict, a0: float, conjugacy=None) -> InitialData:
    kind = cfg_str(cfg, "data.kind", "modes")
    flavor = cfg_str(cfg, "data.flavor", "dirichlet")
    if kind == "modes":
        phi = cfg_modes(cfg, "data.phi_modes") or [(1, 1.0)]
        psi = cfg_modes(cfg, "data.psi_modes")
        return InitialData.fourier(a0=a0, phi_coeffs=phi, psi_coeffs=psi,
                                   flavor=flavor)
    if kind == "bump":
        center = cfg_float(cfg, "data.center", 0.5) * a0
        width = cfg_float(cfg, "data.width", 0.15) * a0
        return InitialData.bump(a0=a0, center=center, width=width)
    if kind == "strip_mode":
        if conjugacy is None:
            raise ConfigError("data.kind=strip_mode needs a two-slope boundary")
        raise ConfigError("strip_mode data is built by the control command")
    raise ConfigError(f"unknown data.kind {kind!r}")


# ---------------------------------------------------------------------------
# output

def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(out_dir: Path, name: str, header: list[str], rows,
              cfg_hash: str) -> Path:
    path = out_dir / name
    lines = [",".join(header),
             f"# mstring {__version__} config {cfg_hash}"]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    payload = "\n".join(lines) + "\n"
    fd, tmp = tempfile.mkstemp(dir=out_dir, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def save_figure(fig, out_dir: Path, name: str) -> Path:
    path = out_dir / name
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


# ---------------------------------------------------------------------------
# commands

def cmd_rotation(cfg: dict, out_dir: Path) -> int:
    boundary = build_boundary(cfg)
    cmap = build_map(boundary)
    rows = []
    for n in (100, 1000, 10_000):
        est, bound = rotation_estimate(cmap, n=n)
        rows.append((n, est, bound))
    closed = None
    if hasattr(cmap, "l1"):
        closed = rotation_closed_form(cmap.l1, cmap.l2)
        print(f"l1 = {cmap.l1!r}  l2 = {cmap.l2!r}")
        print(f"rho closed form = {closed!r}")
    elif hasattr(cmap, "shift"):
        closed = cmap.shift
        print(f"rho (translation) = {closed!r}")
    for n, est, bound in rows:
        print(f"estimate n={n}: {est!r}  (error bound {bound!r})")
    c = build_conjugacy(cmap)
    resid = conjugation_residual(c, cmap)
    lam1, lam2 = derivative_bounds(c)
    print(f"conjugacy residual = {resid!r}")
    print(f"lambda1 = {lam1!r}  lambda2 = {lam2!r}")
    write_csv(out_dir, "rotation.csv",
              ["n", "estimate", "error_bound"], rows, cfg["__hash__"])
    fig, ax = plt.subplots()
    ns = [r[0] for r in rows]
    if closed is not None:
        ax.loglog(ns, [abs(r[1] - closed) for r in rows], "o-",
                  label="|estimate - closed form|")
    ax.loglog(ns, [r[2] for r in rows], "--", label="1/n bound")
    ax.set_xlabel("n")
    ax.set_ylabel("error")
    ax.legend()
    save_figure(fig, out_dir, "rotation.png")
    if resid > 1e-10:
        raise VerificationFailure(f"conjugacy residual {resid:.3e} > 1e-10")
    return EXIT_OK


def cmd_simulate(cfg: dict, out_dir: Path) -> int:
    boundary = build_boundary(cfg)
    a0 = float(boundary.eval(0.0))
    data = build_data(cfg, a0)
    rule = cfg_str(cfg, "sim.rule", "dirichlet")
    field = CharacteristicField(data, boundary, rule=rule)
    t_max = cfg_float(cfg, "sim.t_max", 5.0)
    nt = cfg_int(cfg, "sim.nt", 200)
    nx = cfg_int(cfg, "sim.nx", 100)
    ts = np.linspace(0.0, t_max, nt)
    rows = []
    grid = np.zeros((nt, nx))
    for i, t in enumerate(ts):
        a = float(boundary.eval(t))
        xs = np.linspace(0.0, a, nx)
        us = field.u(xs, np.full_like(xs, t))
        grid[i] = us
        rows.extend((float(t), float(x), float(u)) for x, u in zip(xs, us))
    write_csv(out_dir, "field.csv", ["t", "x", "u"], rows, cfg["__hash__"])
    n_nodes = cfg_int(cfg, "quad.nodes", 2048)
    energies = [(float(t), energy_u(field, float(t), n_nodes)) for t in ts]
    write_csv(out_dir, "energy.csv", ["t", "E_u"], energies, cfg["__hash__"])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.imshow(grid.T, origin="lower", aspect="auto",
               extent=(0.0, t_max, 0.0, 1.0))
    ax1.set_xlabel("t")
    ax1.set_ylabel("x / a(t)")
    ax2.plot(ts, [e for _, e in energies])
    ax2.set_xlabel("t")
    ax2.set_ylabel("E_u")
    save_figure(fig, out_dir, "simulate.png")
    print(f"simulated {nt} x {nx} grid up to t = {t_max!r}; "
          f"E_u(0) = {energies[0][1]!r}, E_u(T) = {energies[-1][1]!r}")
    return EXIT_OK


def cmd_observe(cfg: dict, out_dir: Path) -> int:
    boundary = build_boundary(cfg)
    case = cfg_str(cfg, "data.flavor", "dirichlet")
    if "ensemble.seed" not in cfg:
        raise ConfigError("ensemble.seed is mandatory for observe runs")
    T = cfg_float(cfg, "horizon")
    rep = observability_constant(
        case, boundary, T,
        n_samples=cfg_int(cfg, "ensemble.n_samples", 100),
        n_modes=cfg_int(cfg, "ensemble.n_modes", 10),
        seed=cfg_int(cfg, "ensemble.seed"),
        n_nodes=cfg_int(cfg, "quad.nodes", 1024))
    ratios = rep.extras["ratios"]
    rows = [(i, float(r)) for i, r in enumerate(ratios)]
    write_csv(out_dir, "ratios.csv", ["sample", "ratio"], rows,
              cfg["__hash__"])
    write_csv(out_dir, "observe_summary.csv",
              ["T", "case", "ensemble_size", "min_ratio", "median_ratio"],
              [(rep.T, rep.boundary_case, rep.ensemble_size,
                rep.ensemble_min_ratio, rep.ensemble_median_ratio)],
              cfg["__hash__"])
    fig, ax = plt.subplots()
    ax.hist(np.log10(np.maximum(ratios, 1e-300)), bins=30)
    ax.set_xlabel("log10 observation ratio")
    ax.set_ylabel("count")
    save_figure(fig, out_dir, "observe.png")
    print(f"T = {rep.T!r}  min ratio = {rep.ensemble_min_ratio!r}  "
          f"median = {rep.ensemble_median_ratio!r}  "
          f"({rep.ensemble_size} samples)")
    if not rep.ensemble_min_ratio > 0:
        raise VerificationFailure("ensemble minimum ratio is not positive")
    return EXIT_OK


def cmd_decay(cfg: dict, out_dir: Path) -> int:
    boundary = build_boundary(cfg)
    cmap = build_map(boundary)
    c = build_conjugacy(cmap)
    rho = c.rho
    L = 0.5 * rho
    b_of_tau, b_kinks = transformed_damping(c, boundary, cmap)
    phi = cfg_modes(cfg, "data.phi_modes") or [(1, 1.0)]
    psi = cfg_modes(cfg, "data.psi_modes")
    data = InitialData.fourier(a0=L, phi_coeffs=phi, psi_coeffs=psi)
    sf = StripField(data, L, rule="damped", b_of_tau=b_of_tau,
                    b_kinks=b_kinks)
    tau_max = cfg_float(cfg, "decay.tau_max", 20.0 * rho)
    n_pts = cfg_int(cfg, "decay.n_points", 80)
    delta = cfg_float(cfg, "decay.delta", 0.5 / rho)
    n_nodes = cfg_int(cfg, "quad.nodes", 2048)
    taus = np.linspace(0.0, tau_max, n_pts)
    rows = [(float(tau), energy_V(sf, float(tau), n_nodes),
             lyapunov_E1(sf, float(tau), delta, n_nodes)) for tau in taus]
    write_csv(out_dir, "decay.csv", ["tau", "E_V", "E1"], rows,
              cfg["__hash__"])
    tau_min = cfg_float(cfg, "decay.tau_min", 2.0 * rho)
    C, omega, r2 = decay_fit(taus, [r[1] for r in rows], tau_min)
    write_csv(out_dir, "decay_fit.csv", ["C", "omega", "r_squared"],
              [(C, omega, r2)], cfg["__hash__"])
    fig, ax = plt.subplots()
    ax.semilogy(taus, [r[1] for r in rows], label="E_V")
    ax.semilogy(taus, [r[2] for r in rows], "--", label="E1")
    ax.set_xlabel("tau")
    ax.legend()
    save_figure(fig, out_dir, "decay.png")
    print(f"fit E_V ~ C exp(-omega tau): C = {C!r}  omega = {omega!r}  "
          f"R^2 = {r2!r}")
    if not (omega > 0):
        raise VerificationFailure(f"fitted decay rate omega = {omega!r} <= 0")
    return EXIT_OK


def cmd_control(cfg: dict, out_dir: Path) -> int:
    boundary = build_boundary(cfg)
    cmap = build_map(boundary)
    c = build_conjugacy(cmap)
    a0 = float(boundary.eval(0.0))
    kind = cfg_str(cfg, "data.kind", "strip_mode")
    if kind == "strip_mode":
        data = strip_mode_data(c, boundary, k=cfg_int(cfg, "data.mode", 1),
                               amplitude=cfg_float(cfg, "data.amplitude", 1.0))
    else:
        data = build_data(cfg, a0)
    n_modes = cfg_int(cfg, "control.n_modes", 32)
    margin = cfg_float(cfg, "control.margin", 0.1)
    plan = synthesize_moving_control(
        data, boundary, c, n_modes=n_modes, margin=margin,
        n_nodes=cfg_int(cfg, "quad.nodes", 4096), cmap=cmap)
    ratio = verify_control(plan, data, boundary)
    ts = np.linspace(0.0, plan.t_rest, cfg_int(cfg, "control.n_signal", 800))
    sig = plan.f(ts)
    rows = list(zip((float(t) for t in ts), (float(s) for s in sig)))
    write_csv(out_dir, "control_signal.csv", ["t", "f"], rows,
              cfg["__hash__"])
    write_csv(out_dir, "control_summary.csv",
              ["n_modes", "margin", "tau_start", "t_rest",
               "closed_form_time", "gramian_condition", "energy_ratio"],
              [(plan.modal_dim, margin, plan.tau_start, plan.t_rest,
                plan.closed_form_time, plan.gramian_condition_number, ratio)],
              cfg["__hash__"])
    fig, ax = plt.subplots()
    ax.plot(ts, sig)
    ax.set_xlabel("t")
    ax.set_ylabel("boundary control f(t)")
    save_figure(fig, out_dir, "control.png")
    print(f"N = {plan.modal_dim}  t_rest = {plan.t_rest!r}  "
          f"closed-form T = {plan.closed_form_time!r}")
    print(f"verification energy ratio = {ratio!r}")
    threshold = cfg_float(cfg, "control.threshold", 1e-4)
    if not ratio <= threshold:
        raise VerificationFailure(
            f"energy ratio {ratio!r} exceeds threshold {threshold!r}")
    return EXIT_OK


def cmd_quasi(cfg: dict, out_dir: Path) -> int:
    boundary = build_boundary(cfg)
    cmap = build_map(boundary)
    n_max = cfg_int(cfg, "quasi.n_max", 10_000)
    window = cfg_int(cfg, "quasi.window", 100)
    stride = cfg_int(cfg, "quasi.stride", max(1, n_max // 500))
    rows = estimate_trajectory(cmap, n_max=n_max, window=window,
                               stride=stride)
    write_csv(out_dir, "quasi.csv",
              ["n", "estimate", "running_max", "running_min"], rows,
              cfg["__hash__"])
    hi, lo = rotation_bounds_qp(cmap, n_max=n_max, window=window)
    print(f"upper rotation estimate = {hi!r}")
    print(f"lower rotation estimate = {lo!r}")
    print(f"gap = {hi - lo!r}")
    fig, ax = plt.subplots()
    ns = [r[0] for r in rows]
    ax.plot(ns, [r[1] for r in rows], label="estimate")
    ax.plot(ns, [r[2] for r in rows], "--", label="running max")
    ax.plot(ns, [r[3] for r in rows], "--", label="running min")
    ax.set_xlabel("n")
    ax.legend()
    save_figure(fig, out_dir, "quasi.png")
    return EXIT_OK


COMMANDS = {
    "rotation": cmd_rotation,
    "simulate": cmd_simulate,
    "observe": cmd_observe,
    "decay": cmd_decay,
    "control": cmd_control,
    "quasi": cmd_quasi,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="mstring", description=__doc__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default=".")
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out_dir)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except _PRECONDITION_ERRORS as e:
        print(f"precondition violated: {type(e).__name__}: {e}",
              file=sys.stderr)
        return EXIT_PRECONDITION
    except (VerificationFailure, *_VERIFICATION_ERRORS) as e:
        print(f"verification failed: {type(e).__name__}: {e}",
              file=sys.stderr)
        return EXIT_VERIFICATION


if __name__ == "__main__":
    sys.exit(main())
