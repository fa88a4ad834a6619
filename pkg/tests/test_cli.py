import numpy as np
import pytest

from mstring.cli import main, parse_config
from mstring.errors import ConfigError

CASE_A = """\
boundary.kind = twoslope
boundary.alpha = 0.3333333333333333
boundary.beta = -0.2
"""


def write_cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def run(tmp_path, command, text, out="out"):
    cfg = write_cfg(tmp_path, text)
    out_dir = tmp_path / out
    code = main([command, "--config", cfg, "--out", str(out_dir)])
    return code, out_dir


# -- config parsing ------------------------------------------------------------


def test_parse_config_comments_and_hash(tmp_path):
    p = tmp_path / "a.cfg"
    p.write_text("x = 1  # trailing\n# full line\n\ny = two words\n")
    cfg = parse_config(p)
    assert cfg["x"] == "1"
    assert cfg["y"] == "two words"
    assert len(cfg["__hash__"]) == 12


def test_parse_config_rejects_bad_line(tmp_path):
    p = tmp_path / "a.cfg"
    p.write_text("just a bare line\n")
    with pytest.raises(ConfigError):
        parse_config(p)


def test_missing_config_file_exit_code(tmp_path):
    code = main(["rotation", "--config", str(tmp_path / "nope.cfg"),
                 "--out", str(tmp_path)])
    assert code == 2


def test_bad_value_exit_code(tmp_path):
    code, _ = run(tmp_path, "rotation",
                  "boundary.kind = twoslope\nboundary.alpha = z\n"
                  "boundary.beta = -0.2\n")
    assert code == 2


def test_precondition_exit_code(tmp_path):
    # |slopes| >= 1 is rejected before any work happens
    code, _ = run(tmp_path, "rotation",
                  "boundary.kind = twoslope\nboundary.alpha = 1.5\n"
                  "boundary.beta = -0.2\n")
    assert code == 3


def test_degenerate_slopes_exit_code(tmp_path):
    code, _ = run(tmp_path, "rotation",
                  "boundary.kind = twoslope\nboundary.alpha = 0.2\n"
                  "boundary.beta = 0.2\n")
    assert code == 3


def test_verification_exit_code(tmp_path):
    # an unreachable control threshold turns success into exit code 4
    code, _ = run(tmp_path, "control",
                  CASE_A + "control.n_modes = 8\ncontrol.threshold = 1e-12\n")
    assert code == 4


# -- output format ---------------------------------------------------------------


def read_lines(path):
    return path.read_bytes().decode("utf-8").split("\n")


def test_rotation_outputs(tmp_path):
    code, out = run(tmp_path, "rotation", CASE_A)
    assert code == 0
    lines = read_lines(out / "rotation.csv")
    assert lines[0] == "n,estimate,error_bound"
    assert lines[1].startswith("# mstring ")
    assert lines[-1] == ""  # trailing newline
    assert (out / "rotation.png").exists()
    assert not list(out.glob("*.tmp"))


def test_observe_requires_seed(tmp_path):
    code, _ = run(tmp_path, "observe", CASE_A + "horizon = 2.0\n")
    assert code == 2


def test_observe_deterministic_bytes(tmp_path):
    text = (CASE_A + "horizon = 1.5\nensemble.seed = 11\n"
            "ensemble.n_samples = 6\nensemble.n_modes = 3\n"
            "quad.nodes = 256\n")
    _, out1 = run(tmp_path, "observe", text, out="o1")
    _, out2 = run(tmp_path, "observe", text, out="o2")
    for name in ("ratios.csv", "observe_summary.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_simulate_outputs(tmp_path):
    code, out = run(tmp_path, "simulate",
                    CASE_A + "sim.t_max = 1.0\nsim.nt = 10\nsim.nx = 20\n"
                             "quad.nodes = 256\ndata.phi_modes = 1:1.0\n")
    assert code == 0
    lines = read_lines(out / "field.csv")
    assert lines[0] == "t,x,u"
    assert (out / "energy.csv").exists()
    assert (out / "simulate.png").exists()


def test_quasi_outputs(tmp_path):
    code, out = run(tmp_path, "quasi",
                    "boundary.kind = quasi\nboundary.base = 0.5\n"
                    "boundary.amp1 = 0.05\nboundary.freq1 = 1.0\n"
                    "boundary.amp2 = 0.03\nboundary.freq2 = 1.4142135623730951\n"
                    "quasi.n_max = 2000\nquasi.window = 50\n")
    assert code == 0
    lines = read_lines(out / "quasi.csv")
    assert lines[0] == "n,estimate,running_max,running_min"
    assert (out / "quasi.png").exists()


def test_decay_outputs(tmp_path):
    code, out = run(tmp_path, "decay",
                    "boundary.kind = twoslope\nboundary.alpha = -0.2\n"
                    "boundary.beta = 0.3333333333333333\n"
                    "decay.tau_max = 5.0\ndecay.n_points = 20\n"
                    "quad.nodes = 512\n")
    assert code == 0
    assert read_lines(out / "decay.csv")[0] == "tau,E_V,E1"
    fit = read_lines(out / "decay_fit.csv")
    assert fit[0] == "C,omega,r_squared"
    omega = float(fit[2].split(",")[1])
    assert omega > 0
    assert (out / "decay.png").exists()


def test_float_cells_round_trip(tmp_path):
    code, out = run(tmp_path, "rotation", CASE_A)
    assert code == 0
    for line in read_lines(out / "rotation.csv")[2:-1]:
        for cell in line.split(",")[1:]:
            assert float(cell) == float(repr(float(cell)))
