import csv
import io
import math

import numpy as np
import pytest

from multiphase import cli, harness
from multiphase.errors import ConfigError
from multiphase.families import Family, FamilySpec, crossover_nu


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def invoke(tmp_path, command, text, *extra):
    """Run the CLI; returns (exit code, parsed rows, raw csv text)."""
    out = tmp_path / "out.csv"
    code = cli.main([command, "--config", write(tmp_path, text), "--out", str(out), *extra])
    raw = out.read_text() if out.exists() else ""
    body = "\n".join(line for line in raw.splitlines() if not line.startswith("#"))
    return code, list(csv.DictReader(io.StringIO(body))), raw


GNS_D4 = """
[family]
family = gns
d = 4
gamma = auto
n_photons = 1
"""


def test_bound_gns_auto(tmp_path):
    code, rows, _ = invoke(tmp_path, "bound", GNS_D4)
    assert code == 0
    assert float(rows[0]["bound_analytic"]) == 2.25
    assert rows[0]["route"] == "closed-form"
    assert rows[0]["bound_oracle"] == ""


def test_bound_noon_pair(tmp_path):
    code, rows, _ = invoke(tmp_path, "bound", "[family]\nfamily = noon_pair\nn_photons = 2\n")
    assert code == 0
    assert float(rows[0]["bound_analytic"]) == 0.25


def test_missing_parameter_names_field(tmp_path, capsys):
    code, _, _ = invoke(tmp_path, "bound", "[family]\nfamily = ucs\nd = 2\nalpha = 1\n")
    assert code == harness.EXIT_CONFIG
    assert "nu" in capsys.readouterr().err


@pytest.mark.parametrize(
    "text, field",
    [
        ("[family]\nfamily = ucs\nd = 2\nalpha = 1\nnu = 1\nn_photons = 3\n", "n_photons"),
        ("[family]\nfamily = wombat\n", "family"),
        ("[family]\nfamily = gns\nd = 2.5\ngamma = 1\nn_photons = 1\n", "d"),
        ("[family]\nfamily = gecs\nalpha = 1\n[sweep]\nparameter = nu\nvalues = 1, 2\n", "parameter"),
        ("[family]\nfamily = gecs\nalpha = 1\n[sweep]\nparameter = alpha\nfrom = 2\nto = 1\nsteps = 3\n", "from"),
        ("[family]\nfamily = gecs\nalpha = 1\n[sweep]\nparameter = alpha\nfrom = 1\nto = 2\nsteps = 0\n", "steps"),
    ],
)
def test_config_errors_carry_field(text, field):
    command = "sweep" if "[sweep]" in text else "bound"
    with pytest.raises(ConfigError) as info:
        harness.parse_config(text, command)
    assert info.value.field == field


def test_missing_config_file(tmp_path):
    assert cli.main(["bound", "--config", str(tmp_path / "absent.ini")]) == harness.EXIT_CONFIG


def test_positional_config_and_stdout(tmp_path, capsys):
    assert cli.main(["bound", write(tmp_path, GNS_D4)]) == 0
    assert "2.25" in capsys.readouterr().out


def test_validate_gns_exact(tmp_path):
    text = "[run]\ntol = 1e-9\n[family]\nfamily = gns\nd = 2\ngamma = 1\nn_photons = 1\n"
    code, rows, _ = invoke(tmp_path, "validate", text)
    assert code == 0
    row = rows[0]
    assert float(row["discrepancy"]) < 1e-9
    assert float(row["bound_oracle"]) == pytest.approx(1.5, abs=1e-12)
    assert row["status"] == "ok"
    assert row["route"] == "matrix-inverse"


def test_validate_ucs_truncated(tmp_path):
    text = "[run]\ntol = 1e-6\n[family]\nfamily = ucs\nd = 2\nalpha = 2\nnu = 1\n"
    code, rows, _ = invoke(tmp_path, "validate", text)
    assert code == 0
    assert float(rows[0]["discrepancy"]) < 1e-6
    assert float(rows[0]["epsilon"]) == 1e-12


def test_validate_resource_error(tmp_path):
    code, rows, _ = invoke(tmp_path, "validate", "[family]\nfamily = ucs\nd = 2\nalpha = 50\nnu = 1\n")
    assert code == harness.EXIT_RESOURCE
    assert rows[0]["status"] == "resource_error"


def test_validate_bright_single_pair_passes_fd_check():
    row = harness.run_validate(FamilySpec(Family.UCS, d=1, alpha=50, nu=1))
    assert row.status == "ok"


def test_validate_tolerance_failure(tmp_path):
    # a loose cutoff leaves a truncation error far above the requested tolerance
    text = "[run]\ntol = 1e-14\nepsilon = 1e-4\n[family]\nfamily = gecs\nd = 1\nalpha = 2\n"
    code, rows, _ = invoke(tmp_path, "validate", text)
    assert code == harness.EXIT_TOLERANCE
    assert rows[0]["status"] == "tolerance_failure"


def test_validate_noon_pair_uses_difference_block():
    row = harness.run_validate(FamilySpec(Family.NOON_PAIR, d=2, n_photons=3))
    assert row.ok
    assert row.bound_oracle == pytest.approx(1 / 9, rel=1e-12)


def test_nu_sweep_at_fixed_mean_is_decreasing(tmp_path):
    text = """
[family]
family = ucs
d = 2
nu = 0
[sweep]
parameter = nu
from = 0
to = 8
steps = 33
match_n_total = 16
"""
    code, rows, _ = invoke(tmp_path, "sweep", text)
    assert code == 0
    assert len(rows) == 33
    assert [int(r["point"]) for r in rows] == list(range(33))
    bounds = np.array([float(r["bound_analytic"]) for r in rows])
    assert np.all(np.diff(bounds) < 0)
    assert all(float(r["n_total"]) == pytest.approx(16, rel=1e-9) for r in rows)
    assert all(r["target_n_total"] == "16.0" for r in rows)


def test_d_sweep_gns(tmp_path):
    text = "[family]\nfamily = gns\ngamma = auto\nn_photons = 1\n[sweep]\nparameter = d\nvalues = 1, 2, 4, 8\n"
    code, rows, _ = invoke(tmp_path, "sweep", text)
    assert code == 0
    got = [float(r["bound_analytic"]) for r in rows]
    assert got == pytest.approx([(1 + math.sqrt(d)) ** 2 / 4 for d in (1, 2, 4, 8)], rel=1e-15)
    assert got[1] == pytest.approx(1.457, abs=1e-3)
    assert got[3] == pytest.approx(3.665, abs=1e-3)


def test_log_sweep_spacing():
    text = "[family]\nfamily = gecs\nalpha = 1\n[sweep]\nparameter = alpha\nfrom = 0.1\nto = 10\nsteps = 3\nspacing = log\n"
    cfg = harness.parse_config(text, "sweep")
    assert [v.real for v in cfg.sweep.values] == pytest.approx([0.1, 1.0, 10.0])


def test_single_step_sweep_equals_bound(tmp_path):
    base = "[family]\nfamily = ucs\nd = 2\nalpha = 1.5\nnu = 2\n"
    _, bound_rows, _ = invoke(tmp_path, "bound", base)
    sweep = base + "[sweep]\nparameter = nu\nfrom = 2\nto = 2\nsteps = 1\n"
    code, rows, _ = invoke(tmp_path, "sweep", sweep)
    assert code == 0 and len(rows) == 1
    for key in harness.OUTPUT_COLUMNS:
        assert rows[0][key] == bound_rows[0][key]


def test_sweep_point_errors_do_not_stop_run(tmp_path):
    # |alpha| <= 64 caps the GECS mean photon number below 5000
    text = "[family]\nfamily = gecs\nd = 1\n[sweep]\nparameter = d\nvalues = 1, 2\nmatch_n_total = 5000\n"
    code, rows, _ = invoke(tmp_path, "sweep", text)
    assert len(rows) == 2
    assert all(r["status"] == "unreachable" for r in rows)
    assert code == harness.EXIT_TOLERANCE


def compare_config(nu):
    return f"""
[family.ucs]
family = ucs
d = 2
nu = {nu}
[family.gecs]
family = gecs
d = 2
alpha = 4
[compare]
match = n_total
anchor = gecs
"""


@pytest.mark.parametrize("nu, winner", [(3, "ucs"), (1, "gecs")])
def test_compare_ucs_gecs(tmp_path, nu, winner):
    code, rows, raw = invoke(tmp_path, "compare", compare_config(nu))
    assert code == 0
    assert raw.startswith(f"# crossover_nu={crossover_nu(2)!r} (d=2)\n")
    assert [r["label"] for r in rows] == ["ucs", "gecs"]
    assert {r["verdict"] for r in rows} == {winner}
    assert float(rows[0]["n_total"]) == pytest.approx(float(rows[1]["n_total"]), rel=1e-9)


def test_compare_unreachable_match(tmp_path):
    # matching GECS at alpha = 60 would need |alpha| near 95 for the nu = 3 cat
    text = compare_config(3).replace("alpha = 4", "alpha = 60")
    code, rows, _ = invoke(tmp_path, "compare", text)
    assert code == harness.EXIT_TOLERANCE
    assert [r["label"] for r in rows] == ["ucs", "gecs"]
    assert rows[0]["status"] == "unreachable"
    assert rows[1]["status"] == "ok"
    assert {r["verdict"] for r in rows} == {"undecided"}


def test_compare_gns_uno_two_verdicts(tmp_path):
    text = f"""
[family.gns]
family = gns
d = 2
gamma = 1
n_photons = 4
[family.uno]
family = uno
d = 2
nu = {math.sqrt(2)!r}
n_photons = 4
[compare]
match = photon_budget
"""
    code, rows, _ = invoke(tmp_path, "compare", text)
    assert code == 0
    assert len(rows) == 3
    assert {"verdict_equal_n", "verdict_equal_n_total"} <= set(rows[0])
    # equal N: GNS at (2+1)(1+1)/(4*16); UNO at 1/(4 V) with V = 16*2/9
    assert float(rows[0]["bound_analytic"]) == pytest.approx(6 / 64, rel=1e-15)
    assert float(rows[1]["bound_analytic"]) == pytest.approx(9 / 128, rel=1e-15)
    assert rows[0]["verdict_equal_n"] == "uno"
    # equal total: UNO gets N = 4 * 3 / 2 = 6 photons per probe
    assert float(rows[2]["n_photons"]) == pytest.approx(6.0)
    assert float(rows[2]["n_total"]) == 4.0


def test_photon_budget_needs_gns_and_uno():
    with pytest.raises(ConfigError):
        harness.parse_config(compare_config(1).replace("n_total", "photon_budget"), "compare")


def test_compare_needs_two_families():
    with pytest.raises(ConfigError):
        harness.parse_config("[family.a]\nfamily = gecs\nalpha = 1\n", "compare")


SWEEP = """
[run]
mode = validate
[family]
family = gns
d = 2
n_photons = 2
gamma = 1
[sweep]
parameter = gamma
from = 0.5
to = 2
steps = 4
"""


def test_determinism(tmp_path):
    _, _, first = invoke(tmp_path, "sweep", SWEEP)
    _, _, second = invoke(tmp_path, "sweep", SWEEP)
    assert first == second
    assert first


def test_echo_completeness(tmp_path):
    _, rows, _ = invoke(tmp_path, "sweep", SWEEP)
    header = list(rows[0])
    assert header[: len(harness.INPUT_COLUMNS)] == list(harness.INPUT_COLUMNS)
    assert header[len(harness.INPUT_COLUMNS) :][: len(harness.OUTPUT_COLUMNS)] == list(harness.OUTPUT_COLUMNS)
    gammas = [float(r["gamma"]) for r in rows]
    assert gammas == [0.5, 1.0, 1.5, 2.0]
    for r in rows:
        assert r["family"] == "gns" and r["d"] == "2" and r["n_photons"] == "2"
        for key in ("n_total", "bound_analytic", "bound_oracle", "discrepancy", "mandel_q", "correlation_j"):
            assert math.isfinite(float(r[key]))


def test_exit_code_contract():
    good = harness.ResultRow({}, status="ok")
    assert harness.exit_code([good, good]) == 0
    assert harness.exit_code([good, harness.ResultRow({}, status="tolerance_failure")]) == 1
    assert harness.exit_code([harness.ResultRow({}, status="resource_error")]) == 3


def test_cli_overrides(tmp_path):
    text = "[run]\ntol = 1e-20\n[family]\nfamily = gns\nd = 2\ngamma = 1\nn_photons = 1\n"
    code, rows, _ = invoke(tmp_path, "validate", text, "--tol", "1e-9", "--epsilon", "1e-10")
    assert code == 0
    assert rows[0]["tol"] == "1e-09"
    assert rows[0]["epsilon"] == "1e-10"


def test_command_in_file_must_match_known_set():
    with pytest.raises(ConfigError) as info:
        harness.parse_config("[run]\ncommand = plot\n[family]\nfamily = gecs\nalpha = 1\n")
    assert info.value.field == "command"
