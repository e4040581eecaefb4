import runpy
from pathlib import Path

import pytest

DEMOS = sorted((Path(__file__).parent.parent / "demos").glob("*.py"))


@pytest.mark.parametrize("path", DEMOS, ids=lambda p: p.stem)
def test_demo_runs(path, capsys):
    runpy.run_path(str(path), run_name="__main__")
    assert capsys.readouterr().out


@pytest.mark.parametrize(
    "command, name",
    [("bound", "gns_bound"), ("validate", "ucs_validate"), ("sweep", "ucs_nu_sweep"), ("compare", "ucs_vs_gecs"), ("compare", "gns_vs_uno")],
)
def test_demo_configs(command, name, tmp_path):
    from multiphase import cli

    config = Path(__file__).parent.parent / "demos" / "configs" / f"{name}.ini"
    assert cli.main([command, "--config", str(config), "--out", str(tmp_path / "o.csv")]) == 0
