import csv
import io
import json

import pytest

from conedbar.cli import (
    EXIT_FAIL,
    EXIT_OK,
    EXIT_USAGE,
    ConfigError,
    main,
    parse_config,
    render,
    run_experiment,
)

MINIMAL = "[experiment]\nname = obstruction-table\n"

CP1 = """[experiment]
name = solve-cp1
m = 0
seeds = 3
[grid]
n_r = 8
refine = 3
[tolerances]
residual = 0.5
order = 0.1
"""


def test_minimal_config_gets_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.experiment == "obstruction-table"
    assert cfg.degree == 2 and cfg.refine == 2 and cfg.format == "json"
    assert cfg.grids() == [32, 64]


def test_refine_sets_grid_ladder():
    cfg = parse_config(MINIMAL + "[grid]\nn_r = 16\nrefine = 3\n")
    assert cfg.grids() == [16, 32, 64]


def test_negative_tolerance_names_key():
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL + "[tolerances]\nresidual = -1e-3\n")
    assert any("tolerances.residual" in p for p in exc.value.problems)


def test_unknown_key_and_section_rejected():
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL + "[grid]\nnr = 8\n[extras]\nx = 1\n")
    text = " ".join(exc.value.problems)
    assert "grid.nr" in text and "[extras]" in text


def test_all_violations_listed():
    bad = "[experiment]\nname = solve-cp1\ndegree = 0\nkind = wiggly\n[grid]\nrefine = 0\nn_r = x\n[output]\nformat = xml\n"
    with pytest.raises(ConfigError) as exc:
        parse_config(bad)
    keys = ("experiment.degree", "experiment.kind", "grid.refine", "grid.n_r", "output.format")
    for key in keys:
        assert any(p.startswith(key) for p in exc.value.problems), key


def test_missing_experiment():
    with pytest.raises(ConfigError, match="experiment"):
        parse_config("[grid]\nn_r = 8\n")


def test_overrides_win():
    cfg = parse_config(MINIMAL, {"degree": 3, "seeds": [7], "refine": None})
    assert cfg.degree == 3 and cfg.seeds == [7] and cfg.refine == 2


def test_reports_are_byte_identical(tmp_path):
    cfg = write(tmp_path, MINIMAL + "degree = 1\n")
    for fmt in ("json", "csv", "text"):
        a, b = tmp_path / f"a_{fmt}", tmp_path / f"b_{fmt}"
        for out in (a, b):
            assert main(["--config", str(cfg), "--out", str(out), "--format", fmt]) == EXIT_OK
        name = next(p.name for p in a.iterdir() if p.name.startswith("report"))
        assert (a / name).read_bytes() == (b / name).read_bytes()
        assert (a / "timings.json").exists()


def test_csv_has_one_row_per_grid():
    report = run_experiment(parse_config(CP1))
    rows = list(csv.reader(io.StringIO(render(report, "csv"))))
    assert len(rows) == 3 + 1
    data = json.loads(render(report, "json"))
    assert data["passed"] and "n_r" in rows[0]


def write(tmp_path, text, name="cfg.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_exit_codes(tmp_path, capsys):
    out = str(tmp_path / "out")
    assert main(["--config", str(write(tmp_path, MINIMAL)), "--out", out]) == EXIT_OK
    tight = CP1.replace("residual = 0.5", "residual = 1e-12").replace("refine = 3", "refine = 1")
    assert main(["--config", str(write(tmp_path, tight)), "--out", out]) == EXIT_FAIL
    assert main(["--config", str(write(tmp_path, MINIMAL + "[grid]\nrefine = 0\n")), "--out", out]) == EXIT_USAGE
    assert "grid.refine" in capsys.readouterr().err
    assert main(["--config", str(tmp_path / "missing.ini"), "--out", out]) == EXIT_USAGE


def test_stage_errors_are_reported():
    cfg = parse_config("[experiment]\nname = solve-cone-bounded\nkind = exact_singular\n[grid]\nn_r = 8\nrefine = 1\n")
    report = run_experiment(cfg)
    assert not report.passed
    assert report.errors and "unbounded" in report.errors[0]["message"]


def test_inline_comments_allowed():
    cfg = parse_config(MINIMAL + "[grid]\nrefine = 3   ; three grids\nn_r = 8 # coarse\n")
    assert cfg.grids() == [8, 16, 32]
