"""Experiment harness: config parsing, runners, reports, CSV/SVG output."""

import copy
import json
import xml.etree.ElementTree as ET
from fractions import Fraction

import pytest

from apcl import cli
from apcl.harness import (
    KINDS,
    ConfigError,
    parse_config,
    render_svg,
    run_experiment,
    write_csv,
)
from apcl.solver import read_field


def decay_config(**over):
    d = {
        "kind": "decay",
        "basis": {"labels": ["1"], "values": [1.0]},
        "flux": {"breakpoints": ["-2", "2"], "pieces": [[["0", "0", "1/2"]]]},
        "initial": {"terms": [
            {"frequency": [["0"]], "re": 0.3},
            {"frequency": [["1"]], "im": -0.25},
        ]},
        "grid": [128],
        "solver": {"t_end": 1.0, "record_times": [0.25, 0.5, 0.75]},
        "thresholds": {"final_l1_to_mean_max": 0.3},
    }
    d.update(over)
    return d


def checkflux_config(**over):
    d = {
        "kind": "check-flux",
        "basis": {"labels": ["1"], "values": [1.0]},
        "flux": {"breakpoints": ["-2", "2"],
                 "pieces": [[["0", "0", "1/2"], ["0", "0", "1/2"]]]},
        "group_frequencies": [[["1"], ["0"]], [["0"], ["1"]]],
        "thresholds": {"expect": "degenerate"},
    }
    d.update(over)
    return d


def wave_config(kind="counterexample", **over):
    d = {
        "kind": kind,
        "basis": {"labels": ["1"], "values": [1.0]},
        "flux": {"breakpoints": ["-1", "1"], "pieces": [[["0", "1/2"]]]},
        "group_frequencies": [[["1"]]],
        "wave": {"a": "-1/4", "b": "1/4", "kbar": [1], "tau": 0.5},
        "grid": [128],
        "solver": {"t_end": 0.5, "record_times": [0.25]},
        "thresholds": {"min_final_ratio": 0.5},
    }
    d.update(over)
    return d


# --- parsing -------------------------------------------------------------------


def test_kinds_cover_cli():
    assert KINDS == ("check-flux", "decay", "contraction", "counterexample",
                     "convergence", "spectrum")


def test_parse_config_happy_path():
    cfg = parse_config(decay_config())
    assert cfg.kind == "decay"
    assert cfg.grid.shape == (128,)
    assert cfg.solver.t_end == 1.0
    assert cfg.initial.mean == pytest.approx(0.3)


def test_parse_config_unknown_kind():
    with pytest.raises(ConfigError) as e:
        parse_config(decay_config(kind="wiggle"))
    assert e.value.path == "kind"


def test_parse_config_kind_mismatch_with_cli():
    with pytest.raises(ConfigError):
        parse_config(decay_config(), kind="spectrum")


def test_parse_config_missing_required_field():
    d = decay_config()
    del d["grid"]
    with pytest.raises(ConfigError) as e:
        parse_config(d)
    assert "grid" in str(e.value)


def test_parse_config_bad_rational_names_path():
    d = wave_config()
    d["wave"]["a"] = "not-a-number"
    with pytest.raises(ConfigError) as e:
        parse_config(d)
    assert str(e.value).startswith("wave.a")


def test_parse_config_rejects_bool_as_rational():
    d = decay_config()
    d["flux"]["breakpoints"] = [True, "2"]
    with pytest.raises(ConfigError):
        parse_config(d)


def test_parse_config_wave_needs_a_below_b():
    d = wave_config()
    d["wave"]["a"], d["wave"]["b"] = "1/4", "-1/4"
    with pytest.raises(ConfigError):
        parse_config(d)


# --- file output ---------------------------------------------------------------


def test_write_csv_cell_formats(tmp_path):
    p = tmp_path / "t.csv"
    rows = [{"a": True, "b": 3, "c": 0.1, "d": Fraction(1, 3), "e": "x"}]
    write_csv(rows, str(p))
    assert p.read_text() == "a,b,c,d,e\ntrue,3,0.1,1/3,x\n"


def test_write_csv_float_repr_roundtrip(tmp_path):
    p = tmp_path / "t.csv"
    v = 0.1 + 0.2
    write_csv([{"x": v}], str(p))
    cell = p.read_text().splitlines()[1]
    assert float(cell) == v


def test_write_csv_empty_rows(tmp_path):
    p = tmp_path / "t.csv"
    with pytest.raises(ValueError):
        write_csv([], str(p))
    write_csv([], str(p), columns=["a", "b"])
    assert p.read_text() == "a,b\n"


def test_write_csv_column_order_and_gaps(tmp_path):
    p = tmp_path / "t.csv"
    write_csv([{"b": 1, "a": 2}, {"a": 5}], str(p), columns=["a", "b"])
    assert p.read_text() == "a,b\n2,1\n5,\n"


def test_write_csv_deterministic(tmp_path):
    rows = [{"t": 0.1 * i, "v": 1.0 / (i + 1)} for i in range(20)]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(rows, str(p1))
    write_csv(rows, str(p2))
    assert p1.read_bytes() == p2.read_bytes()


def test_render_svg_two_series(tmp_path):
    p = tmp_path / "p.svg"
    render_svg([("one", [0, 1, 2], [1.0, 2.0, 1.5]),
                ("two", [0, 1, 2], [0.5, 0.4, 0.6])], str(p))
    root = ET.fromstring(p.read_text())
    assert root.tag.endswith("svg")
    body = p.read_text()
    assert "one" in body and "two" in body


def test_render_svg_single_point(tmp_path):
    p = tmp_path / "p.svg"
    render_svg([("dot", [1.0], [2.0])], str(p))
    ET.fromstring(p.read_text())


def test_render_svg_refuses_empty(tmp_path):
    p = tmp_path / "p.svg"
    with pytest.raises(ValueError):
        render_svg([], str(p))
    with pytest.raises(ValueError):
        render_svg([("z", [0.0, 1.0], [-1.0, 0.0])], str(p), log_y=True)


def test_render_svg_log_drops_nonpositive(tmp_path):
    p = tmp_path / "p.svg"
    render_svg([("z", [0, 1, 2], [0.0, 1e-3, 1e-1])], str(p), log_y=True)
    ET.fromstring(p.read_text())


def test_render_svg_deterministic(tmp_path):
    series = [("s", [0, 1, 2, 3], [0.3, 0.1, 0.05, 0.02])]
    p1, p2 = tmp_path / "a.svg", tmp_path / "b.svg"
    render_svg(series, str(p1), log_y=True)
    render_svg(series, str(p2), log_y=True)
    assert p1.read_bytes() == p2.read_bytes()


def test_render_svg_escapes_labels(tmp_path):
    p = tmp_path / "p.svg"
    render_svg([("a<b&c", [0, 1], [1, 2])], str(p))
    ET.fromstring(p.read_text())


# --- runners -------------------------------------------------------------------


def test_check_flux_degenerate_verdict():
    rep = run_experiment(parse_config(checkflux_config()))
    assert rep.passed
    assert rep.verdicts == {"expect": True}
    (row,), cols = rep.tables["verdict"]
    assert cols[0] == "nondegenerate"
    assert row["nondegenerate"] is False
    assert row["kbar"] in ("1,-1", "-1,1")


def test_check_flux_expect_mismatch_fails():
    d = checkflux_config()
    d["thresholds"]["expect"] = "nondegenerate"
    rep = run_experiment(parse_config(d))
    assert not rep.passed


def test_decay_series_shape_and_monotone_tail():
    rep = run_experiment(parse_config(decay_config()))
    assert rep.passed
    rows, cols = rep.tables["series"]
    assert cols == ["t", "l1_to_mean", "min", "max", "mass"]
    assert [r["t"] for r in rows] == [0.0, 0.25, 0.5, 0.75, 1.0]
    vals = [r["l1_to_mean"] for r in rows]
    # sine data sharpens into a shock quickly; distances then decay
    assert all(b <= a + 1e-3 for a, b in zip(vals, vals[1:]))
    assert rows[-1]["mass"] == pytest.approx(0.3, abs=1e-12)


def test_contraction_never_increases():
    d = {
        "kind": "contraction",
        "basis": {"labels": ["1"], "values": [1.0]},
        "flux": {"breakpoints": ["-2", "2"], "pieces": [[["0", "0", "1/2"]]]},
        "initial": {"terms": [
            {"frequency": [["0"]], "re": 0.3},
            {"frequency": [["1"]], "im": -0.25},
        ]},
        "initial_b": {"terms": [
            {"frequency": [["0"]], "re": 0.1},
            {"frequency": [["1"]], "re": 0.2},
        ]},
        "grid": [64],
        "steps": 40,
        "thresholds": {"max_step_increase": 1e-12},
    }
    rep = run_experiment(parse_config(d))
    assert rep.passed
    assert rep.scalars["max_step_increase"] <= 0.0
    rows, _ = rep.tables["series"]
    assert rows[0]["step"] == 0 and rows[-1]["step"] == 40


def test_counterexample_no_decay():
    rep = run_experiment(parse_config(wave_config()))
    assert rep.passed
    assert rep.scalars["final_ratio"] >= 0.5


def test_convergence_orders():
    d = wave_config(kind="convergence")
    del d["grid"]
    d["grids"] = [[32], [64], [128]]
    d["solver"] = {"t_end": 0.5}
    d["thresholds"] = {"min_order": 0.7}
    rep = run_experiment(parse_config(d))
    assert rep.passed
    rows, cols = rep.tables["errors"]
    assert cols == ["cells", "h_max", "l1_error", "order"]
    errs = [r["l1_error"] for r in rows]
    assert errs[0] > errs[1] > errs[2]


def test_convergence_threads_do_not_change_results(tmp_path):
    d = wave_config(kind="convergence")
    del d["grid"]
    d["grids"] = [[32], [64]]
    d["solver"] = {"t_end": 0.25}
    r1 = run_experiment(parse_config(d), threads=1)
    r4 = run_experiment(parse_config(d), threads=4)
    p1, p4 = tmp_path / "one", tmp_path / "four"
    r1.save(str(p1))
    r4.save(str(p4))
    assert (p1 / "convergence_errors.csv").read_bytes() == \
        (p4 / "convergence_errors.csv").read_bytes()


def test_spectrum_probe_rejects_bad_probe_length():
    d = decay_config(kind="spectrum")
    d["probes"] = [[0, 1]]
    with pytest.raises(ConfigError) as e:
        run_experiment(parse_config(d))
    assert "probes" in str(e.value)


def test_report_save_layout(tmp_path):
    rep = run_experiment(parse_config(decay_config()))
    paths = rep.save(str(tmp_path), prefix="demo", plot=True)
    names = sorted(p.split("/")[-1] for p in paths)
    assert names == ["demo_report.json", "demo_series.csv", "demo_series.svg"]
    payload = json.loads((tmp_path / "demo_report.json").read_text())
    assert payload["kind"] == "decay"
    assert payload["config"] == decay_config()
    assert payload["verdicts"] == {"final_l1_to_mean_max": True}
    assert payload["wall_clock_s"] > 0


def test_report_field_dump_roundtrip(tmp_path):
    d = decay_config(dump_fields=True)
    rep = run_experiment(parse_config(d))
    rep.save(str(tmp_path), prefix="dump")
    f = read_field(str(tmp_path / "dump_final.bin"))
    assert f.grid.shape == (128,)
    assert f.mean() == pytest.approx(0.3, abs=1e-12)


def test_runs_are_deterministic(tmp_path):
    cfg = parse_config(decay_config())
    r1 = run_experiment(cfg)
    r2 = run_experiment(cfg)
    p1, p2 = tmp_path / "a", tmp_path / "b"
    r1.save(str(p1))
    r2.save(str(p2))
    assert (p1 / "decay_series.csv").read_bytes() == \
        (p2 / "decay_series.csv").read_bytes()


# --- CLI -----------------------------------------------------------------------


def write_config(tmp_path, d, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(d))
    return str(p)


def test_cli_pass_exit_zero(tmp_path, capsys):
    cp = write_config(tmp_path, decay_config())
    rc = cli.main(["decay", "--config", cp, "--out", str(tmp_path / "out")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "PASS final_l1_to_mean_max" in out
    assert (tmp_path / "out" / "decay_report.json").exists()


def test_cli_threshold_failure_exit_four(tmp_path):
    d = decay_config()
    d["thresholds"]["final_l1_to_mean_max"] = 1e-9
    cp = write_config(tmp_path, d)
    rc = cli.main(["decay", "--config", cp, "--out", str(tmp_path / "out")])
    assert rc == 4
    # report is still written for a failed verdict
    assert (tmp_path / "out" / "decay_report.json").exists()


def test_cli_config_error_exit_two(tmp_path, capsys):
    d = decay_config()
    del d["solver"]
    cp = write_config(tmp_path, d)
    rc = cli.main(["decay", "--config", cp, "--out", str(tmp_path / "out")])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_cli_missing_file_exit_two(tmp_path):
    rc = cli.main(["decay", "--config", str(tmp_path / "nope.json"),
                   "--out", str(tmp_path)])
    assert rc == 2


def test_cli_kind_mismatch_exit_two(tmp_path):
    cp = write_config(tmp_path, decay_config())
    rc = cli.main(["spectrum", "--config", cp, "--out", str(tmp_path)])
    assert rc == 2


def test_cli_refusal_exit_three(tmp_path, capsys):
    # quadratic flux cannot carry an exact traveling wave
    d = wave_config()
    d["flux"] = {"breakpoints": ["-1", "1"], "pieces": [[["0", "0", "1/2"]]]}
    cp = write_config(tmp_path, d)
    rc = cli.main(["counterexample", "--config", cp, "--out", str(tmp_path)])
    assert rc == 3
    assert "refused" in capsys.readouterr().err


def test_cli_plot_writes_svg(tmp_path):
    cp = write_config(tmp_path, decay_config())
    rc = cli.main(["decay", "--config", cp, "--out", str(tmp_path / "out"),
                   "--plot"])
    assert rc == 0
    svg = tmp_path / "out" / "decay_series.svg"
    ET.fromstring(svg.read_text())


def test_cli_prefix_from_config(tmp_path):
    d = decay_config()
    d["output"] = {"prefix": "myrun"}
    cp = write_config(tmp_path, d)
    rc = cli.main(["decay", "--config", cp, "--out", str(tmp_path / "out")])
    assert rc == 0
    assert (tmp_path / "out" / "myrun_report.json").exists()


def test_config_dict_not_mutated():
    d = decay_config()
    snapshot = copy.deepcopy(d)
    run_experiment(parse_config(d))
    assert d == snapshot
