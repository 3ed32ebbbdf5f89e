import filecmp
import hashlib
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qrepeater.cli import main, run_scenario
from qrepeater.output import (
    RATE_FLOOR,
    CurveOutput,
    crossing_distance,
    distance_grid,
    emit_csv,
    emit_plot_data,
    read_curve_csv,
)
from qrepeater.scenario import SCENARIO_DIR, ScenarioParseError, parse_scenario_text


def write(tmp_path, text, name="s.scn"):
    p = tmp_path / name
    p.write_text(text)
    return p


def run(tmp_path, text, name="s.scn"):
    out = tmp_path / "out"
    return run_scenario(write(tmp_path, text, name), out), out


def read_blocks(path):
    text = Path(path).read_text()
    return text, text.split("\n\n")


# parsing


def test_parse_defaults_and_types():
    sc = parse_scenario_text("mode = repeater_analytic\nmemories = 0.22:0.76, 0.2:0.16  # two\n")
    assert sc.mode == "repeater_analytic"
    assert sc["memories"] == [(0.22, 0.76), (0.2, 0.16)]
    assert sc["grid_points"] == 64 and sc["grid_spacing"] == "log"
    assert sc["nesting"] == "auto"


@pytest.mark.parametrize(
    "text,line,col",
    [
        ("", 1, 1),
        ("# only a comment\n", 1, 1),
        ("mode = direct\nbogus = 1\n", 2, 1),
        ("mode = direct\ngrid_points = 10\ngrid_points = 12\n", 3, 1),
        ("mode = direct\n  grid_points\n", 2, 3),
        ("mode = direct\ngrid_points = ten\n", 2, 15),
        ("mode = teleport\n", 1, 8),
        ("mode = repeater_mc\ndistance_km = 100\n", 3, 1),
        ("mode = repeater_analytic\nmemories = 0.22\n", 2, 12),
    ],
)
def test_parse_errors_carry_position(text, line, col):
    with pytest.raises(ScenarioParseError) as e:
        parse_scenario_text(text, "x.scn")
    assert (e.value.line, e.value.col) == (line, col)
    assert str(e.value).startswith(f"x.scn:{line}:{col}:")


@settings(max_examples=100)
@given(st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=80))
def test_parsing_is_total(text):
    try:
        parse_scenario_text(text, "fuzz.scn")
    except ScenarioParseError as e:
        assert e.line >= 1 and e.col >= 1


# exit codes


def test_empty_file_exit_2(tmp_path, capsys):
    code, out = run(tmp_path, "")
    assert code == 2
    assert "s.scn:1:1" in capsys.readouterr().err
    assert not out.exists()


def test_missing_file_exit_2(tmp_path):
    assert run_scenario(tmp_path / "nope.scn", tmp_path) == 2


def test_config_error_exit_3(tmp_path):
    assert run(tmp_path, "mode = direct\ndet_efficiency = 1.5\n")[0] == 3
    assert run(tmp_path, "mode = repeater_analytic\nmemories = 0.22:0.76\nnesting = 5\n")[0] == 3
    assert run(tmp_path, "mode = direct\ngrid_min_km = 100\ngrid_max_km = 50\n")[0] == 3


def test_numeric_error_exit_4(tmp_path):
    text = "mode = decoherence\nchi1 = 0.1\ntau1_s = 1e-4\nchi2 = 0.5\ntau2_s = 0.3\nthresholds = 0.9\n"
    assert run(tmp_path, text)[0] == 4
    data = tmp_path / "flat.csv"
    data.write_text("t_s,value,sigma\n" + "".join(f"{t},0.5,0.01\n" for t in (0.001, 0.01, 0.1)))
    assert run(tmp_path, f"mode = fit\ndata = {data.name}\nmodel = double\n")[0] == 4


# shipped scenarios


def test_direct_baseline_crossing(tmp_path):
    assert run_scenario("direct_baseline", tmp_path) == 0
    c = read_curve_csv(tmp_path / "direct_baseline.csv")
    assert crossing_distance(c.distances, c.rates, 0.01) == pytest.approx(750.0, abs=1e-6)
    dark = read_curve_csv(tmp_path / "direct_baseline_dark.csv")
    assert dark.rates[-1] == 0.0


def test_this_work_crossing(tmp_path):
    assert run_scenario("this_work", tmp_path) == 0
    c = read_curve_csv(tmp_path / "this_work.csv")
    assert crossing_distance(c.distances, c.rates, 0.01) == pytest.approx(860.0, rel=0.2)
    assert set(c.n) <= {0, 1, 2, 3}
    assert all(40 <= nm <= 1000 for nm in c.Nm)


def test_comparison_blocks(tmp_path):
    assert run_scenario("rate_comparison", tmp_path) == 0
    text, blocks = read_blocks(tmp_path / "rate_comparison.dat")
    assert len(blocks) == 5
    heads = [b.splitlines()[0] for b in blocks]
    assert heads == [
        "# direct transmission, no dark counts",
        "# direct transmission, dark count probability 1e-09",
        "# 0.2 s + 16%",
        "# 3.2 ms + 73%",
        "# 0.22 s + 76%",
    ]
    assert text.endswith("\n") and not text.endswith("\n\n")
    grids = [read_curve_csv(tmp_path / f"rate_comparison_mem{i}.csv").distances for i in (1, 2, 3)]
    assert grids[0] == grids[1] == grids[2] == distance_grid()


def test_block_order_follows_declaration(tmp_path):
    code, out = run(tmp_path, "mode = repeater_analytic\nmemories = 0.22:0.76, 0.2:0.16\ngrid_points = 5\n")
    assert code == 0
    _, blocks = read_blocks(out / "s.dat")
    assert [b.splitlines()[0] for b in blocks] == ["# 0.22 s + 76%", "# 0.2 s + 16%"]


def test_single_curve_single_block(tmp_path):
    code, out = run(tmp_path, "mode = repeater_analytic\nmemories = 0.22:0.76\ngrid_points = 8\n")
    assert code == 0
    text, blocks = read_blocks(out / "s.dat")
    assert len(blocks) == 1 and len(blocks[0].splitlines()) == 9
    assert not text.endswith("\n\n")


def test_alpha_scenario(tmp_path):
    assert run_scenario("alpha_vs_storage", tmp_path) == 0
    rows = (tmp_path / "alpha_vs_storage_alpha.csv").read_text().splitlines()
    assert rows[0] == "t_ms,alpha,sigma,expected_triples,n123,upper_bound"
    alphas = [round(float(r.split(",")[1]), 2) for r in rows[1:]]
    assert alphas == [0.11, 0.16, 0.28, 0.09, 0.29]


def test_decay_scenarios(tmp_path):
    assert run_scenario("decay_model", tmp_path) == 0
    rep = dict(line.split(" = ") for line in (tmp_path / "decay_model_report.txt").read_text().splitlines())
    assert float(rep["chi0"]) == pytest.approx(0.756)
    assert float(rep["threshold_time_s[0.5]"]) == pytest.approx(0.051, abs=1e-3)
    assert run_scenario("decay_fit", tmp_path) == 0
    fit = dict(line.split(" = ") for line in (tmp_path / "decay_fit_fit.txt").read_text().splitlines())
    assert fit["converged"] == "true" and fit["unidentifiable"] == "false"
    assert abs(float(fit["tau2"]) - 0.285) < 2 * float(fit["tau2_err"])


def test_shipped_checksums(tmp_path):
    expected = (SCENARIO_DIR / "CHECKSUMS.sha256").read_text().split("\n")[:-1]
    got = []
    for scn in sorted(SCENARIO_DIR.glob("*.scn")):
        out = tmp_path / scn.stem
        assert run_scenario(scn, out) == 0
        for f in sorted(out.iterdir()):
            got.append(f"{hashlib.sha256(f.read_bytes()).hexdigest()}  {scn.stem}/{f.name}")
    assert got == expected


def test_rerun_is_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert run_scenario("rate_comparison", tmp_path / d) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names, shallow=False)
    assert match == names and not mismatch and not errors


def test_mc_workers_byte_identical(tmp_path):
    text = ("mode = repeater_mc\ndistance_km = 200\nnesting = 2\nmemory = 0.22:0.76\n"
            "trials = 600\nseed = 3\ntrial_records = true\n")
    p = write(tmp_path, text)
    assert run_scenario(p, tmp_path / "w1", workers=1) == 0
    assert run_scenario(p, tmp_path / "w3", workers=3) == 0
    for name in ("s_mc.txt", "s_trials.csv"):
        assert filecmp.cmp(tmp_path / "w1" / name, tmp_path / "w3" / name, shallow=False)


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("QREPEATER_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["run", "direct_baseline"]) == 0
    assert (tmp_path / "env" / "direct_baseline.csv").exists()


# emitters


def test_csv_round_trip_and_floor(tmp_path):
    c = CurveOutput("x")
    c.append(50.0, 1 / 3, 1, 80, 1 / 80)
    c.append(60.0, 1e-31, 2, 160, 1 / 160)
    c.append(70.0, 2 * RATE_FLOOR, 3, 320, 1 / 320)
    p = tmp_path / "c.csv"
    emit_csv(c, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "distance_km,rate_hz,n,Nm,p"
    assert lines[2].split(",")[1] == "0"
    back = read_curve_csv(p)
    assert back.rates == [1 / 3, 0.0, 2 * RATE_FLOOR]
    assert back.p == c.p and back.n == c.n and back.Nm == c.Nm


@given(st.lists(st.tuples(st.floats(1e-3, 1e4), st.floats(0, 1e12)), min_size=1, max_size=20,
                unique_by=lambda x: x[0]))
def test_csv_round_trip_exact(rows):
    import tempfile

    rows = sorted(rows)
    c = CurveOutput("h")
    for d, r in rows:
        c.append(d, r)
    with tempfile.TemporaryDirectory() as tmp:
        p = Path(tmp) / "c.csv"
        emit_csv(c, p)
        back = read_curve_csv(p)
    assert back.distances == [d for d, _ in rows]
    assert back.rates == [0.0 if r < RATE_FLOOR else r for _, r in rows]


def test_curve_validation():
    with pytest.raises(ValueError):
        CurveOutput("bad", [2.0, 1.0], [1.0, 1.0], [0, 0], [1, 1], [1.0, 1.0])
    with pytest.raises(ValueError):
        CurveOutput("bad", [1.0], [-1.0], [0], [1], [1.0])


def test_plot_data_requires_curves(tmp_path):
    with pytest.raises(ValueError):
        emit_plot_data([], tmp_path / "x.dat")


def test_crossing_distance():
    assert crossing_distance([1, 2, 3], [1.0, 0.1, 0.01], 0.1) == 2
    assert crossing_distance([1, 2, 3], [1.0, 1e-1, 1e-3], 1e-2) == pytest.approx(2.5)
    assert crossing_distance([1, 2], [1.0, 1.0], 0.1) == math.inf
    assert math.isnan(crossing_distance([1, 2], [0.01, 0.001], 0.1))


def test_distance_grid():
    g = distance_grid()
    assert len(g) == 64 and g[0] == pytest.approx(50) and g[-1] == pytest.approx(1500)
    assert np.allclose(np.diff(np.log(g)), np.log(30) / 63)
    assert distance_grid(10, 20, 3, "linear") == [10.0, 15.0, 20.0]


# fit and alpha verbs


def test_fit_verb(tmp_path, capsys):
    assert main(["fit", str(SCENARIO_DIR / "decay_synthetic.csv")]) == 0
    out = capsys.readouterr().out
    assert out.startswith("model = double\n")
    t = np.geomspace(0.01, 1.5, 20)
    p = tmp_path / "single.csv"
    p.write_text("t_s,value,sigma\n" + "".join(f"{float(x)!r},{float(np.exp(-x / 0.51))!r},\n" for x in t))
    assert main(["fit", str(p), "--model", "single"]) == 0
    rep = dict(line.split(" = ") for line in capsys.readouterr().out.splitlines())
    assert float(rep["tau"]) == pytest.approx(0.51, rel=1e-6)


def test_fit_verb_errors(tmp_path):
    assert main(["fit", str(tmp_path / "missing.csv")]) == 1
    p = tmp_path / "bad.csv"
    p.write_text("time,value\n")
    assert main(["fit", str(p)]) == 2


def test_alpha_verb(capsys):
    assert main(["alpha", str(SCENARIO_DIR / "alpha_counts.csv")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 6
    assert main(["alpha", str(SCENARIO_DIR / "alpha_counts.csv"), "--uncertainty", "binomial"]) == 0
