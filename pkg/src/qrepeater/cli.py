"""Command-line entry point: `qrepeater run|check|fit|alpha`."""
from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import decoherence as dec
from .detection import DetectionChain, alpha_estimate, expected_triples_at_unity, read_counts_csv
from .errors import ConfigurationError, NumericalError, QRepeaterError
from .fitting import fit_double_exp, fit_single_exp, format_report, read_decay_csv
from .linkbudget import (
    DirectTransmissionParams,
    dark_cutoff_distance,
    direct_max_distance,
    direct_rate,
)
from .montecarlo import SimConfig, run_trials, estimate_from_outcomes, write_trial_records
from .output import CurveOutput, crossing_distance, distance_grid, emit_csv, emit_plot_data, fmt
from .repeater import (
    LinkParams,
    MemoryModel,
    RepeaterScenario,
    analytic_rate,
    optimize_scenario,
)
from .scenario import ScenarioFile, ScenarioParseError, find_scenario, output_dir, parse_scenario

EXIT_OK = 0
EXIT_IO = 1
EXIT_PARSE = 2
EXIT_CONFIG = 3
EXIT_NUMERIC = 4


def _grid(sc: ScenarioFile):
    try:
        return distance_grid(sc["grid_min_km"], sc["grid_max_km"], sc["grid_points"], sc["grid_spacing"])
    except ValueError as e:
        raise ConfigurationError(str(e)) from None


def _direct_params(sc: ScenarioFile) -> DirectTransmissionParams:
    return DirectTransmissionParams(
        rep_rate=sc["rep_rate_hz"],
        loss_coeff=sc["loss_db_per_km"],
        det_efficiency=sc["det_efficiency"],
        dark_prob=sc["dark_prob"],
        rate_threshold=sc["rate_threshold_hz"],
        fidelity_floor=sc["fidelity_floor"],
    )


def _direct_curves(p: DirectTransmissionParams, grid, which="both"):
    curves = []
    if which in ("plain", "both"):
        c = CurveOutput("direct transmission, no dark counts")
        for L in grid:
            c.append(L, direct_rate(L, p))
        curves.append(c)
    if which in ("dark", "both"):
        c = CurveOutput(f"direct transmission, dark count probability {p.dark_prob:g}")
        cutoff = dark_cutoff_distance(p)
        for L in grid:
            c.append(L, direct_rate(L, p) if L <= cutoff else 0.0)
        curves.append(c)
    return curves


def _write_report(path: Path, items: list[tuple[str, object]]):
    with open(path, "w", newline="") as f:
        for k, v in items:
            f.write(f"{k} = {fmt(v) if isinstance(v, float) else v}\n")


def run_direct(sc: ScenarioFile, out: Path, **_):
    p = _direct_params(sc)
    grid = _grid(sc)
    plain, dark = _direct_curves(p, grid)
    emit_csv(plain, out / f"{sc.name}.csv")
    emit_csv(dark, out / f"{sc.name}_dark.csv")
    emit_plot_data([plain, dark], out / f"{sc.name}.dat")
    _write_report(out / f"{sc.name}_summary.txt", [
        ("max_distance_km", direct_max_distance(p)),
        ("grid_crossing_km", crossing_distance(plain.distances, plain.rates, p.rate_threshold)),
        ("dark_cutoff_km", dark_cutoff_distance(p)),
    ])


def _memory(pair) -> MemoryModel:
    tau, chi0 = pair
    return MemoryModel(chi0=chi0, tau=tau)


def _link(sc: ScenarioFile, max_nesting=3) -> LinkParams:
    return LinkParams(
        loss_coeff=sc["loss_db_per_km"],
        det_efficiency=sc["det_efficiency"],
        dark_prob=sc["dark_prob"],
        fiber_speed=sc["fiber_speed_km_s"],
        fidelity_target=sc["fidelity_target"],
        end_mode=sc["end_mode"],
        max_nesting=max_nesting,
    )


def repeater_curve(memory: MemoryModel, link: LinkParams, grid, nesting="auto") -> CurveOutput:
    c = CurveOutput(memory.label)
    for L in grid:
        if nesting == "auto":
            r = optimize_scenario(L, memory, link)
        else:
            r = analytic_rate(RepeaterScenario.for_fidelity(L, nesting, memory, link))
        c.append(L, r.rate_hz, r.chosen_n, r.chosen_Nm, r.chosen_p)
    return c


def run_repeater_analytic(sc: ScenarioFile, out: Path, **_):
    link = _link(sc)
    nesting = sc["nesting"]
    if nesting != "auto" and not 0 <= nesting <= 3:
        raise ConfigurationError("nesting must be auto or 0..3")
    grid = _grid(sc)
    memories = [_memory(m) for m in sc["memories"]]
    curves = [repeater_curve(m, link, grid, nesting) for m in memories]
    if len(curves) == 1:
        emit_csv(curves[0], out / f"{sc.name}.csv")
    else:
        for i, c in enumerate(curves, start=1):
            emit_csv(c, out / f"{sc.name}_mem{i}.csv")
    blocks = []
    if sc["direct_baseline"] != "none":
        blocks += _direct_curves(_direct_params(sc), grid, sc["direct_baseline"])
    emit_plot_data(blocks + curves, out / f"{sc.name}.dat")
    thr = sc["rate_threshold_hz"]
    items = []
    for i, (m, c) in enumerate(zip(memories, curves), start=1):
        items.append((f"mem{i}_label", m.label))
        items.append((f"mem{i}_crossing_km", crossing_distance(c.distances, c.rates, thr)))
    _write_report(out / f"{sc.name}_summary.txt", items)


def run_repeater_mc(sc: ScenarioFile, out: Path, workers=None, **_):
    mem = _memory(sc["memory"])
    link = _link(sc)
    s = RepeaterScenario.for_fidelity(sc["distance_km"], sc["nesting"], mem, link)
    cfg = SimConfig(s, sc["trials"], sc["seed"], sc["max_sim_time_s"])
    outcomes = run_trials(cfg, workers if workers is not None else sc["workers"])
    est = estimate_from_outcomes(outcomes)
    ana = analytic_rate(s)
    _write_report(out / f"{sc.name}_mc.txt", [
        ("distance_km", float(s.distance)),
        ("nesting", s.nesting),
        ("multiplex", s.multiplex),
        ("trials", est.n_trials),
        ("successes", est.successes),
        ("total_time_s", est.total_time),
        ("mean_rate_hz", est.mean_rate),
        ("ci95_low_hz", est.ci95_low),
        ("ci95_high_hz", est.ci95_high),
        ("analytic_rate_hz", ana.rate_hz),
    ])
    if sc["trial_records"]:
        write_trial_records(out / f"{sc.name}_trials.csv", outcomes)


def _fit(kind, data, init=None):
    if kind == "single":
        return fit_single_exp(data, init)
    return fit_double_exp(data, init)


def run_fit(sc: ScenarioFile, out: Path, **_):
    data = read_decay_csv(sc.resolve(sc["data"]))
    kind = sc["model"]
    init = None
    if kind == "single" and sc["init_amplitude"] is not None:
        init = dec.SingleExpModel(sc["init_amplitude"], sc["init_tau"])
    elif kind == "double" and sc["init_chi1"] is not None:
        init = dec.RetrievalDecayModel(sc["init_chi1"], sc["init_tau1"], sc["init_chi2"], sc["init_tau2"])
    res = _fit(kind, data, init)
    (out / f"{sc.name}_fit.txt").write_text(format_report(kind, res))


def alpha_rows(rows, chain: DetectionChain | None = None, uncertainty="poisson"):
    table = []
    for t_ms, c in rows:
        est = alpha_estimate(c, uncertainty)
        table.append((t_ms, est.alpha, est.sigma, expected_triples_at_unity(c), c.n123, est.upper_bound))
    return table


def write_alpha_table(table, f):
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["t_ms", "alpha", "sigma", "expected_triples", "n123", "upper_bound"])
    for t_ms, a, s, e, n123, ub in table:
        w.writerow([fmt(t_ms), fmt(a), fmt(s), fmt(e), n123, int(ub)])


def run_alpha_table(sc: ScenarioFile, out: Path, **_):
    DetectionChain(sc["eta_cav"], sc["eta_t"], sc["eta_spd"])
    rows = read_counts_csv(sc.resolve(sc["counts"]))
    table = alpha_rows(rows, uncertainty=sc["uncertainty"])
    with open(out / f"{sc.name}_alpha.csv", "w", newline="") as f:
        write_alpha_table(table, f)


def run_decoherence(sc: ScenarioFile, out: Path, **_):
    model = dec.RetrievalDecayModel(sc["chi1"], sc["tau1_s"], sc["chi2"], sc["tau2_s"])
    if sc["curve_points"] < 2 or sc["curve_t_max_s"] <= 0:
        raise ConfigurationError("curve needs >= 2 points and a positive t_max")
    ts = np.linspace(0.0, sc["curve_t_max_s"], sc["curve_points"])
    with open(out / f"{sc.name}_chi.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["t_s", "chi"])
        for t in ts:
            w.writerow([fmt(float(t)), fmt(dec.chi_of_t(model, float(t)))])
    chi0 = model.chi0
    items = [("chi0", chi0)]
    for lvl in sc["thresholds"]:
        items.append((f"threshold_time_s[{lvl:g}]", dec.threshold_time(model, lvl)))
    items.append(("threshold_time_s[chi0/e]", dec.threshold_time(model, chi0 / math.e)))
    thermal = dec.ThermalParams(sc["temperature_k"])
    items.append(("thermal_speed_m_s", dec.thermal_speed(thermal)))
    for a in sc["angles_deg"]:
        geom = dec.SpinwaveGeometry(angle_theta=math.radians(a))
        lam = dec.spinwave_wavelength(geom)
        items.append((f"spinwave_wavelength_m[{a:g}deg]", lam))
        items.append((f"motional_time_s[{a:g}deg]", dec.motional_decay_estimate(lam / 2, thermal)))
    items.append(("motional_time_s[cavity_waist]",
                  dec.motional_decay_estimate(dec.SpinwaveGeometry().cavity_waist, thermal)))
    _write_report(out / f"{sc.name}_report.txt", items)


RUNNERS = {
    "direct": run_direct,
    "repeater_analytic": run_repeater_analytic,
    "repeater_mc": run_repeater_mc,
    "fit": run_fit,
    "alpha_table": run_alpha_table,
    "decoherence": run_decoherence,
}


def _fail(code, msg):
    print(f"error: {msg}", file=sys.stderr)
    return code


def run_scenario(path, out_dir=None, workers=None) -> int:
    try:
        sc = parse_scenario(find_scenario(str(path)))
    except FileNotFoundError as e:
        return _fail(EXIT_PARSE, f"cannot read scenario {e}")
    except ScenarioParseError as e:
        return _fail(EXIT_PARSE, str(e))
    try:
        out = output_dir(out_dir)
        RUNNERS[sc.mode](sc, out, workers=workers)
    except ConfigurationError as e:
        return _fail(EXIT_CONFIG, f"{sc.path}: configuration error: {e}")
    except (NumericalError, ArithmeticError) as e:
        return _fail(EXIT_NUMERIC, f"{sc.path}: numerical failure: {e}")
    except OSError as e:
        return _fail(EXIT_IO, f"{sc.path}: {e}")
    except (ValueError, QRepeaterError) as e:
        return _fail(EXIT_CONFIG, f"{sc.path}: {e}")
    return EXIT_OK


def cmd_fit(args) -> int:
    try:
        data = read_decay_csv(args.csv)
        res = _fit(args.model, data)
    except OSError as e:
        return _fail(EXIT_IO, str(e))
    except NumericalError as e:
        return _fail(EXIT_NUMERIC, str(e))
    except ValueError as e:
        return _fail(EXIT_PARSE, str(e))
    sys.stdout.write(format_report(args.model, res))
    return EXIT_OK


def cmd_alpha(args) -> int:
    try:
        rows = read_counts_csv(args.csv)
        table = alpha_rows(rows, uncertainty=args.uncertainty)
    except OSError as e:
        return _fail(EXIT_IO, str(e))
    except QRepeaterError as e:
        return _fail(EXIT_CONFIG, str(e))
    except ValueError as e:
        return _fail(EXIT_PARSE, str(e))
    write_alpha_table(table, sys.stdout)
    return EXIT_OK


def cmd_check(args) -> int:
    from .acceptance import run_all

    results = run_all()
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="qrepeater", description=__doc__)
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", help="run a scenario file or shipped scenario name")
    p.add_argument("scenario")
    p.add_argument("--out", help="output directory (default $QREPEATER_OUTPUT_DIR or ./out)")
    p.add_argument("--workers", type=int, help="override Monte Carlo worker count")

    sub.add_parser("check", help="run the acceptance criteria")

    p = sub.add_parser("fit", help="fit a decay CSV (t_s,value,sigma)")
    p.add_argument("csv")
    p.add_argument("--model", choices=["single", "double"], default="double")

    p = sub.add_parser("alpha", help="anticorrelation table from a counts CSV")
    p.add_argument("csv")
    p.add_argument("--uncertainty", choices=["poisson", "binomial"], default="poisson")

    args = ap.parse_args(argv)
    if args.verb == "run":
        return run_scenario(args.scenario, args.out, args.workers)
    return {"check": cmd_check, "fit": cmd_fit, "alpha": cmd_alpha}[args.verb](args)


if __name__ == "__main__":
    sys.exit(main())
