"""Discrete-event simulation of the repeater chain.

Each trial builds the nested chain bottom-up. Elementary links wait a
geometric number of windows. A swap happens once both halves exist, and
succeeds with probability swap_success(chi_eff, det). chi_eff is the
geometric mean of the two swapped memories' efficiencies at their exact
ages. After a failed swap both halves are discarded and regenerated.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .errors import ConfigurationError, SimulationTimeout
from .repeater import EndMode, RepeaterScenario, analytic_rate, elementary_link_prob, swap_success
from .rng import CounterRNG

Z95 = 1.959963984540054


@dataclass(frozen=True)
class SimConfig:
    scenario: RepeaterScenario
    trials: int = 10_000
    master_seed: int = 0
    max_sim_time: float | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigurationError("trials must be >= 1")
        if self.max_sim_time is not None and not self.max_sim_time > 0:
            raise ConfigurationError("max_sim_time must be positive")

    def resolved_max_time(self) -> float:
        if self.max_sim_time is not None:
            return self.max_sim_time
        Tn = analytic_rate(self.scenario).level_times[-1]
        return 1e4 * Tn if math.isfinite(Tn) else math.inf


@dataclass
class TrialOutcome:
    success: bool
    completion_time: float
    swap_attempt_counts: list[int] = field(default_factory=list)
    timed_out: bool = False


@dataclass(frozen=True)
class RateEstimate:
    mean_rate: float
    ci95_low: float
    ci95_high: float
    n_trials: int
    successes: int = 0
    total_time: float = 0.0


def simulate_elementary_link(s: RepeaterScenario, rng: CounterRNG, max_windows: float = math.inf) -> int:
    P0 = elementary_link_prob(s)
    if P0 <= 0:
        raise SimulationTimeout("elementary link can never herald")
    k = rng.geometric(P0)
    if k > max_windows:
        raise SimulationTimeout(f"elementary link needed {k} windows")
    return k


def simulate_chain(s: RepeaterScenario, rng: CounterRNG, max_sim_time: float = math.inf) -> TrialOutcome:
    mem = s.memory
    W = s.window
    det = s.det_efficiency
    attempts = [0] * s.nesting

    def build(level: int, t: float):
        # returns (ready time, birth of left end memory, birth of right end memory)
        if level == 0:
            k = simulate_elementary_link(s, rng, (max_sim_time - t) / W)
            done = t + k * W
            # the excitation is written at the start of the successful window
            return done, done - W, done - W
        while True:
            a = build(level - 1, t)
            b = build(level - 1, t)
            ready = max(a[0], b[0])
            if ready > max_sim_time:
                raise SimulationTimeout("trial exceeded max_sim_time")
            attempts[level - 1] += 1
            chi_eff = math.sqrt(mem.efficiency(ready - a[2]) * mem.efficiency(ready - b[1]))
            if rng.random() < swap_success(chi_eff, det):
                return ready, a[1], b[2]
            t = ready

    try:
        done, left_birth, right_birth = build(s.nesting, 0.0)
    except SimulationTimeout:
        return TrialOutcome(False, max_sim_time, attempts, timed_out=True)

    if s.end_mode is EndMode.STORE_AND_WAIT:
        p_end = mem.efficiency(done - left_birth) * mem.efficiency(done - right_birth) * det * det
    else:
        p_end = (mem.chi0 * det) ** 2
    return TrialOutcome(rng.random() < p_end, done, attempts)


def _run_range(args) -> list[TrialOutcome]:
    scenario, seed, start, stop, max_time = args
    out = []
    for i in range(start, stop):
        out.append(simulate_chain(scenario, CounterRNG.for_trial(seed, i), max_time))
    return out


def run_trials(c: SimConfig, workers: int = 1, chunk: int = 500) -> list[TrialOutcome]:
    """All trial outcomes in trial-index order, independent of `workers`."""
    max_time = c.resolved_max_time()
    ranges = [
        (c.scenario, c.master_seed, a, min(a + chunk, c.trials), max_time)
        for a in range(0, c.trials, chunk)
    ]
    if workers <= 1:
        parts = map(_run_range, ranges)
        return [o for part in parts for o in part]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return [o for part in ex.map(_run_range, ranges) for o in part]


def estimate_from_outcomes(outcomes: list[TrialOutcome]) -> RateEstimate:
    """Ratio estimator successes / total time with a delta-method normal CI."""
    n = len(outcomes)
    k = sum(1 for o in outcomes if o.success)
    total = math.fsum(o.completion_time for o in outcomes)
    if total <= 0:
        return RateEstimate(0.0, 0.0, math.inf, n, k, total)
    if k == 0:
        # one-sided 95% bound for a Poisson count of zero
        return RateEstimate(0.0, 0.0, -math.log(0.05) / total, n, 0, total)
    rate = k / total
    if n < 2:
        return RateEstimate(rate, 0.0, math.inf, n, k, total)
    resid2 = math.fsum((float(o.success) - rate * o.completion_time) ** 2 for o in outcomes)
    mean_t = total / n
    se = math.sqrt(resid2 / (n - 1) / n) / mean_t
    return RateEstimate(rate, max(0.0, rate - Z95 * se), rate + Z95 * se, n, k, total)


def estimate_rate_with_ci(c: SimConfig, workers: int = 1) -> RateEstimate:
    return estimate_from_outcomes(run_trials(c, workers))


def write_trial_records(path, outcomes: list[TrialOutcome]) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["trial", "success", "time_s"])
        for i, o in enumerate(outcomes):
            w.writerow([i, int(o.success), format(o.completion_time, ".16e")])
