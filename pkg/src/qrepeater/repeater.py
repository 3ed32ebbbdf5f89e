"""Analytic rate engine for a multiplexed DLCZ-type repeater chain.

The chain has 2**n elementary links of length L0 = L / 2**n. Each attempt
window lasts L0/c and runs N_m modes in parallel, each heralding with
probability q0. Link times then compose level by level through the
waiting-time recursion

    T_{i+1} = E[max of two level-i links] / P_swap,i

where E[max] is 3/2 T_i (the exponential-waiting result), except at the
elementary level where the exact maximum of two geometric waits is used
unless `exact_elementary_max=False`.

Memory decay is averaged over the waiting-time distribution rather than
evaluated at the mean age: with exponential waits E[exp(-kD)] = 1/(1 + kT),
and the age transforms of the surviving memories are carried up the tree.
Evaluating at the mean age instead (`decay_average="mean_age"`) gives a
sharp rate cliff once T_n approaches tau that the exact dynamics do not show.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from .constants import FIBER_SPEED_KM_S
from .errors import ConfigurationError

MAX_NESTING = 3


class EndMode(str, enum.Enum):
    STORE_AND_WAIT = "store_and_wait"
    IMMEDIATE_DETECTION = "immediate_detection"


@dataclass(frozen=True)
class MemoryModel:
    chi0: float
    tau: float
    decay_form: str = "exponential"

    def __post_init__(self):
        if not 0 < self.chi0 <= 1:
            raise ConfigurationError(f"chi0 must lie in (0, 1], got {self.chi0}")
        if not self.tau > 0:
            raise ConfigurationError(f"tau must be positive, got {self.tau}")
        if self.decay_form != "exponential":
            raise ConfigurationError(f"unsupported decay form {self.decay_form!r}")

    def efficiency(self, age: float) -> float:
        return self.chi0 * math.exp(-age / self.tau)

    @property
    def label(self) -> str:
        if self.tau >= 0.1:
            t = f"{self.tau:g} s"
        else:
            t = f"{self.tau * 1e3:g} ms"
        return f"{t} + {self.chi0 * 100:g}%"


# (lifetime, efficiency) pairs compared in the rate figure
MEMORY_200MS_16 = MemoryModel(chi0=0.16, tau=0.2)
MEMORY_3MS_73 = MemoryModel(chi0=0.73, tau=3.2e-3)
MEMORY_220MS_76 = MemoryModel(chi0=0.76, tau=0.22)


@dataclass(frozen=True)
class LinkParams:
    """Channel and detector settings shared by every point of a rate sweep."""

    loss_coeff: float = 0.16
    det_efficiency: float = 1.0
    dark_prob: float = 1e-9
    fiber_speed: float = FIBER_SPEED_KM_S
    fidelity_target: float = 0.95
    end_mode: EndMode = EndMode.STORE_AND_WAIT
    max_nesting: int = MAX_NESTING


@dataclass(frozen=True)
class RepeaterScenario:
    distance: float
    nesting: int
    multiplex: int
    pair_prob: float
    memory: MemoryModel
    fiber_speed: float = FIBER_SPEED_KM_S
    loss_coeff: float = 0.16
    det_efficiency: float = 1.0
    dark_prob: float = 0.0
    fidelity_target: float = 0.95
    end_mode: EndMode = EndMode.STORE_AND_WAIT

    def __post_init__(self):
        if not isinstance(self.nesting, int) or not 0 <= self.nesting <= MAX_NESTING:
            raise ConfigurationError(f"nesting level must be in 0..{MAX_NESTING}")
        if self.distance <= 0:
            raise ConfigurationError("distance must be positive")
        if self.multiplex < 1:
            raise ConfigurationError("multiplex must be >= 1")
        if not 0 < self.pair_prob <= 1:
            raise ConfigurationError("pair_prob must lie in (0, 1]")
        if abs(self.multiplex * self.pair_prob - 1) > 1e-9:
            raise ConfigurationError("multiplex * pair_prob must equal 1")
        if self.fiber_speed <= 0 or self.loss_coeff < 0:
            raise ConfigurationError("bad fiber parameters")
        if not 0 < self.det_efficiency <= 1:
            raise ConfigurationError("det_efficiency must lie in (0, 1]")
        if not 0 <= self.dark_prob < 1:
            raise ConfigurationError("dark_prob must lie in [0, 1)")
        object.__setattr__(self, "end_mode", EndMode(self.end_mode))

    @classmethod
    def for_fidelity(cls, distance, nesting, memory, link: LinkParams = LinkParams()):
        Nm, p = fidelity_constrained_multiplexing(nesting, link.fidelity_target)
        return cls(
            distance=distance,
            nesting=nesting,
            multiplex=Nm,
            pair_prob=p,
            memory=memory,
            fiber_speed=link.fiber_speed,
            loss_coeff=link.loss_coeff,
            det_efficiency=link.det_efficiency,
            dark_prob=link.dark_prob,
            fidelity_target=link.fidelity_target,
            end_mode=link.end_mode,
        )

    @property
    def elementary_length(self) -> float:
        return self.distance / 2**self.nesting

    @property
    def window(self) -> float:
        """Attempt-window duration L0/c in seconds."""
        return self.elementary_length / self.fiber_speed


@dataclass
class RateResult:
    rate_hz: float
    chosen_n: int
    chosen_Nm: int
    chosen_p: float
    level_times: list[float] = field(default_factory=list)
    level_probs: list[float] = field(default_factory=list)
    dark_fidelity: float = 1.0
    zero_rate: bool = False
    distance: float = math.nan


def heralding_prob_per_mode(s: RepeaterScenario) -> float:
    """q0 = p * eta_d * T(L0).

    Heralding needs one photon from each end of the elementary link to reach
    the middle station, so the loss is that of the full link length L0.
    """
    log10_t = -s.loss_coeff * s.elementary_length / 10.0
    return s.pair_prob * s.det_efficiency * 10.0**log10_t


def elementary_link_prob(s: RepeaterScenario) -> float:
    """Probability that at least one of the N_m modes heralds in a window."""
    q0 = heralding_prob_per_mode(s)
    if q0 >= 1:
        return 1.0
    return -math.expm1(s.multiplex * math.log1p(-q0))


def swap_success(chi_eff: float, det_eff: float) -> float:
    u = chi_eff * det_eff
    return u * (1 - u / 2)


def expected_max_geometric(P: float) -> float:
    """E[max(X, Y)] for iid geometric X, Y on {1, 2, ...} with success P."""
    if P <= 0:
        return math.inf
    return (3 - 2 * P) / (P * (2 - P))


def solve_p_for_fidelity(n: int, fidelity_target: float) -> float:
    """Pair-emission probability keeping multi-photon infidelity at 1 - F.

    Errors are linear in p and double with each nesting level.
    """
    if not 0 <= n <= MAX_NESTING:
        raise ConfigurationError(f"nesting level must be in 0..{MAX_NESTING}")
    if not 0.5 < fidelity_target <= 1:
        raise ConfigurationError("fidelity target must lie in (0.5, 1)")
    p = (1 - fidelity_target) / 2 ** (n + 1)
    if p <= 0 or not 1 <= 1 / p <= 1e6:
        raise ConfigurationError(f"fidelity target {fidelity_target} gives unusable p={p}")
    return p


def fidelity_constrained_multiplexing(n: int, fidelity_target: float) -> tuple[int, float]:
    """(N_m, p) with N_m = round(1/p) and p reset to 1/N_m so that N_m p = 1."""
    p = solve_p_for_fidelity(n, fidelity_target)
    Nm = round(1 / p)
    if not 1 <= Nm <= 1_000_000:
        raise ConfigurationError(f"multiplexing number {Nm} out of range")
    return Nm, 1.0 / Nm


def _dark_fidelity(s: RepeaterScenario, level_probs) -> float:
    """Probability that every heralding click in the chain is genuine."""
    d = s.dark_prob
    if d == 0:
        return 1.0
    q0 = heralding_prob_per_mode(s)
    log_f = 2**s.nesting * (math.log(q0) - math.log(q0 + d * (1 - q0))) if q0 > 0 else -math.inf
    for i, ps in enumerate(level_probs[1:]):
        if ps > 0:
            log_f += 2 ** (s.nesting - 1 - i) * (math.log(ps) - math.log(ps + d * (1 - ps)))
    return math.exp(log_f)


def _decay_transforms(T: float, La: float, Lb: float, a: float, b: float, u0: float):
    """One swap level of the success-weighted age transforms.

    La, Lb are E[exp(-k A)] at k = a, b for the outer-memory age A of a level-i
    link at completion. The earlier of two links waits D ~ Exp(mean T) for the
    later one; the swap sees u = u0 exp(-(A_l + A_r + D) / 2 tau) and the
    surviving outer memory of the earlier link ages by D as well. Returns the
    swap success E[u - u^2/2] and the transforms of the new outer age,
    weighted by swap success.
    """
    def moment(k):
        lin = u0 * La * La * 0.5 * (1 / (1 + T * (a + k)) + 1 / (1 + T * a))
        quad = u0 * u0 * Lb * Lb * 0.5 * (1 / (1 + T * (b + k)) + 1 / (1 + T * b))
        return lin - quad / 2

    ps = moment(0.0)
    if ps <= 0:
        return 0.0, 0.0, 0.0
    return ps, La * moment(a) / ps, Lb * moment(b) / ps


def analytic_rate(s: RepeaterScenario, exact_elementary_max: bool = True,
                  decay_average: str = "laplace") -> RateResult:
    """Rate of one end-to-end pair for a fixed nesting level and multiplexing.

    decay_average selects how memory decay enters the swap and end factors:
    "laplace" averages exp(-age/tau) over exponentially distributed waits,
    tracking the age transforms level by level; "mean_age" evaluates the
    decay at the mean age T_i/2 and charges exp(-T_n/tau) at the ends.
    """
    if decay_average not in ("laplace", "mean_age"):
        raise ConfigurationError(f"unknown decay average {decay_average!r}")
    n = s.nesting
    mem = s.memory
    W = s.window
    u0 = mem.chi0 * s.det_efficiency
    a, b = 0.5 / mem.tau, 1.0 / mem.tau
    P0 = elementary_link_prob(s)
    times = [W / P0 if P0 > 0 else math.inf]
    probs = [P0]
    # the stored excitation is born at the start of the heralding window
    La, Lb = math.exp(-a * W), math.exp(-b * W)
    for i in range(n):
        T = times[-1]
        if not math.isfinite(T):
            probs.append(0.0)
            times.append(math.inf)
            continue
        if i == 0 and exact_elementary_max:
            wait = W * expected_max_geometric(P0)
        else:
            wait = 1.5 * T
        if decay_average == "laplace":
            ps, La, Lb = _decay_transforms(T, La, Lb, a, b, u0)
        else:
            ps = swap_success(mem.efficiency(T / 2), s.det_efficiency)
        probs.append(ps)
        times.append(float(wait) / float(ps) if ps > 0 else math.inf)

    Tn = times[-1]
    result = RateResult(
        rate_hz=0.0,
        chosen_n=n,
        chosen_Nm=s.multiplex,
        chosen_p=s.pair_prob,
        level_times=times,
        level_probs=probs,
        distance=s.distance,
    )
    if not math.isfinite(Tn) or Tn <= 0:
        result.zero_rate = True
        return result
    # log space: the end decay factor can underflow long before T_n overflows
    log_rate = 2 * math.log(u0) - math.log(Tn)
    if s.end_mode is EndMode.STORE_AND_WAIT:
        if decay_average == "laplace":
            log_rate += 2 * math.log(Lb) if Lb > 0 else -math.inf
        else:
            log_rate -= Tn / mem.tau
    result.rate_hz = math.exp(log_rate) if log_rate > -math.inf else 0.0
    result.zero_rate = result.rate_hz == 0.0
    result.dark_fidelity = _dark_fidelity(s, probs)
    return result


def optimize_scenario(L: float, memory: MemoryModel, link: LinkParams = LinkParams()) -> RateResult:
    """Best rate over nesting levels 0..max_nesting; ties go to the smaller level."""
    if L <= 0:
        raise ConfigurationError("distance must be positive")
    best = None
    for n in range(min(link.max_nesting, MAX_NESTING) + 1):
        r = analytic_rate(RepeaterScenario.for_fidelity(L, n, memory, link))
        if best is None or r.rate_hz > best.rate_hz:
            best = r
    return best


def dark_count_sensitivity(s: RepeaterScenario) -> float:
    """Largest relative change in rate or fidelity when dark counts are switched on."""
    if s.dark_prob == 0:
        return 0.0
    on = analytic_rate(s)
    off = analytic_rate(replace(s, dark_prob=0.0))
    d_rate = 0.0 if off.rate_hz == 0 else abs(on.rate_hz - off.rate_hz) / off.rate_hz
    d_fid = abs(on.dark_fidelity - off.dark_fidelity) / off.dark_fidelity
    return max(d_rate, d_fid)


def max_distance(memory: MemoryModel, threshold: float = 0.01, link: LinkParams = LinkParams(),
                 lo: float = 1.0, hi: float = 3000.0, tol: float = 1e-6) -> float:
    """Largest distance at which the optimized rate still reaches `threshold`.

    Optimized rate is non-increasing in L, so bisection applies.
    """
    f = lambda L: optimize_scenario(L, memory, link).rate_hz - threshold
    if f(lo) < 0:
        return 0.0
    if f(hi) >= 0:
        return math.inf
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
