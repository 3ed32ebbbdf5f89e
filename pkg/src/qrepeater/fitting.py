"""Weighted least-squares fits of single- and double-exponential decays.

Levenberg-Marquardt with Marquardt scaling. The damping starts at 1e-3 and
is multiplied by 10 on a rejected step, divided by 10 on an accepted one.
Parameter uncertainties come from (J^T W J)^-1 scaled by the reduced
chi-square.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .decoherence import RetrievalDecayModel, SingleExpModel
from .errors import DegenerateDataError


@dataclass(frozen=True)
class DecaySample:
    t: float
    value: float
    sigma: float = 1.0

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("sample time must be non-negative")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


@dataclass
class FitResult:
    params: np.ndarray
    covariance: np.ndarray
    chi_square: float
    iterations: int
    converged: bool
    unidentifiable: bool = False
    chi_square_history: list[float] = field(default_factory=list)
    dof: int = 0

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0, None))

    @property
    def reduced_chi_square(self) -> float:
        return self.chi_square / self.dof if self.dof > 0 else math.nan


# model functions and analytic Jacobians, parameters as flat arrays

def single_exp(params, t):
    A, tau = params
    return A * np.exp(-t / tau)


def single_exp_jac(params, t):
    A, tau = params
    e = np.exp(-t / tau)
    return np.column_stack([e, A * t * e / tau**2])


def double_exp(params, t):
    c1, t1, c2, t2 = params
    return c1 * np.exp(-t / t1) + c2 * np.exp(-t / t2)


def double_exp_jac(params, t):
    c1, t1, c2, t2 = params
    e1 = np.exp(-t / t1)
    e2 = np.exp(-t / t2)
    return np.column_stack([e1, c1 * t * e1 / t1**2, e2, c2 * t * e2 / t2**2])


MODELS = {
    "single": (single_exp, single_exp_jac),
    "double": (double_exp, double_exp_jac),
}


def _arrays(data):
    if len(data) == 0:
        raise DegenerateDataError("no samples")
    t = np.array([d.t for d in data], dtype=float)
    y = np.array([d.value for d in data], dtype=float)
    s = np.array([d.sigma for d in data], dtype=float)
    return t, y, s


def _positive_times(p, kind):
    idx = (1,) if kind == "single" else (1, 3)
    return all(p[i] > 0 for i in idx)


def levenberg_marquardt(kind, t, y, sigma, p0, max_iter=500, xtol=1e-8, lam0=1e-3):
    f, jac = MODELS[kind]
    w = 1.0 / sigma
    p = np.asarray(p0, dtype=float).copy()

    def chi2(q):
        r = (y - f(q, t)) * w
        return float(r @ r)

    cost = chi2(p)
    history = [cost]
    lam = lam0
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        J = jac(p, t) * w[:, None]
        r = (y - f(p, t)) * w
        A = J.T @ J
        g = J.T @ r
        d = np.diag(A).copy()
        floor = 1e-12 * max(d.max(), 1e-300)
        d[d < floor] = floor
        try:
            step = np.linalg.solve(A + lam * np.diag(d), g)
        except np.linalg.LinAlgError:
            raise DegenerateDataError("singular normal equations") from None
        if not np.all(np.isfinite(step)):
            raise DegenerateDataError("non-finite step")
        small = np.all(np.abs(step) <= xtol * (np.abs(p) + xtol))
        trial = p + step
        new_cost = chi2(trial) if _positive_times(trial, kind) else math.inf
        if new_cost <= cost:
            p, cost = trial, new_cost
            history.append(cost)
            lam = max(lam / 10, 1e-15)
        else:
            lam *= 10
            if lam > 1e16:
                # no downhill direction left at machine precision
                converged = True
                break
        if small:
            converged = True
            break
    return p, cost, it, converged, history


def _covariance(kind, p, t, sigma, cost, dof):
    _, jac = MODELS[kind]
    J = jac(p, t) / sigma[:, None]
    A = J.T @ J
    singular = np.linalg.cond(A) > 1e14
    cov = np.linalg.pinv(A) if singular else np.linalg.inv(A)
    if dof > 0:
        cov = cov * (cost / dof)
    return 0.5 * (cov + cov.T), singular


def fit_single_exp(data, init: SingleExpModel | None = None, max_iter: int = 500) -> FitResult:
    """Fit A exp(-t/tau); params are [A, tau]."""
    t, y, s = _arrays(data)
    if len(np.unique(t)) < 3:
        raise DegenerateDataError("need at least 3 distinct sample times")
    p0 = [init.amplitude, init.tau] if init is not None else _loglinear_seed(t, y)
    p, cost, it, conv, hist = levenberg_marquardt("single", t, y, s, p0, max_iter)
    dof = len(t) - 2
    cov, singular = _covariance("single", p, t, s, cost, dof)
    if singular:
        raise DegenerateDataError("parameters not determined by the data")
    return FitResult(p, cov, cost, it, conv, False, hist, dof)


def _loglinear_seed(t, y):
    mask = y > 0
    if mask.sum() < 2 or np.ptp(t[mask]) == 0:
        return [float(np.max(y)) or 1.0, float(np.ptp(t)) or 1.0]
    slope, icpt = np.polyfit(t[mask], np.log(y[mask]), 1)
    tau = -1 / slope if slope < 0 else float(np.ptp(t))
    return [math.exp(icpt), tau]


def seed_double_exp(t, y) -> list[float]:
    """Tail third seeds (chi2, tau2); the head residual seeds (chi1, tau1)."""
    order = np.argsort(t)
    t, y = t[order], y[order]
    n = len(t)
    tail = slice(n - max(n // 3, 2), n)
    c2, t2 = _loglinear_seed(t[tail], y[tail])
    head = slice(0, max(n // 3, 2))
    resid = y[head] - c2 * np.exp(-t[head] / t2)
    c1, t1 = _loglinear_seed(t[head], resid)
    if not t1 < t2:
        t1 = t2 / 100
    c1 = max(c1, 1e-6)
    return [c1, t1, c2, t2]


def fit_double_exp(data, init: RetrievalDecayModel | None = None, max_iter: int = 500) -> FitResult:
    """Fit chi1 exp(-t/tau1) + chi2 exp(-t/tau2); params are [chi1, tau1, chi2, tau2].

    Components are reordered after convergence so that tau1 <= tau2. The
    result is flagged unidentifiable when the two decay times nearly coincide
    or the normal matrix is singular at the optimum.
    """
    t, y, s = _arrays(data)
    if len(np.unique(t)) < 5:
        raise DegenerateDataError("need at least 5 distinct sample times")
    tp = t[t > 0]
    if len(tp) == 0 or tp.max() / tp.min() < 100:
        raise DegenerateDataError("samples must span at least two decades of t")
    if init is not None:
        p0 = [init.chi1, init.tau1, init.chi2, init.tau2]
    else:
        p0 = seed_double_exp(t, y)
    p, cost, it, conv, hist = levenberg_marquardt("double", t, y, s, p0, max_iter)
    if p[1] > p[3]:
        p = p[[2, 3, 0, 1]]
    dof = len(t) - 4
    cov, singular = _covariance("double", p, t, s, cost, dof)
    unident = singular or p[1] / p[3] > 0.99
    return FitResult(p, cov, cost, it, conv, unident, hist, dof)


def jacobian_check(model_kind: str, params, t_points, rel_step: float = 1e-6) -> float:
    """Max column-relative gap between analytic and central-difference Jacobians."""
    t = np.asarray(t_points, dtype=float)
    if t.size == 0:
        return 0.0
    f, jac = MODELS[model_kind]
    p = np.asarray(params, dtype=float)
    Ja = jac(p, t)
    worst = 0.0
    for k in range(len(p)):
        h = rel_step * max(abs(p[k]), 1e-12)
        up, dn = p.copy(), p.copy()
        up[k] += h
        dn[k] -= h
        col_fd = (f(up, t) - f(dn, t)) / (up[k] - dn[k])
        scale = np.max(np.abs(Ja[:, k]))
        if scale == 0:
            err = float(np.max(np.abs(col_fd)))
        else:
            err = float(np.max(np.abs(col_fd - Ja[:, k])) / scale)
        worst = max(worst, err)
    return worst


def read_decay_csv(path) -> list[DecaySample]:
    """Read `t_s,value,sigma` rows; an empty sigma field means 1."""
    out = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["t_s", "value", "sigma"]:
            raise ValueError(f"{path}: expected header t_s,value,sigma")
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not x.strip() for x in rec):
                continue
            if len(rec) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 fields")
            try:
                sig = float(rec[2]) if rec[2].strip() else 1.0
                out.append(DecaySample(float(rec[0]), float(rec[1]), sig))
            except ValueError as e:
                raise ValueError(f"{path}:{lineno}: {e}") from None
    return out


PARAM_NAMES = {"single": ("amplitude", "tau"), "double": ("chi1", "tau1", "chi2", "tau2")}


def format_report(kind: str, res: FitResult) -> str:
    """Fit report as `key = value` lines."""
    lines = [f"model = {kind}"]
    for name, v, e in zip(PARAM_NAMES[kind], res.params, res.stderr):
        lines.append(f"{name} = {v:.10e}")
        lines.append(f"{name}_err = {e:.10e}")
    lines += [
        f"chi_square = {res.chi_square:.10e}",
        f"dof = {res.dof}",
        f"iterations = {res.iterations}",
        f"converged = {str(res.converged).lower()}",
    ]
    if kind == "double":
        lines.append(f"unidentifiable = {str(res.unidentifiable).lower()}")
    return "\n".join(lines) + "\n"
