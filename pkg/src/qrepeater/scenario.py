"""Flat `key = value` scenario files.

Blank lines and text after `#` are ignored. Keys are unique. `mode` selects
a schema; unknown or duplicate keys, missing required keys and malformed
values are parse errors with a line:column diagnostic. Range violations
are configuration errors raised later by the engines.

Schemas (key: type, default; `!` marks required):

common       mode!: str, name: str (file stem)
grid         grid_min_km: float 50, grid_max_km: float 1500,
             grid_points: int 64, grid_spacing: log|linear
direct       grid keys, rep_rate_hz 1e10, loss_db_per_km 0.16,
             det_efficiency 1, dark_prob 1e-9, rate_threshold_hz 0.01,
             fidelity_floor 0.75
repeater_analytic
             memories!: list of tau_s:chi0, grid keys, nesting: auto|0..3,
             loss_db_per_km 0.16, det_efficiency 1, dark_prob 1e-9,
             fiber_speed_km_s 2e5, fidelity_target 0.95,
             end_mode: store_and_wait|immediate_detection,
             rate_threshold_hz 0.01, direct_baseline: none|plain|dark|both,
             rep_rate_hz 1e10, fidelity_floor 0.75
repeater_mc  distance_km!, nesting!: 0..3, memory!: tau_s:chi0, trials 10000,
             seed 0, workers 1, max_sim_time_s (auto), trial_records: bool,
             loss_db_per_km, det_efficiency, dark_prob 0, fiber_speed_km_s,
             fidelity_target, end_mode
fit          data!: path (relative to the scenario file), model: single|double,
             init_amplitude, init_tau, init_chi1, init_tau1, init_chi2, init_tau2
alpha_table  counts!: path, eta_cav 0.68, eta_t 0.55, eta_spd 0.63,
             uncertainty: poisson|binomial
decoherence  chi1!, tau1_s!, chi2!, tau2_s!, thresholds: list of float
             (default 0.5), curve_t_max_s 0.5, curve_points 101,
             temperature_k 12e-6, angles_deg: list (0, 3)
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import QRepeaterError


class ScenarioParseError(QRepeaterError):
    def __init__(self, path, line, col, msg):
        self.path, self.line, self.col, self.msg = path, line, col, msg
        super().__init__(f"{path}:{line}:{col}: {msg}")


def _float(s):
    return float(s)


def _int(s):
    v = float(s)
    if v != int(v):
        raise ValueError(f"expected an integer, got {s!r}")
    return int(v)


def _bool(s):
    low = s.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _choice(*opts):
    def conv(s):
        if s not in opts:
            raise ValueError(f"expected one of {', '.join(opts)}, got {s!r}")
        return s
    return conv


def _nesting_or_auto(s):
    return "auto" if s == "auto" else _int(s)


def _memory(s):
    tau, sep, chi = s.partition(":")
    if not sep:
        raise ValueError(f"expected tau_s:chi0, got {s!r}")
    return float(tau), float(chi)


def _list(conv):
    def parse(s):
        items = [x.strip() for x in s.split(",")]
        if any(not x for x in items):
            raise ValueError("empty list item")
        return [conv(x) for x in items]
    return parse


END_MODES = _choice("store_and_wait", "immediate_detection")

GRID = {
    "grid_min_km": (_float, 50.0),
    "grid_max_km": (_float, 1500.0),
    "grid_points": (_int, 64),
    "grid_spacing": (_choice("log", "linear"), "log"),
}

CHANNEL = {
    "loss_db_per_km": (_float, 0.16),
    "det_efficiency": (_float, 1.0),
    "fiber_speed_km_s": (_float, 2e5),
    "fidelity_target": (_float, 0.95),
    "end_mode": (END_MODES, "store_and_wait"),
}

REQUIRED = object()

SCHEMAS: dict[str, dict] = {
    "direct": {
        **GRID,
        "rep_rate_hz": (_float, 1e10),
        "loss_db_per_km": (_float, 0.16),
        "det_efficiency": (_float, 1.0),
        "dark_prob": (_float, 1e-9),
        "rate_threshold_hz": (_float, 0.01),
        "fidelity_floor": (_float, 0.75),
    },
    "repeater_analytic": {
        **GRID,
        **CHANNEL,
        "memories": (_list(_memory), REQUIRED),
        "nesting": (_nesting_or_auto, "auto"),
        "dark_prob": (_float, 1e-9),
        "rate_threshold_hz": (_float, 0.01),
        "direct_baseline": (_choice("none", "plain", "dark", "both"), "none"),
        "rep_rate_hz": (_float, 1e10),
        "fidelity_floor": (_float, 0.75),
    },
    "repeater_mc": {
        **CHANNEL,
        "distance_km": (_float, REQUIRED),
        "nesting": (_int, REQUIRED),
        "memory": (_memory, REQUIRED),
        "trials": (_int, 10_000),
        "seed": (_int, 0),
        "workers": (_int, 1),
        "max_sim_time_s": (_float, None),
        "trial_records": (_bool, False),
        "dark_prob": (_float, 0.0),
    },
    "fit": {
        "data": (str, REQUIRED),
        "model": (_choice("single", "double"), "double"),
        "init_amplitude": (_float, None),
        "init_tau": (_float, None),
        "init_chi1": (_float, None),
        "init_tau1": (_float, None),
        "init_chi2": (_float, None),
        "init_tau2": (_float, None),
    },
    "alpha_table": {
        "counts": (str, REQUIRED),
        "eta_cav": (_float, 0.68),
        "eta_t": (_float, 0.55),
        "eta_spd": (_float, 0.63),
        "uncertainty": (_choice("poisson", "binomial"), "poisson"),
    },
    "decoherence": {
        "chi1": (_float, REQUIRED),
        "tau1_s": (_float, REQUIRED),
        "chi2": (_float, REQUIRED),
        "tau2_s": (_float, REQUIRED),
        "thresholds": (_list(_float), [0.5]),
        "curve_t_max_s": (_float, 0.5),
        "curve_points": (_int, 101),
        "temperature_k": (_float, 12e-6),
        "angles_deg": (_list(_float), [0.0, 3.0]),
    },
}


@dataclass
class ScenarioFile:
    mode: str
    name: str
    params: dict = field(default_factory=dict)
    path: Path | None = None

    def __getitem__(self, key):
        return self.params[key]

    def resolve(self, rel: str) -> Path:
        """Resolve a path given relative to the scenario file."""
        p = Path(rel)
        if p.is_absolute() or self.path is None:
            return p
        return self.path.parent / p


def parse_scenario_text(text: str, path="<string>") -> ScenarioFile:
    raw: dict[str, tuple[str, int, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        key, sep, value = body.partition("=")
        if not sep:
            col = len(body) - len(body.lstrip()) + 1
            raise ScenarioParseError(path, lineno, col, "expected `key = value`")
        k = key.strip()
        kcol = body.index(k) + 1 if k else 1
        if not k or not k.replace("_", "").isalnum():
            raise ScenarioParseError(path, lineno, kcol, f"invalid key {k!r}")
        v = value.strip()
        vcol = len(key) + 2 + (len(value) - len(value.lstrip()))
        if not v:
            raise ScenarioParseError(path, lineno, vcol, f"missing value for {k!r}")
        if k in raw:
            raise ScenarioParseError(path, lineno, kcol, f"duplicate key {k!r} (first on line {raw[k][1]})")
        raw[k] = (v, lineno, vcol)

    if not raw:
        raise ScenarioParseError(path, 1, 1, "empty scenario")
    if "mode" not in raw:
        raise ScenarioParseError(path, 1, 1, "missing required key 'mode'")
    mode, mline, mcol = raw.pop("mode")
    if mode not in SCHEMAS:
        raise ScenarioParseError(path, mline, mcol, f"unknown mode {mode!r}")
    schema = SCHEMAS[mode]

    if "name" in raw:
        name = raw.pop("name")[0]
    else:
        name = Path(str(path)).stem if path != "<string>" else mode

    params = {}
    for k, (v, line, col) in raw.items():
        if k not in schema:
            raise ScenarioParseError(path, line, 1, f"unknown key {k!r} for mode {mode}")
        conv = schema[k][0]
        try:
            params[k] = conv(v)
        except ValueError as e:
            raise ScenarioParseError(path, line, col, f"bad value for {k!r}: {e}") from None
    last_line = len(text.splitlines()) + 1
    for k, (_, default) in schema.items():
        if k in params:
            continue
        if default is REQUIRED:
            raise ScenarioParseError(path, last_line, 1, f"missing required key {k!r} for mode {mode}")
        params[k] = default
    return ScenarioFile(mode, name, params, Path(path) if path != "<string>" else None)


def parse_scenario(path) -> ScenarioFile:
    path = Path(path)
    try:
        text = path.read_text()
    except UnicodeDecodeError as e:
        raise ScenarioParseError(path, 1, 1, f"not a text file: {e}") from None
    return parse_scenario_text(text, path)


SCENARIO_DIR = Path(__file__).parent / "scenarios"


def find_scenario(ref: str) -> Path:
    """A path, or the name of a shipped scenario such as `direct_baseline`."""
    p = Path(ref)
    if p.exists():
        return p
    shipped = SCENARIO_DIR / f"{ref}.scn"
    if shipped.exists():
        return shipped
    raise FileNotFoundError(ref)


def output_dir(override=None) -> Path:
    d = Path(override or os.environ.get("QREPEATER_OUTPUT_DIR", "out"))
    d.mkdir(parents=True, exist_ok=True)
    return d
