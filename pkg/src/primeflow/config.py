"""Flat typed key=value run configuration with strict unknown-key handling."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError, ValidationError

_ENV_OVERRIDES = {
    # budget caps only; everything else must come from the config document
    "PRIMEFLOW_MAX_HORIZON": "max_horizon",
    "PRIMEFLOW_STEP_BUDGET": "step_budget",
    "PRIMEFLOW_K_BUDGET": "k_budget",
    "PRIMEFLOW_SEARCH_CEILING": "search_ceiling",
}


@dataclass
class RunConfig:
    # irrational construction
    c0: float = 1.0
    delta: float = 0.5
    bits: str = "00000"
    levels: int = 5
    d: float = 0.3
    # roof
    roof: str = "default"  # "default" | path to a roof json file
    harmonics: int = 32
    roof_amplitude: float = 0.12
    roof_decay: float = 0.55
    # grids and ranges
    x_grid: int = 64
    base_starts: int = 5
    height_starts: int = 3
    kmax: int = 200
    sum_levels: str = "2..5"
    equi_levels: str = "2..5"
    # budgets
    max_horizon: int = 10**7
    step_budget: int = 10**8
    k_budget: int = 1000
    search_ceiling: int = 10**9
    # tolerances
    flow_tol: float = 1e-9
    boundary_tol: float = 1e-9
    # output
    out_dir: str = "out"
    emit_plots: bool = True
    check_only: bool = False
    workers: int = 1


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_bool(raw: str) -> bool:
    if raw in ("true", "True", "1", "yes"):
        return True
    if raw in ("false", "False", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _coerce(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    try:
        if kind == "int":
            return int(float(raw)) if ("e" in raw or "." in raw) else int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            return _parse_bool(raw)
        return raw
    except ValueError as exc:
        raise ValueError(str(exc))


def _dl_distance(a: str, b: str, cap: int = 3) -> int:
    """Damerau-Levenshtein distance (with transpositions), small-string DP."""
    if abs(len(a) - len(b)) > cap:
        return cap + 1
    prev2: list[int] = []
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i] + [0] * len(b)
        for j, cb in enumerate(b, 1):
            cost = 0 if ca == cb else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            if i > 1 and j > 1 and ca == b[j - 2] and a[i - 2] == cb:
                cur[j] = min(cur[j], prev2[j - 2] + 1)
        prev2, prev = prev, cur
    return prev[len(b)]


def _suggest(name: str) -> str | None:
    best = [known for known in _FIELD_TYPES if _dl_distance(name, known) == 1]
    return best[0] if best else None


def parse_range(text: str, field: str = "levels") -> tuple[int, int]:
    """'2..5' -> (2, 5)."""
    parts = text.split("..")
    if len(parts) != 2:
        raise ValidationError(field, f"expected 'lo..hi', got {text!r}")
    try:
        lo, hi = int(parts[0]), int(parts[1])
    except ValueError:
        raise ValidationError(field, f"range endpoints must be integers: {text!r}")
    if lo > hi:
        raise ValidationError(field, f"empty range {text!r}")
    return lo, hi


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.c0 <= 0:
        raise ValidationError("c0", "must be positive")
    if cfg.delta <= 0:
        raise ValidationError("delta", "must be positive")
    if not 0 < cfg.d < cfg.delta:
        raise ValidationError("d", f"must satisfy 0 < d < delta (= {cfg.delta})")
    if cfg.levels < 1:
        raise ValidationError("levels", "must be >= 1")
    if len(cfg.bits) < cfg.levels:
        raise ValidationError("bits", "must supply at least `levels` bits")
    if any(b not in "01" for b in cfg.bits):
        raise ValidationError("bits", "must be a string of 0s and 1s")
    for name in ("max_horizon", "step_budget", "k_budget", "search_ceiling",
                 "x_grid", "base_starts", "height_starts", "kmax", "harmonics",
                 "workers", "levels"):
        if getattr(cfg, name) < 1:
            raise ValidationError(name, "must be positive")
    for name in ("flow_tol", "boundary_tol", "roof_amplitude", "roof_decay"):
        if getattr(cfg, name) <= 0:
            raise ValidationError(name, "must be positive")
    parse_range(cfg.sum_levels, "sum_levels")
    parse_range(cfg.equi_levels, "equi_levels")
    if cfg.roof != "default" and not Path(cfg.roof).exists():
        raise ValidationError("roof", f"file not found: {cfg.roof}")
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse a flat key = value document; unknown keys are hard errors."""
    values: dict = {}
    for lineno, raw_line in enumerate(text.splitlines(), 1):
        line = raw_line.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", lineno, len(line))
        key_part, value_part = line.split("=", 1)
        key = key_part.strip()
        value = value_part.strip()
        if not key:
            raise ConfigError("missing key before '='", lineno, 1)
        if key not in _FIELD_TYPES:
            hint = _suggest(key)
            msg = f"unknown key {key!r}"
            if hint:
                msg += f" (did you mean {hint!r}?)"
            raise ConfigError(msg, lineno, raw_line.index(key) + 1)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno, raw_line.index(key) + 1)
        if not value:
            raise ConfigError(f"missing value for {key!r}", lineno, len(raw_line) + 1)
        try:
            values[key] = _coerce(key, value)
        except ValueError:
            raise ConfigError(
                f"cannot parse value {value!r} for {key!r} as {_FIELD_TYPES[key]}",
                lineno,
                raw_line.index("=") + 2,
            )
    return validate(RunConfig(**values))


def serialize_config(cfg: RunConfig) -> str:
    lines = []
    for f in fields(RunConfig):
        v = getattr(cfg, f.name)
        if isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def load_config(path: str | Path | None, env: dict | None = None) -> RunConfig:
    """Load a config file (or defaults), then apply budget-cap env overrides."""
    if path is None:
        cfg = RunConfig()
    else:
        cfg = parse_config(Path(path).read_text())
    env = os.environ if env is None else env
    for var, field_name in _ENV_OVERRIDES.items():
        if var in env:
            try:
                setattr(cfg, field_name, int(float(env[var])))
            except ValueError:
                raise ValidationError(field_name, f"bad env override {var}={env[var]!r}")
    return validate(cfg)
