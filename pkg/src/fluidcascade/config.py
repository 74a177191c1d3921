"""Flat ``key = value`` experiment configs with typed parsing.

Lines starting with ``#`` are comments.  Lists use JSON syntax, e.g.
``shells = [3, 8]`` or ``probes = [[2, 1], [4, 1]]``.
"""
from __future__ import annotations

import json
import math

from .errors import ConfigError


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _float(text: str) -> float:
    low = text.strip().lower()
    if low in ("inf", "infinity"):
        return math.inf
    return float(text)


def _list(text: str):
    val = json.loads(text)
    if not isinstance(val, list):
        raise ValueError("expected a JSON list")
    return val


def _str(text: str) -> str:
    return text.strip()


SCHEMA = {
    # construction (units: dimensionless lattice frequencies)
    "kind": _str,  # euler | nse
    "s": _float,  # smoothness exponent
    "Q": int,  # Euler truncation index
    "c": _float,  # block half-width fraction
    "epsilon": _float,  # gap target
    "shells": _list,  # q_1 < q_2 < ...
    "unit_lower_block": _bool,
    "max_points": int,  # lattice points allowed when materializing blocks
    # analysis
    "field": _str,  # path to a field JSON
    "q_min": int,
    "q_max": int,
    "q": _list,  # explicit shell list
    "j": _list,  # explicit block list
    "r": _float,  # integrability exponent
    "l": _float,  # summation exponent
    "grid_budget": int,  # max grid points per shell quadrature
    # evolution (time units are the natural ones of the torus [0, 2pi)^n)
    "model": _str,
    "nu": _float,
    "N": int,
    "dt": _float,
    "T": _float,
    "dealias": _float,
    "probes": _list,
    "probe_shells": _list,  # shorthand for probes (2^q, 1)
    "shell_probes": _list,
    "record_every": int,
    "besov": _list,  # [[s, r], ...] distances to the initial datum
}


def parse_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = _coerce(key, value, f"line {lineno}")
    return out


def _coerce(key: str, value: str, where: str):
    if key not in SCHEMA:
        raise ConfigError(f"{where}: unknown key {key!r}")
    try:
        return SCHEMA[key](value)
    except (ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from None


def load_config(path=None, overrides=()) -> dict:
    """Read a config file (optional) and apply ``key=value`` overrides."""
    cfg = {}
    if path is not None:
        try:
            with open(path) as fh:
                cfg = parse_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, value = (part.strip() for part in item.split("=", 1))
        cfg[key] = _coerce(key, value, "override")
    return cfg


def require(cfg: dict, *keys):
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    return [cfg[k] for k in keys]


def dump(cfg: dict) -> str:
    """Canonical text form (sorted keys) used in manifests."""
    lines = []
    for key in sorted(cfg):
        val = cfg[key]
        if isinstance(val, (list, tuple)):
            text = json.dumps(val)
        elif isinstance(val, bool):
            text = "true" if val else "false"
        elif isinstance(val, float):
            text = repr(val)
        else:
            text = str(val)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"
