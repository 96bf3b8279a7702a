"""Structured, deterministic run reports and seed derivation."""
from __future__ import annotations

import hashlib
import json
import os
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__

SCHEMA_VERSION = 1
BUDGET_ENV = "SSEXPAND_BUDGETS"
DEFAULT_BUDGETS = {
    "enum_budget": 50_000_000,  # Pauli words visited by exhaustive enumerations
    "exact_budget": 20_000_000,  # set-vertex visits in exact expansion
    "weight_cap": 8,
    "dense_cap": 4096,
}


class BudgetError(ValueError):
    pass


def budgets(overrides: dict | None = None) -> dict:
    """Defaults, then ``SSEXPAND_BUDGETS`` (JSON object or ``key=value,...``), then explicit overrides."""
    out = dict(DEFAULT_BUDGETS)
    raw = os.environ.get(BUDGET_ENV, "").strip()
    if raw:
        try:
            env = json.loads(raw) if raw.startswith("{") else dict(kv.split("=", 1) for kv in raw.split(","))
            for key, val in env.items():
                if key not in DEFAULT_BUDGETS:
                    raise BudgetError(f"{BUDGET_ENV}: unknown budget {key!r}")
                out[key] = int(val)
        except (ValueError, json.JSONDecodeError) as exc:
            if isinstance(exc, BudgetError):
                raise
            raise BudgetError(f"{BUDGET_ENV}: cannot parse {raw!r} ({exc})") from exc
    for key, val in (overrides or {}).items():
        if val is not None:
            out[key] = int(val)
    return out


def derive_seed(master: int, label: str) -> int:
    """Stable per-subtask seed from (master seed, label)."""
    tag = int.from_bytes(hashlib.sha256(label.encode()).digest()[:8], "little")
    return int(np.random.SeedSequence(int(master), spawn_key=(tag,)).generate_state(1, dtype=np.uint64)[0])


def jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if hasattr(obj, "as_dict"):
        return jsonable(obj.as_dict())
    return obj


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(jsonable(config), sort_keys=True).encode()).hexdigest()


def build_report(command: str, config: dict, result, assertions: dict, seed: int | None = None,
                 timing: dict | None = None) -> dict:
    """Assertions map name -> True/False/None (None = not applicable, reported as 'skipped')."""
    status = {k: ("skipped" if v is None else ("pass" if v else "fail")) for k, v in assertions.items()}
    failures = sorted(k for k, v in status.items() if v == "fail")
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": "ssexpand",
        "version": __version__,
        "command": command,
        "config": jsonable(config),
        "config_hash": config_hash(config),
        "seed": seed,
        "timing": timing if timing is not None else {"recorded": False, "wall_clock_s": None},
        "result": jsonable(result),
        "assertions": status,
        "failures": failures,
        "ok": not failures,
    }


def report_text(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def write_report(report: dict, path: str | Path) -> None:
    Path(path).write_text(report_text(report))
