"""Experiment reports: per-run records plus recomputable aggregates.

Aggregates (mean/median/min/max per metric) are recomputed and checked
whenever a report is loaded, so a report file cannot silently disagree
with its own records. Every record carries the seed that reproduces it.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .io import read_json, write_json
from .rng import RNG_NAME

_AGG_KEYS = ("recovery_rate", "abs_error", "rel_error")


@dataclass
class ExperimentReport:
    method: str
    parameters: dict
    records: list
    aggregates: dict = field(default_factory=dict)
    bound_fields: dict | None = None
    error: str | None = None
    toolkit_version: str = __version__
    rng_name: str = RNG_NAME


def compute_aggregates(records):
    out = {}
    for key in _AGG_KEYS:
        vals = [r[key] for r in records if r.get(key) is not None]
        if not vals:
            continue
        arr = np.asarray(vals, dtype=np.float64)
        out[key] = {
            "mean": float(arr.mean()),
            "median": float(np.median(arr)),
            "min": float(arr.min()),
            "max": float(arr.max()),
        }
    return out


def finalize_report(report):
    report.aggregates = compute_aggregates(report.records)
    return report


def write_report(path, report):
    finalize_report(report)
    write_json(path, asdict(report))


def load_report(path):
    """Load a report and verify its aggregates against its records."""
    data = read_json(path)
    expected = compute_aggregates(data.get("records", []))
    got = data.get("aggregates", {})
    for key, stats in expected.items():
        for stat, value in stats.items():
            if abs(got.get(key, {}).get(stat, float("nan")) - value) > 1e-12 * max(
                1.0, abs(value)
            ):
                raise ValueError(f"report {path}: aggregate {key}.{stat} does not match records")
    return data


def strip_timing(obj):
    """Copy of a JSON-like object with timing fields removed.

    Used when comparing reports for determinism: wall-clock values are the
    only fields allowed to differ between identical runs.
    """
    if isinstance(obj, dict):
        return {
            k: strip_timing(v)
            for k, v in obj.items()
            if "second" not in k and k not in ("timing", "timings", "wall", "time_s")
        }
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj
