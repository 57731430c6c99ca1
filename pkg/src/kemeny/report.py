"""Run reports and their JSON form.

Floats are written with ``repr``, the shortest text that reads back to the
same double.  Non-finite floats are written as the strings ``"inf"``,
``"-inf"`` and ``"nan"`` so the output stays strict JSON; :meth:`RunReport.from_json`
turns them back into floats.
"""
import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

_NONFINITE = {"inf": math.inf, "-inf": -math.inf, "nan": math.nan}


def to_plain(value):
    """Recursively convert numpy values and non-finite floats for JSON."""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def _restore(value):
    if isinstance(value, dict):
        return {k: _restore(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_restore(v) for v in value]
    if isinstance(value, str) and value in _NONFINITE:
        return _NONFINITE[value]
    return value


def verdict(value, threshold, relation="<="):
    """A pass/fail record: ``value <= threshold`` (or ``>=``, ``>``)."""
    checks = {"<=": value <= threshold, ">=": value >= threshold, ">": value > threshold}
    return {"value": value, "threshold": threshold, "pass": bool(checks[relation])}


@dataclass
class RunReport:
    model_kind: str
    input_digest: str
    parameters: dict
    results: dict
    mc: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    timestamp: str | None = None

    @property
    def passed(self):
        return all(v["pass"] for v in self.verdicts.values())

    def as_dict(self):
        out = {
            "model_kind": self.model_kind,
            "input_digest": self.input_digest,
            "parameters": self.parameters,
            "results": self.results,
            "mc": self.mc,
            "verdicts": self.verdicts,
        }
        if self.timestamp is not None:
            out["timestamp"] = self.timestamp
        return to_plain(out)

    def to_json(self, compact=False):
        if compact:
            return json.dumps(self.as_dict(), separators=(",", ":"), allow_nan=False)
        return json.dumps(self.as_dict(), indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text):
        doc = _restore(json.loads(text))
        return cls(
            doc["model_kind"],
            doc["input_digest"],
            doc["parameters"],
            doc["results"],
            doc.get("mc", []),
            doc.get("verdicts", {}),
            doc.get("timestamp"),
        )


def write_profile_csv(path, xs, ks, x_name="x"):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([x_name, "K"])
        for x, k in zip(xs, ks):
            writer.writerow([repr(float(x)) if not isinstance(x, str) else x, repr(float(k))])
