"""JSON model files.

Chain files::

    {"kind": "dtmc", "P": [[...], ...], "labels": [...]}     # labels optional
    {"kind": "ctmc", "Q": [[...], ...], "labels": [...]}

Diffusion files::

    {"kind": "diffusion", "drift": "1/x", "sigma": "1",
     "interval": {"left": 0, "right": 1},          # numbers, "-inf" or "inf"
     "left_boundary": "entrance", "right_boundary": "reflecting",
     "anchor": 0.5}                                # anchor optional
"""
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .chain import validate_stochastic
from .ctmc import validate_generator
from .diffusion import make_spec
from .errors import MalformedJson, SchemaError

_CHAIN_KEYS = {"dtmc": "P", "ctmc": "Q"}


@dataclass(frozen=True)
class LoadedModel:
    kind: str
    model: object
    digest: str
    labels: list | None = None


def read_json(path):
    """Parse a JSON file, returning ``(document, sha256 hex digest)``."""
    raw = Path(path).read_bytes()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedJson(exc.msg, exc.lineno) from None
    except UnicodeDecodeError:
        raise MalformedJson("file is not UTF-8 text", 1) from None
    if not isinstance(doc, dict):
        raise SchemaError("top level must be a JSON object")
    return doc, hashlib.sha256(raw).hexdigest()


def _check_keys(doc, required, optional=()):
    missing = [k for k in required if k not in doc]
    if missing:
        raise SchemaError(f"missing field(s): {', '.join(missing)}")
    extra = sorted(set(doc) - set(required) - set(optional))
    if extra:
        raise SchemaError(f"unexpected field(s): {', '.join(extra)}")


def _matrix(value, name):
    if not isinstance(value, list) or not all(isinstance(r, list) for r in value):
        raise SchemaError(f"{name} must be a list of rows")
    for row in value:
        for v in row:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise SchemaError(f"{name} entries must be numbers, got {v!r}")
    n = len(value)
    if n < 2:
        raise SchemaError(f"{name} must have at least 2 states, got {n}")
    if any(len(r) != n for r in value):
        raise SchemaError(f"{name} must be square ({n} rows)")
    return value


def _labels(doc, n):
    labels = doc.get("labels")
    if labels is None:
        return None
    if not isinstance(labels, list) or len(labels) != n or not all(isinstance(s, str) for s in labels):
        raise SchemaError(f"labels must be a list of {n} strings")
    return labels


def chain_from_doc(doc):
    kind = doc.get("kind")
    if kind not in _CHAIN_KEYS:
        raise SchemaError(f"kind must be 'dtmc' or 'ctmc', got {kind!r}")
    key = _CHAIN_KEYS[kind]
    _check_keys(doc, ["kind", key], ["labels"])
    rows = _matrix(doc[key], key)
    model = validate_stochastic(rows) if kind == "dtmc" else validate_generator(rows)
    return model, _labels(doc, len(rows))


def load_chain_spec(path):
    """Load and validate a ``dtmc`` or ``ctmc`` file."""
    doc, _ = read_json(path)
    return chain_from_doc(doc)[0]


def _endpoint(value, name):
    if isinstance(value, str):
        if value in ("-inf", "inf", "+inf"):
            return float(value)
        raise SchemaError(f"{name} must be a number, '-inf' or 'inf', got {value!r}")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{name} must be a number, '-inf' or 'inf', got {value!r}")
    return float(value)


def diffusion_from_doc(doc):
    if doc.get("kind") != "diffusion":
        raise SchemaError(f"kind must be 'diffusion', got {doc.get('kind')!r}")
    _check_keys(
        doc,
        ["kind", "drift", "sigma", "interval", "left_boundary", "right_boundary"],
        ["anchor"],
    )
    for key in ("drift", "sigma", "left_boundary", "right_boundary"):
        if not isinstance(doc[key], str):
            raise SchemaError(f"{key} must be a string")
    interval = doc["interval"]
    if not isinstance(interval, dict):
        raise SchemaError("interval must be an object with left and right")
    _check_keys(interval, ["left", "right"])
    left = _endpoint(interval["left"], "interval.left")
    right = _endpoint(interval["right"], "interval.right")
    anchor = doc.get("anchor")
    if anchor is not None:
        anchor = _endpoint(anchor, "anchor")
        if not math.isfinite(anchor):
            raise SchemaError("anchor must be finite")
    return make_spec(doc["drift"], doc["sigma"], left, right,
                     doc["left_boundary"], doc["right_boundary"], anchor)


def load_diffusion_spec(path):
    """Load a diffusion file; expressions are parsed and probe-evaluated."""
    doc, _ = read_json(path)
    return diffusion_from_doc(doc)


def load_model(path):
    """Load any supported model file, dispatching on ``kind``."""
    doc, digest = read_json(path)
    kind = doc.get("kind")
    if kind in _CHAIN_KEYS:
        model, labels = chain_from_doc(doc)
        return LoadedModel(kind, model, digest, labels)
    if kind == "diffusion":
        return LoadedModel(kind, diffusion_from_doc(doc), digest)
    raise SchemaError(f"unknown kind {kind!r}")
