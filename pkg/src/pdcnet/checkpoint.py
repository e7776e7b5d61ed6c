"""Versioned JSON envelope for model parameters (neural and logistic-regression)."""

from __future__ import annotations

import base64
import hashlib
import json
from pathlib import Path

import numpy as np

FORMAT = "pdcnet-checkpoint"
SCHEMA_VERSION = 1


class CheckpointError(ValueError):
    pass


class ChecksumError(CheckpointError):
    pass


class VersionError(CheckpointError):
    pass


def encode_array(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a, dtype="<f8")
    return {"shape": list(a.shape), "data": base64.b64encode(a.tobytes()).decode("ascii")}


def decode_array(d: dict) -> np.ndarray:
    raw = base64.b64decode(d["data"])
    return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(d["shape"])


def _digest(body: dict) -> str:
    canon = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canon.encode("utf-8")).hexdigest()


def dumps(kind: str, config: dict, params: dict[str, np.ndarray], seed: int | None = None,
          history: list | None = None, extra: dict | None = None) -> str:
    body = {
        "format": FORMAT,
        "version": SCHEMA_VERSION,
        "kind": kind,
        "config": config,
        "seed": seed,
        "history": history or [],
        "extra": extra or {},
        "params": {name: encode_array(arr) for name, arr in sorted(params.items())},
    }
    body["checksum"] = _digest(body)
    return json.dumps(body, sort_keys=True, indent=1)


def loads(text: str, kind: str | None = None) -> dict:
    """Parse and verify an envelope; ``params`` in the result are decoded arrays."""
    try:
        body = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChecksumError(f"corrupted checkpoint (unreadable payload: {exc})") from None
    if not isinstance(body, dict) or body.get("format") != FORMAT:
        raise CheckpointError("not a pdcnet checkpoint")
    if body.get("version") != SCHEMA_VERSION:
        raise VersionError(f"checkpoint schema version {body.get('version')!r}; this reader supports {SCHEMA_VERSION}")
    stored = body.pop("checksum", None)
    if stored != _digest(body):
        raise ChecksumError("checkpoint checksum mismatch")
    if kind is not None and body.get("kind") != kind:
        raise CheckpointError(f"expected a {kind!r} checkpoint, found {body.get('kind')!r}")
    body["params"] = {name: decode_array(d) for name, d in body["params"].items()}
    return body


def save(path, *args, **kwargs) -> None:
    Path(path).write_text(dumps(*args, **kwargs), encoding="utf-8")


def load(path, kind: str | None = None) -> dict:
    return loads(Path(path).read_text(encoding="utf-8"), kind)
