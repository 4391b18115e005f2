"""Config hashing and on-disk artifacts shared by the sampler, oracles and CLI."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from . import __version__


class StaleArtifactError(RuntimeError):
    """An artifact was produced for a different configuration."""


def _canonical(obj):
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _canonical(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return repr(v)
        return int(v) if v.is_integer() and abs(v) < 2**53 else v  # 1 and 1.0 hash alike
    return obj


def config_hash(config):
    """Short SHA-256 of the canonical JSON form of ``config``."""
    text = json.dumps(_canonical(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def to_jsonable(obj):
    """Recursively convert numpy values and non-finite floats for ``json.dump``."""
    return _canonical(obj)


def write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def write_artifact(path, config, body):
    """JSON file carrying the config, its hash and the package version."""
    return write_json(path, {"config": config, "config_hash": config_hash(config), "version": __version__, **body})


def read_artifact(path, config=None):
    """Load an artifact, refusing it when its hash does not match ``config``."""
    data = read_json(path)
    stored = data.get("config_hash")
    if stored != config_hash(data.get("config", {})):
        raise StaleArtifactError(f"{path}: stored hash does not match the stored config")
    if config is not None and stored != config_hash(config):
        raise StaleArtifactError(f"{path}: built for config {stored}, expected {config_hash(config)}; regenerate it")
    return data
