"""Transformation operators learned by similarity matching, plus fixed motion detectors.

Configs are plain dicts in the same schema as the JSON files under configs/.
"""

import json as _json

from . import _core
from ._core import (
    InsufficientData,
    InvalidArgument,
    IoError,
    NumericalFailure,
    OutOfRange,
    cartoon_matrix,
    feature,
    fit_zca,
    kmeans,
    pca,
    respond,
    rotate_demo,
    rotation_generator,
    summed_output,
    velocity_estimate,
)

__all__ = [
    "InsufficientData", "InvalidArgument", "IoError", "NumericalFailure", "OutOfRange",
    "baselines", "cartoon_matrix", "config", "config_hash", "equivalence", "feature", "fit_zca",
    "generate", "kmeans", "load_config", "pca", "report", "respond", "rotate_demo",
    "rotation_generator", "summed_output", "sweep", "train", "velocity_estimate",
]


def _dump(cfg):
    return _json.dumps(cfg if cfg is not None else {})


def config(cfg=None, overrides=()):
    """Full config with defaults filled in; overrides are "a.b=value" strings."""
    doc = _json.loads(_core.normalize_config(_dump(cfg)))
    if overrides:
        doc = _json.loads(_core.apply_overrides(_json.dumps(doc), list(overrides)))
    return _json.loads(_core.normalize_config(_json.dumps(doc)))


def load_config(path, overrides=()):
    with open(path) as f:
        return config(_json.load(f), overrides)


def config_hash(cfg):
    return _core.config_hash(_dump(cfg))


def generate(cfg, seed):
    """List of (frames, ground_truth) arrays, one per episode."""
    return _core.generate(_dump(cfg), seed)


def train(cfg, seed, record_theta=False):
    out = _core.train(_dump(cfg), seed, record_theta)
    out["operators"] = _json.loads(out["operators"])
    return out


def baselines(cfg, seed):
    out = _core.baselines(_dump(cfg), seed)
    out["pca_operators"] = _json.loads(out["pca_operators"])
    out["kmeans_operators"] = _json.loads(out["kmeans_operators"])
    return out


def sweep(cfg):
    return _json.loads(_core.sweep(_dump(cfg)))


def equivalence(cfg, seed):
    worst_relative, worst_absolute, cases = _core.equivalence(_dump(cfg), seed)
    return {"worst_relative": worst_relative, "worst_absolute": worst_absolute, "cases": cases}


def report(checkpoints, stimulus, image_dir, force=False):
    return _json.loads(_core.report([str(c) for c in checkpoints], _json.dumps(stimulus), force, str(image_dir)))
