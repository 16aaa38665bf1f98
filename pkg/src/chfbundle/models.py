"""Model registry: builtin ids, manifest paths, and the training pipeline behind ``train``."""
from __future__ import annotations

import logging
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from .correlations import ChfModel
from .errors import InputError, ModelError
from .evaluation import SplitSpec, compute_metrics, split
from .hybrid import load_manifest, make_base, train_hybrid, write_manifest
from .mlp import PureMlModel, TrainConfig, save_weights, train

log = logging.getLogger(__name__)

BASE_IDS = ("base-bowring", "base-w3", "base-lut")
ML_IDS = ("pure-ml", "hybrid-bowring", "hybrid-lut")
BUILTIN_IDS = BASE_IDS + ML_IDS
HYBRID_BASES = {"hybrid-bowring": "base-bowring", "hybrid-lut": "base-lut"}


def resolve_model(ref: str) -> ChfModel:
    """A builtin id or the path of a model manifest."""
    if ref in BASE_IDS:
        return make_base(ref)
    if ref in ML_IDS:
        manifest = resources.files("chfbundle") / "data" / "models" / f"{ref}.toml"
        with resources.as_file(manifest) as path:
            if not path.is_file():
                raise ModelError(f"builtin model {ref} has no bundled weights")
            return load_manifest(path)
    if Path(ref).is_file():
        return load_manifest(ref)
    raise ModelError(f"unknown model {ref!r}; builtins are {', '.join(BUILTIN_IDS)} or pass a manifest path")


def resolve_models(refs) -> list[ChfModel]:
    if isinstance(refs, str):
        refs = [r.strip() for r in refs.split(",") if r.strip()]
    if not refs:
        raise InputError("no models given")
    return [resolve_model(r) for r in refs]


def _arrays(points):
    X = np.array([[p.D_he, p.P, p.G, p.x_e] for p in points], dtype=float).reshape(-1, 4)
    y = np.array([p.exp_chf for p in points], dtype=float)
    return X, y


def _pairs(points):
    return [(p.state, p.exp_chf) for p in points]


def train_models(points, kinds, out_dir, split_spec: SplitSpec = SplitSpec(), cfg: TrainConfig = TrainConfig()):
    """Split, train each requested ML model, write weights + manifests.

    Returns ``{kind: (model, TrainReport, MetricsReport on the test split)}``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tr, va, te = split(points, split_spec)
    log.info("split %d points into %d/%d/%d", len(points), len(tr), len(va), len(te))
    if not te:
        raise InputError("test split is empty")
    Xte, yte = _arrays(te)
    out = {}
    for kind in kinds:
        if kind == "pure-ml":
            net, std, report = train(_arrays(tr), _arrays(va), cfg)
            model = PureMlModel(net, std, "pure-ml")
            save_weights(net, std, out_dir / "pure-ml.mlp", target="chf")
            write_manifest(out_dir / "pure-ml.toml", "pure-ml", "pure-ml", weights="pure-ml.mlp")
        elif kind in HYBRID_BASES:
            base = make_base(HYBRID_BASES[kind])
            model, report = train_hybrid(base, _pairs(tr), _pairs(va), cfg, name=kind)
            save_weights(model.residual, model.std, out_dir / f"{kind}.mlp", target="residual")
            write_manifest(out_dir / f"{kind}.toml", "hybrid", kind, base=base.name, weights=f"{kind}.mlp")
        else:
            raise InputError(f"cannot train {kind!r}; trainable kinds are {', '.join(ML_IDS)}")
        pred, _ = model.predict_arrays(*Xte.T)
        out[kind] = (model, report, compute_metrics(pred, yte))
        log.info("%s: %d epochs, best %d", kind, report.epochs_run, report.best_epoch)
    return out


def config_with(cfg: TrainConfig, **kw) -> TrainConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
