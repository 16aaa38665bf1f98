"""Residual-correction hybrids: base CHF model plus a network trained on exp - base."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .correlations import Bowring, ChfModel, LocalState, W3, load_coefficient_overrides
from .errors import ChfError, EvaluationError, InputError, ModelError
from .lut import LutModel, load_lut
from .mlp import MlpModel, PureMlModel, Standardizer, TrainConfig, load_weights, states_to_array, train


@dataclass(frozen=True)
class ResidualRecord:
    state: LocalState
    base_chf: float
    exp_chf: float
    extrapolated: bool = False

    @property
    def residual(self) -> float:
        return self.exp_chf - self.base_chf


def build_residual_dataset(base: ChfModel, data) -> list[ResidualRecord]:
    """One record per ``(state, exp_chf)`` pair; residual = exp - base."""
    data = list(data)
    if not data:
        raise InputError("empty dataset")
    X = states_to_array([s for s, _ in data])
    try:
        chf, flag = base.predict_arrays(X[:, 0], X[:, 1], X[:, 2], X[:, 3])
    except ChfError:
        # locate the offending record
        for i, (s, _) in enumerate(data):
            try:
                base.predict(s)
            except ChfError as exc:
                raise EvaluationError(f"base model {base.name} failed on record {i}: {exc}") from exc
        raise
    return [
        ResidualRecord(s, float(c), float(e), bool(f))
        for (s, e), c, f in zip(data, chf, flag)
    ]


def residual_arrays(records):
    X = states_to_array([r.state for r in records])
    return X, np.array([r.residual for r in records])


class HybridModel(ChfModel):
    """``base(state) + residual_net(state)``; never clipped, non-positive results flagged."""

    def __init__(self, base: ChfModel, residual: MlpModel, std: Standardizer, name: str | None = None):
        self.base, self.residual, self.std = base, residual, std
        self.name = name or f"hybrid-{base.name.removeprefix('base-')}"
        self.envelope = base.envelope

    def residual_arrays(self, D, P, G, x):
        D, P, G, x = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (D, P, G, x)))
        X = np.stack([D.ravel(), P.ravel(), G.ravel(), x.ravel()], axis=1)
        return self.residual.predict(self.std, X).reshape(D.shape)

    def predict_arrays(self, D, P, G, x):
        y_base, flag = self.base.predict_arrays(D, P, G, x)
        out = y_base + self.residual_arrays(D, P, G, x)
        return out, flag | ~(out > 0)


def hybrid_predict(h: HybridModel, state: LocalState) -> float:
    return h.predict(state)


def train_hybrid(base: ChfModel, train_data, val_data, cfg: TrainConfig = TrainConfig(), name=None):
    """Fit the residual network on ``(state, exp_chf)`` pairs.

    Targets are standardized with the training residuals' own statistics.
    """
    tr = residual_arrays(build_residual_dataset(base, train_data))
    va = residual_arrays(build_residual_dataset(base, val_data))
    net, std, report = train(tr, va, cfg)
    return HybridModel(base, net, std, name), report


# ------------------------------------------------------------------ manifests

BASE_KINDS = ("base-bowring", "base-w3", "base-lut")


def make_base(base_id: str, lut_path=None, coefficients_path=None) -> ChfModel:
    overrides = load_coefficient_overrides(coefficients_path) if coefficients_path else {}
    if base_id == "base-bowring":
        return Bowring(coeffs=overrides.get("bowring"))
    if base_id == "base-w3":
        return W3(coeffs=overrides.get("w3"))
    if base_id == "base-lut":
        return LutModel(load_lut(lut_path) if lut_path else None)
    raise ModelError(f"unknown base model {base_id!r}")


def load_manifest(path) -> ChfModel:
    """Rebuild a model from a TOML manifest.

    Keys: ``kind`` (base | pure-ml | hybrid), ``name``, ``base``, ``weights``,
    optional ``lut`` and ``coefficients``.  Relative paths resolve against the
    manifest's directory.
    """
    path = Path(path)
    try:
        doc = tomllib.loads(path.read_text())
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ModelError(f"cannot read manifest {path}: {exc}") from exc
    here = path.parent

    def rel(key):
        v = doc.get(key)
        return None if v is None else here / v

    kind = doc.get("kind")
    if kind == "base":
        return make_base(doc["base"], rel("lut"), rel("coefficients"))
    if "weights" not in doc:
        raise ModelError(f"{path}: manifest of kind {kind!r} needs 'weights'")
    net, std, target = load_weights(rel("weights"))
    if kind == "pure-ml":
        if target != "chf":
            raise ModelError(f"{path}: pure-ml weights must target chf, found {target!r}")
        return PureMlModel(net, std, doc.get("name", "pure-ml"))
    if kind == "hybrid":
        if target != "residual":
            raise ModelError(f"{path}: hybrid weights must target residual, found {target!r}")
        base = make_base(doc.get("base", ""), rel("lut"), rel("coefficients"))
        return HybridModel(base, net, std, doc.get("name"))
    raise ModelError(f"{path}: unknown manifest kind {kind!r}")


def write_manifest(path, kind: str, name: str, base: str | None = None, weights: str | None = None, lut: str | None = None):
    lines = [f'kind = "{kind}"', f'name = "{name}"']
    if base:
        lines.append(f'base = "{base}"')
    if weights:
        lines.append(f'weights = "{weights}"')
    if lut:
        lines.append(f'lut = "{lut}"')
    Path(path).write_text("\n".join(lines) + "\n")
