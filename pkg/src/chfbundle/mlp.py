"""Small fully connected network in numpy: inference, backprop, training, weight files.

Layers store weights as ``(fan_in, fan_out)`` matrices, so a batch ``Z`` of
shape ``(n, fan_in)`` maps to ``Z @ W + b``.  Hidden layers share one
activation; the output layer is linear.  Features are always ordered
``(D_he, P, G, x_e)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .correlations import ChfModel, LocalState
from .errors import InputError, ModelError, TrainingDivergedError, WeightFileError

log = logging.getLogger(__name__)

FORMAT_TAG = "mlpv1"
N_FEATURES = 4


def _relu(z):
    return np.maximum(z, 0.0)


def _relu_grad(z, a):
    return (z > 0).astype(float)


def _tanh_grad(z, a):
    return 1.0 - a * a


ACTIVATIONS = {
    "relu": (_relu, _relu_grad),
    "tanh": (np.tanh, _tanh_grad),
}


def states_to_array(states) -> np.ndarray:
    return np.array([[s.D_he, s.P, s.G, s.x_e] for s in states], dtype=float).reshape(-1, N_FEATURES)


@dataclass
class Standardizer:
    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: float = 0.0
    y_std: float = 1.0

    def __post_init__(self):
        self.x_mean = np.asarray(self.x_mean, dtype=float).reshape(N_FEATURES)
        self.x_std = np.asarray(self.x_std, dtype=float).reshape(N_FEATURES)
        self.y_mean, self.y_std = float(self.y_mean), float(self.y_std)
        if np.any(~(self.x_std > 0)) or not self.y_std > 0:
            raise ModelError("standardizer deviations must be positive")

    @classmethod
    def identity(cls):
        return cls(np.zeros(N_FEATURES), np.ones(N_FEATURES), 0.0, 1.0)

    @classmethod
    def fit(cls, X, y):
        """Column statistics of the training split; constant columns get std 1."""
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        xs = X.std(axis=0)
        xs[xs == 0] = 1.0
        ys = y.std()
        return cls(X.mean(axis=0), xs, y.mean(), ys if ys > 0 else 1.0)

    def features(self, X):
        return (np.asarray(X, dtype=float) - self.x_mean) / self.x_std

    def target(self, y):
        return (np.asarray(y, dtype=float) - self.y_mean) / self.y_std

    def untarget(self, z):
        return np.asarray(z) * self.y_std + self.y_mean


@dataclass
class MlpModel:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str = "relu"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ModelError(f"unknown activation {self.activation!r}")
        self.weights = [np.asarray(w, dtype=float) for w in self.weights]
        self.biases = [np.asarray(b, dtype=float).reshape(-1) for b in self.biases]
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ModelError("dimension mismatch: need one bias vector per weight matrix")
        fan_in = N_FEATURES
        for n, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or w.shape[0] != fan_in or b.shape != (w.shape[1],):
                raise ModelError(f"dimension mismatch at layer {n}: W {w.shape}, b {b.shape}, expected fan-in {fan_in}")
            fan_in = w.shape[1]
        if fan_in != 1:
            raise ModelError(f"dimension mismatch: output width {fan_in}, expected 1")
        if not all(np.all(np.isfinite(p)) for p in self.parameters()):
            raise ModelError("non-finite network parameter")

    @classmethod
    def initialize(cls, hidden=(16, 16), activation="relu", seed=0):
        """Glorot-uniform weights, zero biases."""
        rng = np.random.default_rng(seed)
        dims = [N_FEATURES, *hidden, 1]
        ws, bs = [], []
        for fi, fo in zip(dims[:-1], dims[1:]):
            lim = np.sqrt(6.0 / (fi + fo))
            ws.append(rng.uniform(-lim, lim, size=(fi, fo)))
            bs.append(np.zeros(fo))
        return cls(ws, bs, activation)

    @classmethod
    def zeros_like(cls, other: "MlpModel"):
        return cls([np.zeros_like(w) for w in other.weights], [np.zeros_like(b) for b in other.biases], other.activation)

    @property
    def layer_dims(self):
        return [w.shape for w in self.weights]

    def parameters(self):
        for w, b in zip(self.weights, self.biases):
            yield w
            yield b

    def copy(self):
        return MlpModel([w.copy() for w in self.weights], [b.copy() for b in self.biases], self.activation)

    def raw(self, Z):
        """Standardized-space output for standardized inputs ``Z`` (n, 4) -> (n,)."""
        return self._forward(Z)[0][-1][:, 0]

    def _forward(self, Z):
        act, _ = ACTIVATIONS[self.activation]
        a = np.asarray(Z, dtype=float)
        if a.ndim != 2 or a.shape[1] != N_FEATURES:
            raise ModelError(f"dimension mismatch: input shape {a.shape}, expected (n, {N_FEATURES})")
        acts, pre = [a], []
        last = len(self.weights) - 1
        for n, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w + b
            pre.append(z)
            a = z if n == last else act(z)
            acts.append(a)
        return acts, pre

    def predict(self, std: Standardizer, X):
        """De-standardized predictions for raw feature rows ``X`` (n, 4)."""
        return std.untarget(self.raw(std.features(X)))


def forward(model: MlpModel, std: Standardizer, state: LocalState) -> float:
    return float(model.predict(std, states_to_array([state]))[0])


def loss_and_gradient(model: MlpModel, std: Standardizer, X, y, l2: float = 0.0):
    """MSE on standardized targets plus ``l2 * sum(W**2)`` over weight matrices.

    Returns ``(loss, grads)`` with ``grads`` a list of ``(dW, db)`` per layer.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[0] == 0:
        raise InputError("empty batch")
    t = std.target(y).reshape(-1)
    acts, pre = model._forward(std.features(X))
    out = acts[-1][:, 0]
    n = out.shape[0]
    err = out - t
    loss = float(np.mean(err * err)) + l2 * sum(float(np.sum(w * w)) for w in model.weights)

    _, dact = ACTIVATIONS[model.activation]
    delta = (2.0 / n) * err[:, None]
    grads = []
    for k in range(len(model.weights) - 1, -1, -1):
        dW = acts[k].T @ delta + 2.0 * l2 * model.weights[k]
        db = delta.sum(axis=0)
        grads.append((dW, db))
        if k > 0:
            delta = (delta @ model.weights[k].T) * dact(pre[k - 1], acts[k])
    grads.reverse()
    return loss, grads


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int = 500
    batch_size: int = 64
    learning_rate: float = 1e-2
    decay: float = 0.99
    patience: int = 20
    min_delta: float = 1e-5
    l2: float = 1e-4
    seed: int = 0
    hidden: tuple[int, ...] = (16, 16)
    activation: str = "relu"
    optimizer: str = "sgd"

    def __post_init__(self):
        if self.max_epochs < 1 or self.batch_size < 1 or self.patience < 1:
            raise InputError("max_epochs, batch_size and patience must be >= 1")
        if not 0 < self.decay <= 1:
            raise InputError("decay must be in (0, 1]")
        if self.optimizer != "sgd":
            raise InputError(f"unsupported optimizer {self.optimizer!r}")

    def lr_at(self, epoch: int) -> float:
        """Learning rate used during 0-based ``epoch``."""
        return self.learning_rate * self.decay**epoch


@dataclass
class TrainReport:
    epochs_run: int
    best_val_loss: float
    best_epoch: int
    final_lr: float
    history: list[tuple[float, float]] = field(default_factory=list)


def _mse(model, std, X, y):
    e = model.raw(std.features(X)) - std.target(y)
    return float(np.mean(e * e))


def train(train_set, val_set, cfg: TrainConfig = TrainConfig(), std: Standardizer | None = None):
    """Mini-batch gradient descent with exponential decay and early stopping.

    ``train_set`` and ``val_set`` are ``(X, y)`` pairs with ``X`` of shape
    (n, 4).  Epochs in the report are 1-based.  The returned parameters are
    those of the epoch with the lowest validation loss.
    """
    Xt, yt = (np.asarray(a, dtype=float) for a in train_set)
    Xv, yv = (np.asarray(a, dtype=float) for a in val_set)
    if Xt.shape[0] < cfg.batch_size:
        raise InputError(f"training set ({Xt.shape[0]}) smaller than batch size ({cfg.batch_size})")
    if Xv.shape[0] == 0:
        raise InputError("empty validation set")
    std = std or Standardizer.fit(Xt, yt)
    model = MlpModel.initialize(cfg.hidden, cfg.activation, cfg.seed)
    rng = np.random.default_rng(cfg.seed + 1)

    best_model, best_loss, best_epoch = model.copy(), np.inf, 0
    ref_loss, wait = np.inf, 0
    history = []
    n = Xt.shape[0]
    epoch = 0
    for epoch in range(1, cfg.max_epochs + 1):
        lr = cfg.lr_at(epoch - 1)
        order = rng.permutation(n)
        train_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, grads = loss_and_gradient(model, std, Xt[idx], yt[idx], cfg.l2)
            train_loss += loss * idx.size
            for k, (dW, db) in enumerate(grads):
                model.weights[k] -= lr * dW
                model.biases[k] -= lr * db
        train_loss /= n
        val_loss = _mse(model, std, Xv, yv)
        if not (np.isfinite(train_loss) and np.isfinite(val_loss)):
            raise TrainingDivergedError(epoch)
        history.append((train_loss, val_loss))
        if val_loss < best_loss:
            best_model, best_loss, best_epoch = model.copy(), val_loss, epoch
        if val_loss < ref_loss - cfg.min_delta:
            ref_loss, wait = val_loss, 0
        else:
            wait += 1
            if wait >= cfg.patience:
                log.debug("early stop at epoch %d (best %d)", epoch, best_epoch)
                break
    report = TrainReport(epoch, best_loss, best_epoch, cfg.lr_at(epoch - 1), history)
    return best_model, std, report


def random_search(train_set, val_set, n_trials: int, seed: int = 0, base: TrainConfig = TrainConfig()):
    """Seeded random search over width, depth, learning rate, batch size and L2.

    Stand-in for Bayesian optimisation; returns ``(best_cfg, results)`` where
    results holds ``(cfg, best_val_loss)`` per trial in trial order.
    """
    rng = np.random.default_rng(seed)
    results = []
    for trial in range(n_trials):
        depth = int(rng.integers(1, 4))
        width = int(rng.choice([8, 16, 32]))
        cfg = replace(
            base,
            hidden=(width,) * depth,
            learning_rate=float(10 ** rng.uniform(-3, -1.3)),
            batch_size=int(rng.choice([32, 64, 128])),
            l2=float(10 ** rng.uniform(-6, -3)),
            seed=base.seed + trial,
        )
        try:
            _, _, rep = train(train_set, val_set, cfg)
            score = rep.best_val_loss
        except TrainingDivergedError:
            score = np.inf
        results.append((cfg, score))
    best = min(results, key=lambda r: r[1])[0]
    return best, results


# ---------------------------------------------------------------- weight files

def _fmt(values):
    return " ".join(f"{v:.16e}" for v in np.ravel(values))


def save_weights(model: MlpModel, std: Standardizer, path, target: str = "chf"):
    """Write the versioned text format; 17 significant digits round-trip exactly."""
    lines = [f"{FORMAT_TAG} {model.activation} {len(model.weights)}"]
    for w, b in zip(model.weights, model.biases):
        r, c = w.shape
        lines += [f"dims {r} {c}", _fmt(w), _fmt(b)]
    lines += [
        "standardizer",
        f"x_mean {_fmt(std.x_mean)}",
        f"x_std {_fmt(std.x_std)}",
        f"y_mean {_fmt([std.y_mean])}",
        f"y_std {_fmt([std.y_std])}",
        f"target {target}",
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def load_weights(path):
    """Read a weight file; returns ``(model, standardizer, target_kind)``."""
    path = Path(path)
    try:
        tokens = path.read_text().split()
    except OSError as exc:
        raise WeightFileError(f"cannot read weight file {path}: {exc}") from exc
    pos = 0

    def take(n=1):
        nonlocal pos
        if pos + n > len(tokens):
            raise WeightFileError(f"{path}: dimension mismatch (file truncated)")
        out = tokens[pos:pos + n]
        pos += n
        return out

    def floats(n):
        vals = take(n)
        try:
            return np.array([float(v) for v in vals])
        except ValueError:
            raise WeightFileError(f"{path}: dimension mismatch or corrupt value near token {pos}") from None

    tag, activation, n_layers = take(3)
    if tag != FORMAT_TAG:
        raise WeightFileError(f"{path}: version mismatch, expected {FORMAT_TAG}, found {tag!r}")
    if activation not in ACTIVATIONS:
        raise WeightFileError(f"{path}: unknown activation tag {activation!r}")
    try:
        n_layers = int(n_layers)
    except ValueError:
        raise WeightFileError(f"{path}: corrupt layer count {n_layers!r}") from None
    ws, bs = [], []
    for _ in range(n_layers):
        key, r, c = take(3)
        if key != "dims":
            raise WeightFileError(f"{path}: dimension mismatch, expected 'dims' found {key!r}")
        r, c = int(r), int(c)
        ws.append(floats(r * c).reshape(r, c))
        bs.append(floats(c))
    if take()[0] != "standardizer":
        raise WeightFileError(f"{path}: dimension mismatch, expected standardizer block")
    block = {}
    for key, n in (("x_mean", N_FEATURES), ("x_std", N_FEATURES), ("y_mean", 1), ("y_std", 1)):
        if take()[0] != key:
            raise WeightFileError(f"{path}: corrupt standardizer block, expected {key}")
        block[key] = floats(n)
    target = "chf"
    if pos < len(tokens):
        key, target = take(2)
        if key != "target":
            raise WeightFileError(f"{path}: unexpected trailing content {key!r}")
    if pos != len(tokens):
        raise WeightFileError(f"{path}: unexpected trailing content")
    try:
        model = MlpModel(ws, bs, activation)
        std = Standardizer(block["x_mean"], block["x_std"], block["y_mean"][0], block["y_std"][0])
    except ModelError as exc:
        raise WeightFileError(f"{path}: {exc}") from exc
    return model, std, target


class PureMlModel(ChfModel):
    """Network that predicts CHF (kW/m^2) directly from the local features."""

    def __init__(self, model: MlpModel, std: Standardizer, name: str = "pure-ml"):
        self.model, self.std, self.name = model, std, name

    def predict_arrays(self, D, P, G, x):
        D, P, G, x = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (D, P, G, x)))
        X = np.stack([D.ravel(), P.ravel(), G.ravel(), x.ravel()], axis=1)
        out = self.model.predict(self.std, X).reshape(D.shape)
        return out, ~(out > 0)
