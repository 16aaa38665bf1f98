import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chfbundle.correlations import LocalState
from chfbundle.errors import InputError, ModelError, TrainingDivergedError, WeightFileError
from chfbundle.mlp import (
    MlpModel,
    Standardizer,
    TrainConfig,
    forward,
    load_weights,
    loss_and_gradient,
    random_search,
    save_weights,
    train,
)
from helpers import gradient_check, random_batch, random_network


def fitted_std(rng):
    X, y = random_batch(rng, 200)
    return Standardizer.fit(X, y)


def naive_forward(net, std, x):
    a = [(x[i] - std.x_mean[i]) / std.x_std[i] for i in range(4)]
    for n, (W, b) in enumerate(zip(net.weights, net.biases)):
        out = []
        for j in range(W.shape[1]):
            s = b[j]
            for i in range(W.shape[0]):
                s += a[i] * W[i, j]
            if n < len(net.weights) - 1:
                s = max(s, 0.0) if net.activation == "relu" else float(np.tanh(s))
            out.append(s)
        a = out
    return a[0] * std.y_std + std.y_mean


def test_zero_network_gives_target_mean(rng):
    std = fitted_std(rng)
    net = MlpModel.zeros_like(MlpModel.initialize((8, 8)))
    assert forward(net, std, LocalState(0.01, 7000, 2000, 0.1)) == std.y_mean


def test_identity_layer():
    net = MlpModel([np.array([[1.0], [0.0], [0.0], [0.0]])], [np.zeros(1)])
    assert forward(net, Standardizer.identity(), LocalState(0.0123, 7000, 2000, 0.1)) == 0.0123


def test_against_naive_forward(rng):
    for activation in ("relu", "tanh"):
        net = MlpModel.initialize((16, 16), activation, seed=3)
        for b in net.biases:
            b[:] = rng.normal(size=b.shape)
        std = fitted_std(rng)
        X, _ = random_batch(rng, 50)
        got = net.predict(std, X)
        ref = [naive_forward(net, std, x) for x in X]
        np.testing.assert_allclose(got, ref, rtol=1e-12)


def test_forward_invariant_to_order(rng):
    net = random_network(rng)
    std = fitted_std(rng)
    X, _ = random_batch(rng, 64)
    perm = rng.permutation(64)
    assert np.array_equal(net.predict(std, X)[perm], net.predict(std, X[perm]))


def test_dimension_mismatch():
    with pytest.raises(ModelError, match="dimension mismatch"):
        MlpModel([np.zeros((4, 3)), np.zeros((2, 1))], [np.zeros(3), np.zeros(1)])
    with pytest.raises(ModelError, match="dimension mismatch"):
        MlpModel([np.zeros((4, 3))], [np.zeros(3)])
    net = MlpModel.initialize((4,))
    with pytest.raises(ModelError, match="dimension mismatch"):
        net.raw(np.zeros((3, 5)))


def test_non_finite_parameter_rejected():
    with pytest.raises(ModelError):
        MlpModel([np.full((4, 1), np.nan)], [np.zeros(1)])


def test_standardizer_positive_std():
    with pytest.raises(ModelError):
        Standardizer(np.zeros(4), np.array([1, 1, 0, 1.0]))
    std = Standardizer.fit(np.ones((5, 4)), np.full(5, 3.0))
    assert np.all(std.x_std == 1) and std.y_std == 1


def test_zero_network_loss_closed_form(rng):
    net = MlpModel.zeros_like(MlpModel.initialize((5,)))
    t = rng.normal(size=30)
    t -= t.mean()
    std = Standardizer.identity()
    X, _ = random_batch(rng, 30)
    loss, grads = loss_and_gradient(net, std, X, t)
    assert loss == pytest.approx(np.mean(t**2), rel=1e-14)
    assert grads[-1][1][0] == pytest.approx(-2 * np.mean(t), abs=1e-15)


def test_gradient_check_random_networks(rng):
    for _ in range(20):
        net = random_network(rng)
        X, y = random_batch(rng, int(rng.integers(1, 20)))
        std = fitted_std(rng)
        assert gradient_check(net, std, X, y, l2=float(rng.choice([0.0, 1e-3]))) < 1e-5


def test_l2_only_gradient(rng):
    net = random_network(rng)
    std = fitted_std(rng)
    X, _ = random_batch(rng, 16)
    y = net.predict(std, X)  # zero data error
    lam = 0.37
    _, g0 = loss_and_gradient(net, std, X, y, 0.0)
    _, g = loss_and_gradient(net, std, X, y, lam)
    for (dW, _), (dW0, _), W in zip(g, g0, net.weights):
        np.testing.assert_allclose(dW - dW0, 2 * lam * W, rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(dW0, 0.0, atol=1e-9)


def test_empty_batch():
    with pytest.raises(InputError, match="empty batch"):
        loss_and_gradient(MlpModel.initialize((3,)), Standardizer.identity(), np.zeros((0, 4)), np.zeros(0))


# fixed feature scaling so train and validation share the same linear map
G_MEAN, G_STD = 3250.0, 1587.7


def linear_problem(rng, n):
    X, _ = random_batch(rng, n)
    return X, 3 * (X[:, 2] - G_MEAN) / G_STD


def test_learns_linear_target(rng):
    X, y = linear_problem(rng, 600)
    Xv, yv = linear_problem(np.random.default_rng(7), 100)
    cfg = TrainConfig(max_epochs=200, hidden=(8,), learning_rate=0.1, l2=0.0, batch_size=16, patience=200, seed=1)
    net, std, rep = train((X, y), (Xv, yv), cfg)
    mse = float(np.mean((net.predict(std, Xv) - yv) ** 2))
    # least-squares oracle: the map is exactly linear, so the fit is perfect
    A = np.column_stack([X, np.ones(len(X))])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    assert float(np.mean((np.column_stack([Xv, np.ones(len(Xv))]) @ coef - yv) ** 2)) < 1e-20
    assert rep.epochs_run <= 200
    assert mse < 1e-3


def test_patience_one_stops_at_epoch_two(rng):
    X, y = linear_problem(rng, 128)
    _, _, rep = train((X, y), (X[:20], y[:20]), TrainConfig(patience=1, min_delta=1e9))
    assert rep.epochs_run == 2


def test_best_epoch_attains_history_minimum(rng):
    X, y = linear_problem(rng, 256)
    Xv, yv = X[:40] * np.array([1, 1, 1.1, 1]), y[:40]
    _, _, rep = train((X, y), (Xv, yv), TrainConfig(max_epochs=60, patience=5, learning_rate=0.05))
    vals = [v for _, v in rep.history]
    assert rep.best_val_loss == min(vals)
    assert vals[rep.best_epoch - 1] == min(vals)
    assert 1 <= rep.best_epoch <= rep.epochs_run <= 60
    assert len(vals) == rep.epochs_run


def test_returned_parameters_are_best_epoch(rng):
    X, y = linear_problem(rng, 256)
    net, std, rep = train((X, y), (X[:40], y[:40]), TrainConfig(max_epochs=30))
    mse = float(np.mean((net.raw(std.features(X[:40])) - std.target(y[:40])) ** 2))
    assert mse == pytest.approx(rep.best_val_loss, rel=1e-12)


def test_training_determinism(rng, tmp_path):
    X, y = random_batch(rng, 300)
    cfg = TrainConfig(max_epochs=15, seed=4)
    paths = []
    for n in range(2):
        net, std, rep = train((X, y), (X[:30], y[:30]), cfg)
        p = tmp_path / f"w{n}.mlp"
        save_weights(net, std, p)
        paths.append(p)
        if n == 0:
            first = rep
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert first == rep


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_reports_epoch(rng):
    X, y = random_batch(rng, 128)
    with pytest.raises(TrainingDivergedError) as info:
        train((X, y), (X[:10], y[:10]), TrainConfig(learning_rate=1e6, max_epochs=50))
    assert info.value.epoch >= 1


def test_train_preconditions(rng):
    X, y = random_batch(rng, 10)
    with pytest.raises(InputError):
        train((X, y), (X, y), TrainConfig(batch_size=64))
    with pytest.raises(InputError):
        train((X, y), (X[:0], y[:0]), TrainConfig(batch_size=4))


@pytest.mark.parametrize("kw", [dict(max_epochs=0), dict(decay=0.0), dict(decay=1.5), dict(patience=0), dict(batch_size=0)])
def test_config_invariants(kw):
    with pytest.raises(InputError):
        TrainConfig(**kw)


@given(st.floats(1e-5, 1.0), st.floats(0.5, 1.0), st.integers(0, 500))
def test_lr_schedule(lr0, decay, k):
    cfg = TrainConfig(learning_rate=lr0, decay=decay)
    assert cfg.lr_at(k) == pytest.approx(lr0 * decay**k, rel=1e-12)


def test_round_trip(rng, tmp_path):
    net = random_network(rng)
    std = fitted_std(rng)
    save_weights(net, std, tmp_path / "w.mlp", target="residual")
    net2, std2, target = load_weights(tmp_path / "w.mlp")
    X, _ = random_batch(rng, 100)
    assert target == "residual"
    assert np.array_equal(net.predict(std, X), net2.predict(std2, X))


def test_weight_file_header(rng, tmp_path):
    save_weights(MlpModel.initialize((3, 2), "tanh"), Standardizer.identity(), tmp_path / "w.mlp")
    lines = (tmp_path / "w.mlp").read_text().splitlines()
    assert lines[0] == "mlpv1 tanh 3"
    assert lines[1] == "dims 4 3"


def test_truncated_file(rng, tmp_path):
    p = tmp_path / "w.mlp"
    save_weights(MlpModel.initialize((4, 4)), Standardizer.identity(), p)
    lines = p.read_text().splitlines()
    # drop the final layer's biases and everything after
    cut = lines.index("dims 4 1") + 2
    p.write_text("\n".join(lines[:cut]) + "\n")
    with pytest.raises(WeightFileError, match="dimension mismatch"):
        load_weights(p)


def test_unknown_activation(tmp_path):
    p = tmp_path / "w.mlp"
    save_weights(MlpModel.initialize((2,)), Standardizer.identity(), p)
    p.write_text(p.read_text().replace("mlpv1 relu", "mlpv1 swish", 1))
    with pytest.raises(WeightFileError, match="swish"):
        load_weights(p)


def test_version_mismatch(tmp_path):
    p = tmp_path / "w.mlp"
    save_weights(MlpModel.initialize((2,)), Standardizer.identity(), p)
    p.write_text(p.read_text().replace("mlpv1", "mlpv9", 1))
    with pytest.raises(WeightFileError, match="version mismatch"):
        load_weights(p)


def test_random_search_deterministic(rng):
    X, y = linear_problem(rng, 200)
    base = TrainConfig(max_epochs=5)
    a = random_search((X, y), (X[:20], y[:20]), 3, seed=2, base=base)
    b = random_search((X, y), (X[:20], y[:20]), 3, seed=2, base=base)
    assert a == b
    assert a[0] in [cfg for cfg, _ in a[1]]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_initialization_finite_and_bounded(seed):
    net = MlpModel.initialize((16, 16), seed=seed)
    for w in net.weights:
        lim = np.sqrt(6.0 / sum(w.shape))
        assert np.all(np.abs(w) <= lim)
