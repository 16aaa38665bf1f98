"""Shared test utilities."""
import numpy as np

from chfbundle.mlp import MlpModel, Standardizer, loss_and_gradient


def random_network(rng, max_layers=3, max_units=16):
    n_hidden = int(rng.integers(0, max_layers))
    hidden = tuple(int(rng.integers(1, max_units + 1)) for _ in range(n_hidden))
    activation = str(rng.choice(["relu", "tanh"]))
    net = MlpModel.initialize(hidden, activation, seed=int(rng.integers(1 << 30)))
    for b in net.biases:
        b[:] = rng.normal(scale=0.3, size=b.shape)
    return net


def random_batch(rng, n):
    X = np.column_stack([
        rng.uniform(0.004, 0.02, n),
        rng.uniform(1000, 16000, n),
        rng.uniform(500, 6000, n),
        rng.uniform(-0.4, 0.6, n),
    ])
    y = rng.uniform(500, 8000, n)
    return X, y


def gradient_check(net: MlpModel, std: Standardizer, X, y, l2=0.0, eps=1e-5):
    """Max relative error of backprop against central differences."""
    _, grads = loss_and_gradient(net, std, X, y, l2)
    worst = 0.0
    for k in range(len(net.weights)):
        for param, analytic in ((net.weights[k], grads[k][0]), (net.biases[k], grads[k][1])):
            flat = param.reshape(-1)
            for i in range(flat.size):
                old = flat[i]
                flat[i] = old + eps
                lp, _ = loss_and_gradient(net, std, X, y, l2)
                flat[i] = old - eps
                lm, _ = loss_and_gradient(net, std, X, y, l2)
                flat[i] = old
                fd = (lp - lm) / (2 * eps)
                a = analytic.reshape(-1)[i]
                denom = max(abs(a), abs(fd), 1e-8)
                worst = max(worst, abs(a - fd) / denom)
    return worst
