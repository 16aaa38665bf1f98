"""Synthetic tube CHF data standing in for the NRC database.

Each point is a uniformly heated tube at its CHF condition: the local state
(D, P, G, x_e) is sampled, the "experimental" CHF comes from a truth function,
and the inlet subcooling / heated length are back-filled from the heat
balance so the tube is self-consistent.
"""
from __future__ import annotations

import numpy as np

from .evaluation import ChfPoint
from .lut import LutModel
from .props import default_table

TRUTHS = ("lut", "lut-skewed")


def truth_chf(kind: str, D, P, G, x, lut: LutModel | None = None):
    lut = lut or LutModel()
    base, _ = lut.predict_arrays(D, P, G, x)
    if kind == "lut":
        return base
    if kind == "lut-skewed":
        return base * (1.15 + 0.1 * np.tanh(2.0 * x))
    raise ValueError(f"unknown truth {kind!r}; choose from {TRUTHS}")


def synthetic_tube_points(
    n: int,
    seed: int = 0,
    truth: str = "lut-skewed",
    noise: float = 0.0,
    props=None,
    lut: LutModel | None = None,
) -> list[ChfPoint]:
    """Sample ``n`` points; ``noise`` is the relative std of multiplicative Gaussian noise."""
    props = props or default_table()
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        m = 2 * (n - len(out)) + 16
        D = np.exp(rng.uniform(np.log(0.003), np.log(0.025), m))
        P = rng.uniform(1000.0, 15000.0, m)
        G = rng.uniform(500.0, 6000.0, m)
        x = rng.uniform(-0.4, 0.6, m)
        x_in = rng.uniform(-0.5, 0.02, m)
        q = truth_chf(truth, D, P, G, x, lut)
        if noise:
            q = q * (1.0 + noise * rng.standard_normal(m))
        hfg = props.interp("h_fg", P)
        # uniform-flux heat balance: x = x_in + 4 q L / (D G h_fg)
        L = (x - x_in) * D * G * hfg / (4.0 * q)
        ok = (L > 0.2) & (L < 4.0) & (q > 0)
        for i in np.flatnonzero(ok):
            out.append(ChfPoint(D[i], P[i], G[i], x[i], q[i], -x_in[i] * hfg[i], L[i]))
            if len(out) == n:
                break
    return out
