"""Acceptance criteria 1-11.  Each test prints one PASS/FAIL line; the lines
are also collected into the terminal summary."""
import time
from dataclasses import replace

import numpy as np
import pytest

from chfbundle.cli import main
from chfbundle.correlations import Bowring, LocalState
from chfbundle.evaluation import SplitSpec, ingest_csv, metrics_from_errors
from chfbundle.hybrid import HybridModel, train_hybrid
from chfbundle.lut import DiameterCorrection, LutModel
from chfbundle.mlp import MlpModel, Standardizer, TrainConfig
from chfbundle.subchannel import beta_sensitivity, find_critical, load_bundled_case, march, tube_case
from chfbundle.synthetic import truth_chf
from helpers import gradient_check, random_batch, random_network
from test_subchannel import outlet_energy, random_case, two_channel


@pytest.fixture
def record(acceptance_log):
    def _record(n, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {detail}"
        print(line)
        acceptance_log.append(line)
        assert ok, line
    return _record


def test_01_gradient_correctness(record):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    n_nets = 25
    for _ in range(n_nets):
        net = random_network(rng, max_layers=3, max_units=16)
        X, y = random_batch(rng, int(rng.integers(1, 33)))
        std = Standardizer.fit(*random_batch(rng, 100))
        worst = max(worst, gradient_check(net, std, X, y, l2=float(rng.choice([0.0, 1e-4, 1e-2])), eps=1e-5))
    elapsed = time.perf_counter() - t0
    record(1, worst < 1e-5 and elapsed < 10, f"gradient check on {n_nets} networks, max rel err {worst:.2e} (< 1e-5), {elapsed:.2f} s (< 10 s)")


def test_02_hybrid_additive_identity(record):
    rng = np.random.default_rng(102)
    n = 10_000
    D = rng.uniform(0.003, 0.025, n)
    P = rng.uniform(1000, 15000, n)
    G = rng.uniform(500, 6000, n)
    x = rng.uniform(-0.4, 0.6, n)
    worst = 0.0
    zero = MlpModel.zeros_like(MlpModel.initialize((16, 16)))
    std = Standardizer.fit(np.column_stack([D, P, G, x]), rng.normal(0, 300, n))
    for base in (Bowring(), LutModel()):
        h = HybridModel(base, zero, Standardizer(std.x_mean, std.x_std, 0.0, std.y_std))
        b, _ = base.predict_arrays(D, P, G, x)
        hy, _ = h.predict_arrays(D, P, G, x)
        worst = max(worst, float(np.max(np.abs(hy - b) / np.abs(b))))
    record(2, worst <= 1e-12, f"zero-residual hybrid equals base on {n} states (Bowring, LUT), max rel diff {worst:.1e} (<= 1e-12)")


def test_03_heat_balance(record):
    D, G, q, h_in = 0.0095, 3000.0, 1800.0, 1150.0
    case = tube_case(D, 3.0, 12000.0, G, h_in, q, n_axial=60)
    prof = march(case)
    exact = h_in + q * np.pi * D * prof.z / (G * np.pi * D**2 / 4)
    err = float(np.max(np.abs(prof.h[0] / exact - 1)))
    adiabatic = march(replace(case, power=0.0))
    err_ad = float(np.max(np.abs(adiabatic.h / h_in - 1)))
    ok = prof.h.shape == (1, 60) and err <= 1e-10 and err_ad <= 1e-12
    record(3, ok, f"60-node tube heat balance max rel err {err:.1e} (<= 1e-10); adiabatic drift {err_ad:.1e} (<= 1e-12)")


def test_04_mixing_conservation(record):
    rng = np.random.default_rng(104)
    worst = 0.0
    for beta in (0.0, 0.0044, 0.02):
        for _ in range(20):
            case = random_case(rng, beta)
            out, inn = outlet_energy(case, march(case))
            worst = max(worst, abs(out / (inn + case.power) - 1))
    sym = march(two_channel(beta=0.0044))
    symmetric = np.array_equal(sym.h[0], sym.h[1]) and np.array_equal(sym.h_out[0], sym.h_out[1])
    record(4, worst <= 1e-8 and symmetric, f"60 random 4-channel cases energy imbalance {worst:.1e} (<= 1e-8); symmetric pair identical: {symmetric}")


def test_05_lut_engine(record, lut_model):
    t = lut_model.table
    P, G, X = np.meshgrid(t.p_axis, t.g_axis, t.x_axis, indexing="ij")
    nodes, _ = lut_model.predict_arrays(0.008, P, G, X)
    node_err = float(np.max(np.abs(nodes / t.values - 1)))
    mids, _ = t.interpolate(0.5 * (P[:-1] + P[1:]), G[:-1], X[:-1])
    mean = 0.5 * (t.values[:-1] + t.values[1:])
    mid_err = float(np.max(np.abs(mids / mean - 1)))
    corr = DiameterCorrection()
    unit = corr.factor(0.008) == 1.0
    s = LocalState(0.008, t.p_axis[3], t.g_axis[2], t.x_axis[4])
    halved = lut_model.predict(LocalState(0.032, s.P, s.G, s.x_e)) / lut_model.predict(s)
    ok = node_err <= 1e-12 and mid_err <= 1e-12 and unit and abs(halved - 0.5) <= 1e-12
    record(5, ok, f"LUT node err {node_err:.1e}, midpoint err {mid_err:.1e}, K(0.008) == 1: {unit}, K(0.032) ratio {halved:.15f}")


def _residual_learning(seed):
    rng = np.random.default_rng(seed)
    n = 2000
    D = np.exp(rng.uniform(np.log(0.003), np.log(0.025), n))
    P = rng.uniform(1000, 15000, n)
    G = rng.uniform(500, 6000, n)
    x = rng.uniform(-0.4, 0.6, n)
    truth = truth_chf("lut-skewed", D, P, G, x)
    pairs = [(LocalState(*s), float(c)) for s, c in zip(zip(D, P, G, x), truth)]
    order = rng.permutation(n)
    n_test, n_val = n // 10, n // 10
    test = [pairs[i] for i in order[:n_test]]
    val = [pairs[i] for i in order[n_test:n_test + n_val]]
    train = [pairs[i] for i in order[n_test + n_val:]]
    base = LutModel()
    model, report = train_hybrid(base, train, val, TrainConfig(seed=seed))
    Xs = np.array([s.as_array() for s, _ in test])
    y = np.array([c for _, c in test])
    mu_base = float(np.mean(100 * np.abs(base.predict_arrays(*Xs.T)[0] - y) / y))
    pred = model.predict_arrays(*Xs.T)[0]
    mu_hyb = float(np.mean(100 * np.abs(pred - y) / y))
    return mu_base, mu_hyb, pred


def test_06_end_to_end_residual_learning(record):
    t0 = time.perf_counter()
    mu_base, mu_hyb, pred = _residual_learning(seed=0)
    _, _, pred2 = _residual_learning(seed=0)
    elapsed = time.perf_counter() - t0
    deterministic = np.array_equal(pred, pred2)
    ok = mu_hyb <= mu_base / 5 and deterministic and elapsed < 60
    record(6, ok, f"hybrid-LUT mu {mu_hyb:.3f}% vs base-LUT {mu_base:.3f}% (ratio {mu_base / mu_hyb:.1f}x, need >= 5x); "
                  f"deterministic: {deterministic}; {elapsed:.1f} s for two runs (< 60 s)")


def test_07_beta_sensitivity(record, lut_model):
    case = load_bundled_case("two_channel_asym")
    rows = beta_sensitivity(case, lut_model, [0.0, 0.002, 0.0044, 0.01])
    chf = [r.chf_at_obs for r in rows]
    increasing = all(b > a for a, b in zip(chf, chf[1:]))
    spread = 100 * (max(chf) - min(chf)) / min(chf)
    record(7, increasing and spread > 10, f"hot-channel CHF at L_obs {', '.join(f'{c:.1f}' for c in chf)} kW/m2; strictly increasing: {increasing}; spread {spread:.1f}% (> 10%)")


def test_08_critical_location(record):
    z = np.linspace(0.0, 1.0, 84)
    L, inlet = find_critical(z, 1.5 - z)
    none, _ = find_critical(z, 1.2 + 0 * z)
    ok = L is not None and abs(L - 0.5) <= 1e-9 and not inlet and none is None
    record(8, ok, f"linear DNBR 1.5 -> 0.5 gives L_cr = {L!r} m (0.5 +/- 1e-9); supercritical profile gives {none}")


def test_09_metrics_fixture(record):
    m = metrics_from_errors([5, 15, 30, 10])
    pop_std = float(np.sqrt(np.mean((np.array([5, 15, 30, 10]) - 15.0) ** 2)))
    ok = (m.mean, m.median, m.max, m.std, m.frac_over_10, m.frac_over_25) == (15, 12.5, 30, pop_std, 50, 25)
    record(9, ok, f"mu={m.mean:g} Med={m.median:g} Max={m.max:g} Std={m.std:.15g} F>10={m.frac_over_10:g} F>25={m.frac_over_25:g}")


def test_10_bookkeeping(record, tmp_path):
    n_rows = 1000
    n_neg = round(n_rows * 259 / 24579)
    lines = ["Dhe_m,P_kPa,G_kgm2s,x,chf_kWm2,dhsub_kJkg,Lh_m"]
    rng = np.random.default_rng(110)
    neg = set(rng.choice(n_rows, n_neg, replace=False).tolist())
    for i in range(n_rows):
        sub = -rng.uniform(1, 50) if i in neg else rng.uniform(0, 500)
        lines.append(f"0.008,{rng.uniform(1000, 15000):.3f},{rng.uniform(500, 6000):.3f},{rng.uniform(-0.3, 0.5):.4f},{rng.uniform(1000, 8000):.2f},{sub:.3f},1.0")
    p = tmp_path / "scaled.csv"
    p.write_text("\n".join(lines) + "\n")
    ing = ingest_csv(p)
    filt = ing.dropped == n_neg == 11 and len(ing.points) == n_rows - n_neg
    holdout = SplitSpec(0.90, 0.05, 0.05).sizes(24320)[2]
    shapes = []
    for i in (4, 5):
        for j in (1, 2, 3, 4):
            c = load_bundled_case(f"ce5x5_ts7{i}_{j}")
            shapes.append((len(c.rods), c.n_channels, c.n_axial, len(c.spacers), c.heated_length, c.L_obs))
    ce = set(shapes) == {(25, 36, 84, 5, 2.13, 1.95)} and len(shapes) == 8
    record(10, filt and holdout == 1216 and ce,
           f"filter kept {len(ing.points)}/{n_rows} (dropped {ing.dropped}, expected {n_neg}); "
           f"24320 at 90/05/05 -> test {holdout}; 8 CE cases are 25 rods/36 ch/84 nodes/5 spacers/2.13 m/1.95 m: {ce}")


def _pipeline(root):
    data = root / "tubes.csv"
    assert main(["synth", "--n", "600", "--noise", "0.03", "--seed", "7", "--out", str(data)]) == 0
    models = root / "models"
    assert main(["train", "--data", str(data), "--kinds", "pure-ml,hybrid-lut", "--max-epochs", "20", "--seed", "7", "--out-dir", str(models)]) == 0
    refs = f"base-lut,{models / 'pure-ml.toml'},{models / 'hybrid-lut.toml'}"
    assert main(["eval-tubes", "--data", str(data), "--models", refs, "--seed", "7", "--out-dir", str(root / "tubes")]) == 0
    assert main(["run-bundle", "ce5x5_ts74_1", "ce5x5_ts75_2", "--models", refs, "--out-dir", str(root / "bundle")]) == 0
    return {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file() and p.suffix in (".csv", ".mlp")}


def test_11_reproducibility(record, tmp_path, capsys):
    a = _pipeline(tmp_path / "run1")
    b = _pipeline(tmp_path / "run2")
    capsys.readouterr()
    same = a.keys() == b.keys() and all(a[k] == b[k] for k in a)
    n_csv = sum(1 for k in a if k.suffix == ".csv")
    record(11, same and n_csv > 0, f"train + eval-tubes + run-bundle rerun: {n_csv} CSV and {len(a) - n_csv} weight files byte-identical: {same}")
