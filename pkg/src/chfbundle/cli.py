"""Command-line runner: ``chfbundle {synth,train,eval-tubes,run-bundle,beta-sweep,report}``.

Every subcommand writes CSV files into ``--out-dir``.  Failures print one line
``error code=<n> kind=<Exception> message="..."`` on stderr and exit with
2 (input), 3 (solver) or 4 (model).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ChfError, InputError
from .evaluation import SplitSpec, bundle_error_table, compute_metrics, ingest_csv, split, write_points
from .mlp import TrainConfig, random_search
from .models import BUILTIN_IDS, ML_IDS, _arrays, config_with, resolve_models, train_models
from .subchannel import beta_sensitivity, evaluate_chf, extract, march, resolve_case, tube_exit_states
from .synthetic import TRUTHS, synthetic_tube_points

log = logging.getLogger("chfbundle")


def fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return f"{float(v):.10g}"


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    log.info("wrote %s", path)
    return path


# ---------------------------------------------------------------- subcommands

def cmd_synth(args):
    pts = synthetic_tube_points(args.n, seed=args.seed, truth=args.truth, noise=args.noise)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_points(out, pts)
    print(f"wrote {len(pts)} points to {out}")


def _train_config(args):
    cfg = TrainConfig(seed=args.seed)
    return config_with(cfg, max_epochs=args.max_epochs, learning_rate=args.lr, batch_size=args.batch_size)


def cmd_train(args):
    ing = ingest_csv(args.data)
    for w in ing.warnings:
        log.warning(w)
    print(f"ingested {len(ing.points)} points, dropped {ing.dropped}")
    spec = SplitSpec(seed=args.seed)
    cfg = _train_config(args)
    if args.search:
        tr, va, _ = split(ing.points, spec)
        cfg, trials = random_search(_arrays(tr), _arrays(va), args.search, seed=args.seed, base=cfg)
        write_csv(
            Path(args.out_dir) / "search_trials.csv",
            ["trial", "hidden", "learning_rate", "batch_size", "l2", "best_val_loss"],
            [(i, "x".join(map(str, c.hidden)), c.learning_rate, c.batch_size, c.l2, s) for i, (c, s) in enumerate(trials)],
        )
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    results = train_models(ing.points, kinds, args.out_dir, spec, cfg)
    rows = []
    for kind, (_, rep, met) in results.items():
        rows.append((kind, rep.epochs_run, rep.best_epoch, rep.best_val_loss, rep.final_lr, *[v for _, v in met.as_rows()]))
        write_csv(
            Path(args.out_dir) / f"history_{kind}.csv",
            ["epoch", "train_loss", "val_loss"],
            [(i + 1, a, b) for i, (a, b) in enumerate(rep.history)],
        )
    metric_names = [k for k, _ in next(iter(results.values()))[2].as_rows()]
    write_csv(
        Path(args.out_dir) / "train_report.csv",
        ["model", "epochs_run", "best_epoch", "best_val_loss", "final_lr", *metric_names],
        rows,
    )


def cmd_eval_tubes(args):
    ing = ingest_csv(args.data)
    for w in ing.warnings:
        log.warning(w)
    points = ing.points
    if args.test_split:
        points = split(points, SplitSpec(seed=args.seed))[2]
    if not points:
        raise InputError("no points to evaluate")
    models = resolve_models(args.models)
    if all(p.dh_sub is not None and p.L_h is not None for p in points):
        states = tube_exit_states(points, n_axial=args.nodes)
    else:
        log.warning("inlet columns missing; evaluating models at the tabulated local states")
        states = _arrays(points)[0]
    exp = np.array([p.exp_chf for p in points])
    preds, reports = {}, {}
    for m in models:
        preds[m.name], _ = m.predict_arrays(*states.T)
        reports[m.name] = compute_metrics(preds[m.name], exp)
    names = list(reports)
    metric_rows = [k for k, _ in reports[names[0]].as_rows()]
    write_csv(
        Path(args.out_dir) / "tube_metrics.csv",
        ["metric", *names],
        [(k, *[dict(reports[n].as_rows())[k] for n in names]) for k in metric_rows],
    )
    write_csv(
        Path(args.out_dir) / "tube_predictions.csv",
        ["Dhe_m", "P_kPa", "G_kgm2s", "x_exit", "chf_exp_kWm2", *names],
        [(*states[i], exp[i], *[preds[n][i] for n in names]) for i in range(len(points))],
    )
    for n in names:
        r = reports[n]
        print(f"{n}: mu={r.mean:.3f}% med={r.median:.3f}% max={r.max:.3f}% n={r.n}")


def _case_models(case, args):
    if args.models:
        return resolve_models(args.models)
    return resolve_models(list(case.models) or list(BUILTIN_IDS))


def cmd_run_bundle(args):
    out = Path(args.out_dir)
    results, truth = {}, {}
    for ref in args.cases:
        case = resolve_case(ref)
        models = _case_models(case, args)
        thermal = march(case)
        per_model = {}
        for m in models:
            prof = evaluate_chf(thermal, m)
            res = extract(case, prof)
            per_model[m.name] = res
            write_csv(out / f"profile_{case.case_id}_{m.name}.csv",
                      ["channel", "z_m", "P_kPa", "G_kgm2s", "x", "qpp_kWm2", "chf_kWm2", "dnbr"],
                      _profile_rows(prof))
        results[case.case_id] = per_model
        exp_chf = case.exp_chf
        if exp_chf is None and case.hot_channel is not None:
            exp_chf = float(thermal.q_flux[case.hot_channel])
        truth[case.case_id] = (exp_chf, case.exp_L_cr if case.exp_L_cr is not None else case.L_obs)
        _write_summary(out / f"summary_{case.case_id}.csv", case, per_model, truth[case.case_id])
    if all(t[0] is not None and t[1] is not None for t in truth.values()):
        rows, mean_abs, mean_signed = bundle_error_table(results, truth)
        names = list(rows[0].magnitude)
        table = []
        for r in rows:
            table.append((r.case_id, "magnitude", *[r.magnitude[n] for n in names]))
            table.append((r.case_id, "location", *[r.location[n] for n in names]))
        table.append(("mean_abs", "magnitude", *[mean_abs[n][0] for n in names]))
        table.append(("mean_abs", "location", *[mean_abs[n][1] for n in names]))
        table.append(("mean_signed", "magnitude", *[mean_signed[n][0] for n in names]))
        table.append(("mean_signed", "location", *[mean_signed[n][1] for n in names]))
        write_csv(out / "error_table.csv", ["case", "quantity", *names], table)
    for case_id, per_model in sorted(results.items()):
        for name, res in per_model.items():
            lcr = "none" if res.L_cr is None else f"{res.L_cr:.4f}"
            print(f"{case_id} {name}: limiting={res.limiting_channel} L_cr={lcr} chf@obs={fmt(res.chf_at_obs)} min_dnbr={res.min_dnbr:.4f}")


def _profile_rows(prof):
    th = prof.thermal
    for ch in range(th.n_channels):
        for k in range(th.z.size):
            yield (ch, th.z[k], th.P[ch, k], th.G[ch], th.x[ch, k], th.q_flux[ch], prof.chf[ch, k], prof.dnbr[ch, k])


def _write_summary(path, case, per_model, truth):
    names = list(per_model)
    exp_chf, exp_L = truth

    def err(pred, exp):
        return None if pred is None or exp is None else 100.0 * (pred - exp) / exp

    rows = [
        ("limiting_channel", *[per_model[n].limiting_channel for n in names]),
        ("L_cr_m", *[per_model[n].L_cr for n in names]),
        ("inlet_chf", *[per_model[n].inlet_chf for n in names]),
        ("chf_at_obs_kWm2", *[per_model[n].chf_at_obs for n in names]),
        ("min_dnbr", *[per_model[n].min_dnbr for n in names]),
        ("limiting_is_hot_channel", *[None if case.hot_channel is None else per_model[n].limiting_channel == case.hot_channel for n in names]),
        ("err_magnitude_pct", *[err(per_model[n].chf_at_obs, exp_chf) for n in names]),
        ("err_location_pct", *[err(per_model[n].L_cr, exp_L) for n in names]),
    ]
    write_csv(path, ["quantity", *names], rows)


def cmd_beta_sweep(args):
    case = resolve_case(args.case)
    (model,) = resolve_models([args.model])
    try:
        betas = [float(b) for b in args.betas.split(",") if b.strip()]
    except ValueError as exc:
        raise InputError(f"bad --betas list {args.betas!r}: {exc}") from exc
    rows = beta_sensitivity(case, model, betas)
    ref = rows[0].chf_at_obs
    write_csv(
        Path(args.out_dir) / f"beta_sweep_{case.case_id}_{model.name}.csv",
        ["beta_sp", "chf_at_obs_kWm2", "rel_to_first_pct", "L_cr_m", "min_dnbr", "channel"],
        [(r.beta, r.chf_at_obs, 100.0 * (r.chf_at_obs - ref) / ref, r.L_cr, r.min_dnbr, r.channel) for r in rows],
    )
    for r in rows:
        print(f"beta={r.beta:g} chf@obs={r.chf_at_obs:.2f} kW/m2")


def cmd_report(args):
    case = resolve_case(args.case)
    models = _case_models(case, args)
    thermal = march(case)
    profs = [evaluate_chf(thermal, m) for m in models]
    ch = case.hot_channel if case.hot_channel is not None else extract(case, profs[0]).limiting_channel
    rows = [(thermal.z[k], *[p.dnbr[ch, k] for p in profs]) for k in range(thermal.z.size)]
    write_csv(Path(args.out_dir) / f"axial_dnbr_{case.case_id}.csv", ["z_m", *[m.name for m in models]], rows)
    print(f"hot channel {ch}; reference L_cr = {fmt(case.L_obs)} m")


# ---------------------------------------------------------------- entry point

def build_parser():
    p = argparse.ArgumentParser(prog="chfbundle", description="CHF model comparison in tubes and rod bundles")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("--out-dir", default="out", help="output directory (default: out)")
        if seed:
            sp.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("synth", help="write a synthetic tube CHF dataset")
    s.add_argument("--n", type=int, default=24579)
    s.add_argument("--truth", choices=TRUTHS, default="lut-skewed")
    s.add_argument("--noise", type=float, default=0.03)
    s.add_argument("--out", default="out/synthetic_tubes.csv")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("train", help="fit pure-ML and residual models from a CHF CSV")
    s.add_argument("--data", required=True)
    s.add_argument("--kinds", default=",".join(ML_IDS))
    s.add_argument("--max-epochs", type=int)
    s.add_argument("--lr", type=float)
    s.add_argument("--batch-size", type=int)
    s.add_argument("--search", type=int, default=0, help="random-search trials before the final fit")
    common(s)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval-tubes", help="60-node tube runs over a holdout CSV")
    s.add_argument("--data", required=True)
    s.add_argument("--models", default=",".join(BUILTIN_IDS))
    s.add_argument("--nodes", type=int, default=60)
    s.add_argument("--test-split", action="store_true", help="score only the seeded 5%% test partition")
    common(s)
    s.set_defaults(func=cmd_eval_tubes)

    s = sub.add_parser("run-bundle", help="solve bundle cases with a list of CHF models")
    s.add_argument("cases", nargs="+", help="case file paths or bundled ids")
    s.add_argument("--models", help="comma list of builtin ids or manifest paths (default: the case's list)")
    common(s)
    s.set_defaults(func=cmd_run_bundle)

    s = sub.add_parser("beta-sweep", help="CHF at the observed elevation versus mixing coefficient")
    s.add_argument("case", nargs="?", default="ce5x5_ts74_1")
    s.add_argument("--betas", default="0,0.002,0.0044,0.01")
    s.add_argument("--model", default="base-lut")
    common(s)
    s.set_defaults(func=cmd_beta_sweep)

    s = sub.add_parser("report", help="axial DNBR curves of the hot channel per model")
    s.add_argument("case")
    s.add_argument("--models")
    common(s)
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ChfError as exc:
        print(f"error code={exc.exit_code} kind={type(exc).__name__} message={json.dumps(str(exc))}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
