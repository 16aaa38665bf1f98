"""Regenerate the bundled pure-ML and hybrid weights in src/chfbundle/data/models/.

Trains on a synthetic 24,579-point tube set (see chfbundle.synthetic) with the
default configuration and seed 0, exactly as ``chfbundle train`` would.

    python tools/make_builtin_models.py
"""
from pathlib import Path

from chfbundle.evaluation import SplitSpec
from chfbundle.models import ML_IDS, train_models
from chfbundle.synthetic import synthetic_tube_points

OUT = Path(__file__).resolve().parents[1] / "src" / "chfbundle" / "data" / "models"


def main():
    points = [p for p in synthetic_tube_points(24579, seed=0, noise=0.03) if p.dh_sub >= 0]
    print(f"{len(points)} points after the subcooling filter")
    results = train_models(points, ML_IDS, OUT, SplitSpec(seed=0))
    for kind, (_, rep, met) in results.items():
        print(f"{kind}: epochs {rep.epochs_run} best {rep.best_epoch} test mu {met.mean:.2f}% max {met.max:.1f}%")


if __name__ == "__main__":
    main()
