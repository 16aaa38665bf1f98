"""CHF point ingestion, seeded splitting, and the error-metric suite."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .correlations import LocalState
from .errors import InputError

log = logging.getLogger(__name__)

REQUIRED = ["Dhe_m", "P_kPa", "G_kgm2s", "x", "chf_kWm2"]
OPTIONAL = ["dhsub_kJkg", "Lh_m"]


@dataclass(frozen=True)
class ChfPoint:
    D_he: float
    P: float
    G: float
    x_e: float
    exp_chf: float
    dh_sub: float | None = None
    L_h: float | None = None

    def __post_init__(self):
        if not self.exp_chf > 0:
            raise InputError(f"non-positive experimental CHF {self.exp_chf}")

    @property
    def state(self) -> LocalState:
        return LocalState(self.D_he, self.P, self.G, self.x_e)


@dataclass
class IngestResult:
    points: list[ChfPoint]
    n_read: int
    dropped: int
    warnings: list[str] = field(default_factory=list)


def ingest_csv(path, drop_negative_subcooling: bool = True) -> IngestResult:
    """Read ``Dhe_m,P_kPa,G_kgm2s,x,chf_kWm2[,dhsub_kJkg,Lh_m]`` rows.

    Rows with negative inlet subcooling are dropped when the column exists.
    """
    path = Path(path)
    warnings = []
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(line for line in fh if not line.lstrip().startswith("#"))
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        missing = [c for c in REQUIRED if c not in header]
        if missing:
            raise InputError(f"{path}: header missing columns {','.join(missing)}")
        for c in header:
            if c not in REQUIRED + OPTIONAL:
                warnings.append(f"unknown column {c!r} ignored")
        has_sub = "dhsub_kJkg" in header
        has_len = "Lh_m" in header
        if drop_negative_subcooling and not has_sub:
            warnings.append("no dhsub_kJkg column; subcooling filter not applied")
        col = {c: header.index(c) for c in header}
        points, n_read, dropped = [], 0, 0
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            n_read += 1
            if len(row) != len(header):
                raise InputError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                vals = {c: float(row[i]) for c, i in col.items() if c in REQUIRED + OPTIONAL}
                sub = vals.get("dhsub_kJkg") if has_sub else None
                if drop_negative_subcooling and sub is not None and sub < 0:
                    dropped += 1
                    continue
                points.append(ChfPoint(
                    vals["Dhe_m"], vals["P_kPa"], vals["G_kgm2s"], vals["x"], vals["chf_kWm2"],
                    sub, vals.get("Lh_m") if has_len else None,
                ))
            except (ValueError, InputError) as exc:
                raise InputError(f"{path}: line {lineno}: malformed row: {exc}") from exc
    log.info("ingested %d of %d rows from %s (dropped %d)", len(points), n_read, path, dropped)
    return IngestResult(points, n_read, dropped, warnings)


def write_points(path, points):
    cols = list(REQUIRED)
    if all(p.dh_sub is not None for p in points):
        cols.append("dhsub_kJkg")
    if all(p.L_h is not None for p in points):
        cols.append("Lh_m")
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for p in points:
            row = [p.D_he, p.P, p.G, p.x_e, p.exp_chf]
            if "dhsub_kJkg" in cols:
                row.append(p.dh_sub)
            if "Lh_m" in cols:
                row.append(p.L_h)
            w.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class SplitSpec:
    train: float = 0.90
    val: float = 0.05
    test: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if min(self.train, self.val, self.test) < 0 or abs(self.train + self.val + self.test - 1.0) > 1e-12:
            raise InputError(f"split fractions must be >= 0 and sum to 1: {self}")

    def sizes(self, n: int) -> tuple[int, int, int]:
        """Floor of n * fraction for val/test; the remainder goes to train."""
        # round before flooring so 24320 * 0.05 is 1216, not 1215
        n_val = math.floor(round(n * self.val, 9))
        n_test = math.floor(round(n * self.test, 9))
        return n - n_val - n_test, n_val, n_test


def split(points, spec: SplitSpec):
    points = list(points)
    n_train, n_val, _ = spec.sizes(len(points))
    order = np.random.default_rng(spec.seed).permutation(len(points))
    shuffled = [points[i] for i in order]
    return shuffled[:n_train], shuffled[n_train:n_train + n_val], shuffled[n_train + n_val:]


@dataclass(frozen=True)
class MetricsReport:
    mean: float
    median: float
    max: float
    std: float
    frac_over_10: float
    frac_over_25: float
    n: int

    def as_rows(self):
        return [
            ("mu_error_pct", self.mean),
            ("med_error_pct", self.median),
            ("max_error_pct", self.max),
            ("std_error_pct", self.std),
            ("F_gt10_pct", self.frac_over_10),
            ("F_gt25_pct", self.frac_over_25),
            ("n", self.n),
        ]


def abs_pct_errors(pred, exp) -> np.ndarray:
    pred = np.asarray(pred, dtype=float)
    exp = np.asarray(exp, dtype=float)
    if pred.shape != exp.shape:
        raise InputError(f"length mismatch: {pred.shape} vs {exp.shape}")
    if pred.size == 0:
        raise InputError("no points to score")
    if np.any(~(exp > 0)):
        raise InputError("experimental values must be positive")
    return 100.0 * np.abs(pred - exp) / exp


def metrics_from_errors(eps) -> MetricsReport:
    eps = np.asarray(eps, dtype=float)
    return MetricsReport(
        mean=float(np.mean(eps)),
        median=float(np.median(eps)),
        max=float(np.max(eps)),
        std=float(np.std(eps)),  # population
        frac_over_10=100.0 * float(np.count_nonzero(eps > 10.0)) / eps.size,
        frac_over_25=100.0 * float(np.count_nonzero(eps > 25.0)) / eps.size,
        n=int(eps.size),
    )


def compute_metrics(pred, exp) -> MetricsReport:
    return metrics_from_errors(abs_pct_errors(pred, exp))


# ---------------------------------------------------------------- bundle table

@dataclass
class BundleErrorRow:
    case_id: str
    magnitude: dict[str, float]  # model -> signed % error of CHF at L_obs
    location: dict[str, float | None]  # model -> signed % error of L_cr, None if no crossing


def relative_error(pred, exp) -> float:
    return 100.0 * (pred - exp) / exp


def bundle_error_table(results, truth):
    """Signed relative errors per case and model, plus mean rows.

    ``results`` maps case id -> {model: CaseResult}; ``truth`` maps case id ->
    ``(exp_chf, exp_L_cr)``.  Returns ``(rows, mean_abs, mean_signed)`` where
    the means map model -> (magnitude, location).
    """
    rows = []
    for case_id in sorted(results):
        if case_id not in truth or truth[case_id][0] is None or truth[case_id][1] is None:
            raise InputError(f"missing experimental truth for case {case_id}")
        exp_chf, exp_L = truth[case_id]
        mag, loc = {}, {}
        for model, res in results[case_id].items():
            mag[model] = relative_error(res.chf_at_obs, exp_chf)
            loc[model] = None if res.L_cr is None else relative_error(res.L_cr, exp_L)
        rows.append(BundleErrorRow(case_id, mag, loc))
    models = list(rows[0].magnitude) if rows else []
    mean_abs, mean_signed = {}, {}
    for m in models:
        mags = np.array([r.magnitude[m] for r in rows])
        locs = np.array([r.location[m] for r in rows if r.location[m] is not None], dtype=float)
        mean_abs[m] = (float(np.mean(np.abs(mags))), float(np.mean(np.abs(locs))) if locs.size else None)
        mean_signed[m] = (float(np.mean(mags)), float(np.mean(locs)) if locs.size else None)
    return rows, mean_abs, mean_signed
