"""CHF lookup table over (P, G, x_e) with trilinear interpolation.

Table values are at the 8 mm reference diameter; other diameters are scaled
by ``(reference_d / D_he) ** exponent`` with D_he clamped first.  Queries
outside the grid box are clamped to the boundary and flagged.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .correlations import ChfModel, ValidityEnvelope
from .errors import InputError

HEADER = ["P_kPa", "G_kgm2s", "x", "chf_kWm2"]


@dataclass(frozen=True)
class DiameterCorrection:
    reference_d: float = 0.008
    exponent: float = 0.5
    clamp: tuple[float, float] = (0.002, 0.045)

    def factor(self, D):
        d = np.clip(np.asarray(D, dtype=float), *self.clamp)
        return (self.reference_d / d) ** self.exponent

    def clamped(self, D):
        D = np.asarray(D, dtype=float)
        return (D < self.clamp[0]) | (D > self.clamp[1])


class LookupTable:
    def __init__(self, p_axis, g_axis, x_axis, values):
        axes = [np.asarray(a, dtype=float) for a in (p_axis, g_axis, x_axis)]
        values = np.asarray(values, dtype=float)
        for name, a in zip("PGx", axes):
            if a.ndim != 1 or a.size < 2 or np.any(np.diff(a) <= 0):
                raise InputError(f"LUT axis {name} must be strictly increasing with >= 2 points")
        if values.shape != tuple(a.size for a in axes):
            raise InputError(f"LUT values shape {values.shape} does not match axes")
        if np.any(~(values > 0)):
            raise InputError("LUT values must all be positive")
        for a in (*axes, values):
            a.setflags(write=False)
        self.p_axis, self.g_axis, self.x_axis = axes
        self.values = values

    @property
    def shape(self):
        return self.values.shape

    @property
    def n_cells(self):
        return self.values.size

    def interpolate(self, P, G, x):
        """Trilinear interpolation; returns (values, clamped_flag)."""
        P, G, x = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (P, G, x)))
        flag = np.zeros(P.shape, dtype=bool)
        idx, wts = [], []
        for axis, q in zip((self.p_axis, self.g_axis, self.x_axis), (P, G, x)):
            flag |= (q < axis[0]) | (q > axis[-1])
            qc = np.clip(q, axis[0], axis[-1])
            i = np.clip(np.searchsorted(axis, qc, side="right") - 1, 0, axis.size - 2)
            t = (qc - axis[i]) / (axis[i + 1] - axis[i])
            idx.append(i)
            wts.append(t)
        (i, j, k), (tp, tg, tx) = idx, wts
        v = self.values

        def lerp(a, b, t):
            # exact at both ends
            return (1.0 - t) * a + t * b

        c00 = lerp(v[i, j, k], v[i, j, k + 1], tx)
        c01 = lerp(v[i, j + 1, k], v[i, j + 1, k + 1], tx)
        c10 = lerp(v[i + 1, j, k], v[i + 1, j, k + 1], tx)
        c11 = lerp(v[i + 1, j + 1, k], v[i + 1, j + 1, k + 1], tx)
        c0 = lerp(c00, c01, tg)
        c1 = lerp(c10, c11, tg)
        return lerp(c0, c1, tp), flag


def load_lut(path) -> LookupTable:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read LUT {path}: {exc}") from exc
    return _parse_lut(text.splitlines(), str(path))


def _parse_lut(lines, source):
    cells = {}
    header_seen = False
    for lineno, line in enumerate(lines, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        row = next(csv.reader([s]))
        if not header_seen:
            if [c.strip() for c in row] != HEADER:
                raise InputError(f"{source}:{lineno}: expected header {','.join(HEADER)}")
            header_seen = True
            continue
        try:
            p, g, x, chf = (float(c) for c in row)
        except ValueError as exc:
            raise InputError(f"{source}:{lineno}: malformed row: {s!r}") from exc
        key = (p, g, x)
        if key in cells:
            raise InputError(f"{source}:{lineno}: duplicate cell at (P,G,x) = {key}")
        if not chf > 0:
            raise InputError(f"{source}:{lineno}: non-positive CHF {chf:g} at (P,G,x) = {key}")
        cells[key] = chf
    if not cells:
        raise InputError(f"{source}: empty LUT")
    axes = [sorted({k[n] for k in cells}) for n in range(3)]
    values = np.empty(tuple(len(a) for a in axes))
    for a, p in enumerate(axes[0]):
        for b, g in enumerate(axes[1]):
            for c, x in enumerate(axes[2]):
                try:
                    values[a, b, c] = cells[(p, g, x)]
                except KeyError:
                    raise InputError(f"{source}: incomplete grid at (P,G,x) = ({p:g}, {g:g}, {x:g})") from None
    return LookupTable(*axes, values)


def default_lut() -> LookupTable:
    """Bundled 7 x 6 x 8 desk-scale grid (see tools/make_lut_grid.py)."""
    ref = resources.files("chfbundle") / "data" / "lut_desk.csv"
    return _parse_lut(ref.read_text().splitlines(), "lut_desk.csv")


class LutModel(ChfModel):
    name = "base-lut"

    def __init__(self, table: LookupTable | None = None, correction: DiameterCorrection | None = None):
        self.table = table if table is not None else default_lut()
        self.correction = correction or DiameterCorrection()
        t = self.table
        self.envelope = ValidityEnvelope(
            P=(t.p_axis[0], t.p_axis[-1]),
            G=(t.g_axis[0], t.g_axis[-1]),
            x_e=(t.x_axis[0], t.x_axis[-1]),
            D_he=self.correction.clamp,
        )

    def predict_arrays(self, D, P, G, x):
        base, flag = self.table.interpolate(P, G, x)
        D = np.broadcast_to(np.asarray(D, dtype=float), base.shape)
        return base * self.correction.factor(D), flag | self.correction.clamped(D)


def lut_predict(table: LookupTable, corr: DiameterCorrection, state) -> tuple[float, bool]:
    return LutModel(table, corr).predict_flagged(state)
