"""Saturated water/steam properties from a piecewise-linear pressure table.

Units are kPa, kJ/kg, kg/m^3 and K throughout.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import EvaluationError, InputError, PropertyRangeError

HEADER = ["P_kPa", "hf_kJkg", "hfg_kJkg", "rhof_kgm3", "rhog_kgm3", "Tsat_K"]
FIELDS = ["P", "h_f", "h_fg", "rho_f", "rho_g", "T_sat"]


@dataclass(frozen=True)
class SatProps:
    P: float
    h_f: float
    h_fg: float
    rho_f: float
    rho_g: float
    T_sat: float


class PropertyTable:
    """Immutable saturation table; one row per pressure knot."""

    def __init__(self, rows):
        data = np.asarray(rows, dtype=float)
        if data.ndim != 2 or data.shape[1] != len(FIELDS):
            raise InputError(f"property table needs {len(FIELDS)} columns")
        if data.shape[0] < 2:
            raise InputError("insufficient rows: property table needs at least 2")
        if np.any(np.diff(data[:, 0]) <= 0):
            raise InputError("non-monotone pressure in property table")
        data.setflags(write=False)
        self._data = data

    @property
    def n_knots(self) -> int:
        return self._data.shape[0]

    @property
    def p_min(self) -> float:
        return float(self._data[0, 0])

    @property
    def p_max(self) -> float:
        return float(self._data[-1, 0])

    def column(self, name: str) -> np.ndarray:
        return self._data[:, FIELDS.index(name)]

    def _check_range(self, P):
        P = np.asarray(P, dtype=float)
        if np.any(~np.isfinite(P)) or np.any(P < self.p_min) or np.any(P > self.p_max):
            bad = P[(P < self.p_min) | (P > self.p_max) | ~np.isfinite(P)].ravel()[0]
            raise PropertyRangeError(
                f"pressure {bad:g} kPa outside table range [{self.p_min:g}, {self.p_max:g}] kPa"
            )
        return P

    def interp(self, name: str, P):
        """Vectorised piecewise-linear lookup of one field."""
        P = self._check_range(P)
        # np.interp returns stored values exactly at knots
        return np.interp(P, self._data[:, 0], self.column(name))


def load_property_table(path) -> PropertyTable:
    """Read a property CSV (see ``HEADER``); ``#`` lines are comments."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read property table {path}: {exc}") from exc
    return _parse_table(text.splitlines(), str(path))


def _parse_table(lines, source):
    rows = []
    header_seen = False
    last_p = None
    for lineno, line in enumerate(lines, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        cells = next(csv.reader([s]))
        if not header_seen:
            if [c.strip() for c in cells] != HEADER:
                raise InputError(f"{source}:{lineno}: expected header {','.join(HEADER)}")
            header_seen = True
            continue
        if len(cells) != len(HEADER):
            raise InputError(f"{source}:{lineno}: malformed row, expected {len(HEADER)} fields")
        try:
            row = [float(c) for c in cells]
        except ValueError as exc:
            raise InputError(f"{source}:{lineno}: malformed row: {exc}") from exc
        if last_p is not None and row[0] <= last_p:
            raise InputError(f"{source}:{lineno}: non-monotone pressure {row[0]:g} kPa")
        last_p = row[0]
        rows.append(row)
    if not header_seen:
        raise InputError(f"{source}: empty property table")
    if len(rows) < 2:
        raise InputError(f"{source}: insufficient rows ({len(rows)}), need at least 2")
    return PropertyTable(rows)


def default_table() -> PropertyTable:
    """The bundled 50-knot IAPWS-IF97 table (100 to 21,000 kPa)."""
    global _DEFAULT
    if _DEFAULT is None:
        ref = resources.files("chfbundle") / "data" / "steam_table.csv"
        _DEFAULT = _parse_table(ref.read_text().splitlines(), "steam_table.csv")
    return _DEFAULT


_DEFAULT = None


def saturation(table: PropertyTable, P: float) -> SatProps:
    table._check_range(P)
    vals = [float(table.interp(name, P)) for name in FIELDS[1:]]
    return SatProps(float(P), *vals)


def equilibrium_quality(h, sat: SatProps):
    """x_e = (h - h_f) / h_fg; negative when subcooled."""
    if not sat.h_fg > 0:
        raise EvaluationError(f"h_fg = {sat.h_fg:g} at P = {sat.P:g} kPa; quality undefined")
    return (h - sat.h_f) / sat.h_fg
