"""Closed-form baseline CHF correlations (Bowring, W-3) in local-conditions form.

Coefficient provenance
----------------------
Bowring (1972), AEEW-R 789, SI form as reproduced in Todreas & Kazimi,
*Nuclear Systems I*, and Collier & Thome, *Convective Boiling and
Condensation*.  The inlet-conditions form

    q = (A + B * dh_sub) / (C + L)

is converted to local conditions with the uniform-flux heat balance, which
gives ``q = (A - B * h_fg * x_e) / C`` with ``B = D * G / 4``.

W-3 (Tong 1967), SI form as reproduced in Todreas & Kazimi.  The inlet
enthalpy factor ``0.8258 + 3.413e-4 * (h_f - h_in)`` is the only non-local
term; it is evaluated with a fixed inlet subcooling (default 0 kJ/kg) that
the caller may set.

All coefficients live in ``BOWRING_COEFFS`` / ``W3_COEFFS`` and can be
overridden per instance, or from a CSV with columns ``name,coefficient,value``.
"""
from __future__ import annotations

import abc
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EvaluationError, InputError
from .props import PropertyTable, default_table

AXES = ("P", "G", "x_e", "D_he")


@dataclass(frozen=True)
class LocalState:
    """Local feature vector at one axial node.

    D_he in m, P in kPa, G in kg/m^2/s, x_e dimensionless (negative = subcooled).
    """

    D_he: float
    P: float
    G: float
    x_e: float

    def __post_init__(self):
        if not (self.D_he > 0 and self.P > 0 and self.G > 0 and math.isfinite(self.x_e)):
            raise InputError(f"invalid local state {self}")

    def as_array(self):
        return np.array([self.D_he, self.P, self.G, self.x_e])


@dataclass(frozen=True)
class ValidityEnvelope:
    P: tuple[float, float]
    G: tuple[float, float]
    x_e: tuple[float, float]
    D_he: tuple[float, float]

    def __post_init__(self):
        for axis in AXES:
            lo, hi = getattr(self, axis)
            if not lo < hi:
                raise InputError(f"envelope axis {axis}: min {lo} must be < max {hi}")

    def violations(self, state: LocalState) -> list[str]:
        out = []
        for axis in AXES:
            lo, hi = getattr(self, axis)
            v = getattr(state, axis)
            if v < lo:
                out.append(f"{axis}={v:g} below min {lo:g}")
            elif v > hi:
                out.append(f"{axis}={v:g} above max {hi:g}")
        return out

    def contains(self, D, P, G, x):
        inside = np.ones(np.broadcast(D, P, G, x).shape, dtype=bool)
        for axis, v in zip(AXES, (P, G, x, D)):
            lo, hi = getattr(self, axis)
            inside &= (np.asarray(v) >= lo) & (np.asarray(v) <= hi)
        return inside


@dataclass(frozen=True)
class EnvelopeCheck:
    in_range: bool
    violations: list[str] = field(default_factory=list)


class ChfModel(abc.ABC):
    """Common prediction interface; CHF in kW/m^2.

    Subclasses implement :meth:`predict_arrays`, which takes broadcastable
    arrays ``(D_he, P, G, x_e)`` and returns ``(chf, extrapolated)``.
    """

    name: str = "model"
    envelope: ValidityEnvelope | None = None

    @abc.abstractmethod
    def predict_arrays(self, D, P, G, x): ...

    def predict_flagged(self, state: LocalState) -> tuple[float, bool]:
        chf, flag = self.predict_arrays(
            np.array([state.D_he]), np.array([state.P]), np.array([state.G]), np.array([state.x_e])
        )
        return float(chf[0]), bool(flag[0])

    def predict(self, state: LocalState) -> float:
        return self.predict_flagged(state)[0]

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


def check_envelope(model: ChfModel, state: LocalState) -> EnvelopeCheck:
    if model.envelope is None:
        return EnvelopeCheck(True, [])
    v = model.envelope.violations(state)
    return EnvelopeCheck(not v, v)


def _finite_or_raise(values, name):
    if not np.all(np.isfinite(values)):
        raise EvaluationError(f"{name}: non-finite prediction")
    return values


BOWRING_COEFFS = {
    "p_scale": 0.145,  # 1/MPa, reduced pressure p_R = 0.145 P
    "n0": 2.0,
    "n1": 0.5,
    "a0": 2.317,
    "a1": 0.0143,
    "c0": 0.077,
    "c1": 0.347,
    "g_ref": 1356.0,
    # p_R <= 1
    "f1_e": 18.942, "f1_k": 20.89, "f1_o": 0.917, "f1_d": 1.917,
    "f12_e": 1.316, "f12_k": 2.444, "f12_o": 0.309, "f12_d": 1.309,
    "f3_e": 17.023, "f3_k": 16.658, "f3_o": 0.667, "f3_d": 1.667,
    # p_R > 1
    "f1h_e": -0.368, "f1h_k": 0.648,
    "f12h_e": -0.448, "f12h_k": 0.245,
    "f3h_e": 0.219,
    # both branches
    "f43_e": 1.649,
}

W3_COEFFS = {
    "a0": 2.022, "a1": 0.06238,
    "b0": 0.1722, "b1": 0.01427,
    "e0": 18.177, "e1": 0.5987,
    "g0": 0.1484, "g1": 1.596, "g2": 0.1729, "g3": 2.326, "g4": 3271.0,
    "x0": 1.157, "x1": 0.869,
    "d0": 0.2664, "d1": 0.8357, "d2": 124.1,
    "s0": 0.8258, "s1": 3.413e-4,
}

# P, G and D_he follow the published data ranges.  The local form reaches
# zero CHF at x = A/(B*h_fg), which drops to ~0.013 at the high-G, large-D
# corner of that box, so positivity is only guaranteed for x_e <= 0.
BOWRING_ENVELOPE = ValidityEnvelope(
    P=(200.0, 19000.0), G=(136.0, 18600.0), x_e=(-0.5, 0.0), D_he=(0.002, 0.045)
)
W3_ENVELOPE = ValidityEnvelope(
    P=(6895.0, 15860.0), G=(1356.0, 6780.0), x_e=(-0.15, 0.15), D_he=(0.00508, 0.0178)
)


def _merge(defaults, overrides):
    c = dict(defaults)
    for k, v in (overrides or {}).items():
        if k not in c:
            raise InputError(f"unknown coefficient {k!r}")
        c[k] = float(v)
    return c


class Bowring(ChfModel):
    name = "base-bowring"
    envelope = BOWRING_ENVELOPE

    def __init__(self, props: PropertyTable | None = None, coeffs: dict | None = None):
        self.props = props or default_table()
        self.coeffs = _merge(BOWRING_COEFFS, coeffs)

    def _pressure_functions(self, pr):
        c = self.coeffs
        lo = pr <= 1.0
        with np.errstate(over="ignore", invalid="ignore"):
            f1_lo = (pr ** c["f1_e"] * np.exp(c["f1_k"] * (1 - pr)) + c["f1_o"]) / c["f1_d"]
            f12_lo = (pr ** c["f12_e"] * np.exp(c["f12_k"] * (1 - pr)) + c["f12_o"]) / c["f12_d"]
            f3_lo = (pr ** c["f3_e"] * np.exp(c["f3_k"] * (1 - pr)) + c["f3_o"]) / c["f3_d"]
            f1_hi = pr ** c["f1h_e"] * np.exp(c["f1h_k"] * (1 - pr))
            f12_hi = pr ** c["f12h_e"] * np.exp(c["f12h_k"] * (1 - pr))
            f3_hi = pr ** c["f3h_e"]
        f1 = np.where(lo, f1_lo, f1_hi)
        f2 = f1 / np.where(lo, f12_lo, f12_hi)
        f3 = np.where(lo, f3_lo, f3_hi)
        f4 = f3 * pr ** c["f43_e"]
        return f1, f2, f3, f4

    def predict_arrays(self, D, P, G, x):
        c = self.coeffs
        D, P, G, x = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (D, P, G, x)))
        hfg = self.props.interp("h_fg", P) * 1e3  # J/kg
        pr = c["p_scale"] * P / 1e3
        n = c["n0"] - c["n1"] * pr
        f1, f2, f3, f4 = self._pressure_functions(pr)
        a = c["a0"] * (hfg * D * G / 4.0) * f1 / (1.0 + c["a1"] * f2 * np.sqrt(D) * G)
        b = D * G / 4.0
        denom = c["c0"] * f3 * D * G / (1.0 + c["c1"] * f4 * (G / c["g_ref"]) ** n)
        if np.any(denom <= 0):
            raise EvaluationError(f"{self.name}: non-positive denominator")
        chf = (a - b * hfg * x) / denom / 1e3  # W/m^2 -> kW/m^2
        return _finite_or_raise(chf, self.name), ~self.envelope.contains(D, P, G, x)


class W3(ChfModel):
    name = "base-w3"
    envelope = W3_ENVELOPE

    def __init__(
        self,
        props: PropertyTable | None = None,
        coeffs: dict | None = None,
        inlet_subcooling: float = 0.0,
    ):
        self.props = props or default_table()
        self.coeffs = _merge(W3_COEFFS, coeffs)
        self.inlet_subcooling = float(inlet_subcooling)  # kJ/kg

    def predict_arrays(self, D, P, G, x):
        c = self.coeffs
        D, P, G, x = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (D, P, G, x)))
        p = P / 1e3  # MPa
        with np.errstate(over="ignore"):
            f_p = (c["a0"] - c["a1"] * p) + (c["b0"] - c["b1"] * p) * np.exp((c["e0"] - c["e1"] * p) * x)
        f_g = (c["g0"] - c["g1"] * x + c["g2"] * x * np.abs(x)) * c["g3"] * G + c["g4"]
        f_x = c["x0"] - c["x1"] * x
        f_d = c["d0"] + c["d1"] * np.exp(-c["d2"] * D)
        f_in = c["s0"] + c["s1"] * self.inlet_subcooling
        chf = f_p * f_g * f_x * f_d * f_in
        return _finite_or_raise(chf, self.name), ~self.envelope.contains(D, P, G, x)


def load_coefficient_overrides(path) -> dict[str, dict[str, float]]:
    """Read ``name,coefficient,value`` rows into ``{model: {coefficient: value}}``."""
    path = Path(path)
    out: dict[str, dict[str, float]] = {}
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows or [c.strip() for c in rows[0]] != ["name", "coefficient", "value"]:
        raise InputError(f"{path}: expected header name,coefficient,value")
    known = {"bowring": BOWRING_COEFFS, "w3": W3_COEFFS}
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise InputError(f"{path}: row {i} malformed")
        name, coef, value = (s.strip() for s in row)
        if name not in known or coef not in known[name]:
            raise InputError(f"{path}: row {i} unknown coefficient {name}.{coef}")
        try:
            out.setdefault(name, {})[coef] = float(value)
        except ValueError as exc:
            raise InputError(f"{path}: row {i}: {exc}") from exc
    return out
