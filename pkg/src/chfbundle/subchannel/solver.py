"""Steady axial marching with turbulent mixing, DNBR evaluation and CHF extraction.

Nodes sit at the centres of ``n_axial`` equal cells.  Enthalpy is marched
explicitly: a half cell from the inlet to node 0, full cells between nodes,
and a final half cell to the outlet plane.  Mixing over a cell uses the
enthalpies at the cell's upstream node, so each exchange is exactly
antisymmetric and bundle energy is conserved to round-off.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..correlations import ChfModel
from ..errors import ChfError, PropertyRangeError, SolverError
from ..props import PropertyTable, default_table
from .case import BundleCase


@dataclass
class ThermalProfile:
    z: np.ndarray  # (n,)
    P: np.ndarray  # (nch, n) kPa
    G: np.ndarray  # (nch,)
    h: np.ndarray  # (nch, n) kJ/kg
    x: np.ndarray  # (nch, n)
    q_linear: np.ndarray  # (nch,) kW/m
    q_flux: np.ndarray  # (nch,) kW/m^2, channel-average over heated perimeter
    h_out: np.ndarray  # (nch,) enthalpy at z = L_h
    D_he: np.ndarray  # (nch,)

    @property
    def n_channels(self):
        return self.h.shape[0]


@dataclass
class AxialProfileResult:
    thermal: ThermalProfile
    model: str
    chf: np.ndarray  # (nch, n) kW/m^2
    dnbr: np.ndarray  # (nch, n); inf where the channel is unheated


@dataclass
class CaseResult:
    case_id: str
    model: str
    limiting_channel: int
    L_cr: float | None
    inlet_chf: bool
    chf_at_obs: float | None
    q_flux_at_obs: float | None
    min_dnbr: float
    profile: AxialProfileResult


def channel_linear_power(case: BundleCase) -> np.ndarray:
    """kW/m deposited in each channel for a uniform axial profile."""
    heated = sum(r.peaking * math.pi * r.diameter * sum(f for _, f in r.surfaces) for r in case.rods)
    q_lin = np.zeros(case.n_channels)
    if case.power == 0 or heated == 0:
        return q_lin
    q_avg = case.power / (heated * case.heated_length)  # kW/m^2 at peaking 1
    for r in case.rods:
        for ch, frac in r.surfaces:
            q_lin[ch] += r.peaking * q_avg * frac * math.pi * r.diameter
    return q_lin


def mix_step(h_i: float, h_j: float, G_i: float, G_j: float, gap: float, beta: float, dz: float) -> float:
    """Enthalpy flow (kW) carried into channel i from j over one cell.

    Turbulent exchange rate per unit length is ``beta * gap * mean(G)``; the
    caller adds the result to i and subtracts it from j.
    """
    w = beta * gap * 0.5 * (G_i + G_j)
    return dz * w * (h_j - h_i)


def _mixing(case: BundleCase, h: np.ndarray, G: np.ndarray, dz: float) -> np.ndarray:
    out = np.zeros_like(h)
    if case.beta == 0:
        return out
    for g in case.gaps:
        e = mix_step(h[g.i], h[g.j], G[g.i], G[g.j], g.width, case.beta, dz)
        out[g.i] += e
        out[g.j] -= e
    return out


def _density(props: PropertyTable, P, x):
    rho_f = props.interp("rho_f", P)
    rho_g = props.interp("rho_g", P)
    xc = np.clip(x, 0.0, 1.0)
    return 1.0 / ((1.0 - xc) / rho_f + xc / rho_g)


def march(case: BundleCase, props: PropertyTable | None = None) -> ThermalProfile:
    props = props or default_table()
    n, nch, dz = case.n_axial, case.n_channels, case.dz
    z = np.array(case.elevations())
    G = np.array(case.mass_flux, dtype=float)
    area = np.array([c.area for c in case.channels])
    d_hy = np.array([c.D_hy for c in case.channels])
    heated_perim = np.array([c.heated_perimeter for c in case.channels])
    flow = G * area  # kg/s
    q_lin = channel_linear_power(case)
    with np.errstate(divide="ignore", invalid="ignore"):
        q_flux = np.where(heated_perim > 0, q_lin / heated_perim, 0.0)

    # spacer losses land on the node nearest each grid
    spacer_K = np.zeros(n)
    for s in case.spacers:
        k = min(int(s.elevation / dz), n - 1)
        spacer_K[k] += s.K

    h = np.empty((nch, n))
    P = np.empty((nch, n))
    x = np.empty((nch, n))
    h_prev = np.full(nch, case.inlet_enthalpy)
    P_prev = np.full(nch, case.inlet_pressure)
    step = 0.5 * dz
    for k in range(n):
        try:
            x_prev = (h_prev - props.interp("h_f", P_prev)) / props.interp("h_fg", P_prev)
            rho = _density(props, P_prev, x_prev)
        except PropertyRangeError as exc:
            raise SolverError(f"{case.case_id}: property range exceeded at node {k}: {exc}") from exc
        h_new = h_prev + (q_lin * step + _mixing(case, h_prev, G, step)) / flow
        dyn = G * G / (2.0 * rho) / 1e3  # kPa
        P_new = P_prev - case.friction_factor * step / d_hy * dyn - spacer_K[k] * dyn
        try:
            x_new = (h_new - props.interp("h_f", P_new)) / props.interp("h_fg", P_new)
        except PropertyRangeError as exc:
            raise SolverError(f"{case.case_id}: property range exceeded at node {k}: {exc}") from exc
        h[:, k], P[:, k], x[:, k] = h_new, P_new, x_new
        h_prev, P_prev = h_new, P_new
        step = dz
    h_out = h_prev + (q_lin * 0.5 * dz + _mixing(case, h_prev, G, 0.5 * dz)) / flow
    D_he = np.array([c.D_he for c in case.channels])
    return ThermalProfile(z, P, G, h, x, q_lin, q_flux, h_out, D_he)


def evaluate_chf(profile: ThermalProfile, model: ChfModel) -> AxialProfileResult:
    nch, n = profile.h.shape
    D = np.repeat(profile.D_he[:, None], n, axis=1)
    Gm = np.repeat(profile.G[:, None], n, axis=1)
    heated = profile.q_flux > 0
    D_eval = np.where(np.isfinite(D), D, 1.0)  # unheated channels: value unused
    try:
        chf, _ = model.predict_arrays(D_eval, profile.P, Gm, profile.x)
    except ChfError as exc:
        raise SolverError(f"model {model.name} failed: {exc}") from exc
    bad = heated[:, None] & ~(chf > 0)
    if np.any(bad):
        ch, k = np.argwhere(bad)[0]
        raise SolverError(
            f"model {model.name} predicted non-positive CHF {chf[ch, k]:.6g} kW/m2 "
            f"at channel {ch}, node {k} (z = {profile.z[k]:.4f} m)"
        )
    with np.errstate(divide="ignore"):
        dnbr = np.where(heated[:, None], chf / np.where(heated, profile.q_flux, 1.0)[:, None], np.inf)
    return AxialProfileResult(profile, model.name, chf, dnbr)


def find_critical(z, dnbr) -> tuple[float | None, bool]:
    """First downward crossing of DNBR = 1, linearly interpolated.

    Returns ``(L_cr, inlet_flag)``; ``(None, False)`` when DNBR never drops
    below 1 and ``(0.0, True)`` when it is already below 1 at the first node.
    """
    z = np.asarray(z, dtype=float)
    d = np.asarray(dnbr, dtype=float)
    if np.any(np.isnan(d)):
        raise SolverError("DNBR profile contains NaN")
    if d[0] < 1.0:
        return 0.0, True
    for k in range(d.size - 1):
        if d[k] >= 1.0 and d[k + 1] < 1.0:
            t = (d[k] - 1.0) / (d[k] - d[k + 1])
            return float(z[k] + t * (z[k + 1] - z[k])), False
    return None, False


def magnitude_at(z, values, L_obs: float) -> float:
    """Linear interpolation of a nodal quantity at ``L_obs`` (end values held outside the nodes)."""
    return float(np.interp(L_obs, z, values))


def bracketing_nodes(z, L_obs: float) -> tuple[int, int]:
    z = np.asarray(z)
    k = int(np.clip(np.searchsorted(z, L_obs, side="right") - 1, 0, z.size - 2))
    return k, k + 1


def limiting_channel(result: AxialProfileResult) -> int:
    return int(np.argmin(result.dnbr.min(axis=1)))


def extract(case: BundleCase, result: AxialProfileResult) -> CaseResult:
    lim = limiting_channel(result)
    z = result.thermal.z
    L_cr, inlet = find_critical(z, result.dnbr[lim])
    chf_obs = q_obs = None
    if case.L_obs is not None:
        chf_obs = magnitude_at(z, result.chf[lim], case.L_obs)
        q_obs = float(result.thermal.q_flux[lim])
    return CaseResult(
        case.case_id, result.model, lim, L_cr, inlet, chf_obs, q_obs, float(result.dnbr[lim].min()), result
    )


def solve_case(case: BundleCase, model: ChfModel, props: PropertyTable | None = None) -> CaseResult:
    return extract(case, evaluate_chf(march(case, props), model))


@dataclass
class SweepRow:
    beta: float
    chf_at_obs: float
    L_cr: float | None
    min_dnbr: float
    channel: int


def beta_sensitivity(case: BundleCase, model: ChfModel, betas, props: PropertyTable | None = None) -> list[SweepRow]:
    """One solve per mixing coefficient; CHF is read in the case's hot channel
    (or each run's limiting channel when none is declared)."""
    if case.L_obs is None:
        raise SolverError(f"{case.case_id}: beta sweep needs L_obs")
    rows = []
    for b in betas:
        if b < 0:
            raise SolverError(f"negative mixing coefficient {b}")
        res = solve_case(replace(case, beta=float(b)), model, props)
        ch = case.hot_channel if case.hot_channel is not None else res.limiting_channel
        z = res.profile.thermal.z
        L_cr, _ = find_critical(z, res.profile.dnbr[ch])
        rows.append(SweepRow(float(b), magnitude_at(z, res.profile.chf[ch], case.L_obs), L_cr,
                             float(res.profile.dnbr[ch].min()), ch))
    return rows
