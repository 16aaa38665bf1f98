"""Bundle case description, TOML case files, and a square-lattice builder."""
from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..errors import InputError


@dataclass(frozen=True)
class ChannelGeometry:
    area: float  # m^2
    heated_perimeter: float  # m
    wetted_perimeter: float  # m

    def __post_init__(self):
        if not (self.area > 0 and self.heated_perimeter >= 0 and self.wetted_perimeter > 0):
            raise InputError(f"invalid channel geometry {self}")

    @property
    def D_he(self) -> float:
        if self.heated_perimeter == 0:
            return math.inf
        return 4.0 * self.area / self.heated_perimeter

    @property
    def D_hy(self) -> float:
        return 4.0 * self.area / self.wetted_perimeter


@dataclass(frozen=True)
class Gap:
    i: int
    j: int
    width: float  # m


@dataclass(frozen=True)
class Rod:
    diameter: float  # m
    peaking: float
    surfaces: tuple[tuple[int, float], ...]  # (channel, perimeter fraction)


@dataclass(frozen=True)
class Spacer:
    elevation: float  # m
    K: float = 1.0


@dataclass(frozen=True)
class BundleCase:
    channels: tuple[ChannelGeometry, ...]
    gaps: tuple[Gap, ...]
    rods: tuple[Rod, ...]
    heated_length: float
    n_axial: int
    spacers: tuple[Spacer, ...]
    inlet_pressure: float  # kPa
    mass_flux: tuple[float, ...]  # kg/m^2/s per channel
    inlet_enthalpy: float  # kJ/kg
    power: float  # kW
    beta: float = 0.0
    L_obs: float | None = None
    friction_factor: float = 0.02
    case_id: str = "case"
    synthetic: bool = False
    hot_channel: int | None = None
    models: tuple[str, ...] = ()
    exp_chf: float | None = None  # kW/m^2; None -> local heat flux at L_obs
    exp_L_cr: float | None = None  # m; None -> L_obs
    axial_profile: str = "uniform"

    def __post_init__(self):
        n = len(self.channels)
        if n == 0:
            raise InputError(f"{self.case_id}: no channels")
        if self.n_axial < 2:
            raise InputError(f"{self.case_id}: n_axial must be >= 2")
        if not self.heated_length > 0:
            raise InputError(f"{self.case_id}: heated length must be positive")
        if len(self.mass_flux) != n:
            raise InputError(f"{self.case_id}: need one mass flux per channel ({n}), got {len(self.mass_flux)}")
        if any(not g > 0 for g in self.mass_flux):
            raise InputError(f"{self.case_id}: non-positive mass flux")
        if self.beta < 0:
            raise InputError(f"{self.case_id}: beta must be >= 0")
        if self.power < 0:
            raise InputError(f"{self.case_id}: power must be >= 0")
        if self.axial_profile != "uniform":
            raise InputError(f"{self.case_id}: only uniform axial profiles are supported")
        for g in self.gaps:
            if not (0 <= g.i < n and 0 <= g.j < n) or g.i == g.j or not g.width > 0:
                raise InputError(f"{self.case_id}: invalid gap {g}")
        for s in self.spacers:
            if not 0 <= s.elevation <= self.heated_length or s.K < 0:
                raise InputError(f"{self.case_id}: invalid spacer {s}")
        for r in self.rods:
            if not (r.peaking > 0 and r.diameter > 0):
                raise InputError(f"{self.case_id}: invalid rod {r}")
            for ch, frac in r.surfaces:
                if not 0 <= ch < n or frac < 0:
                    raise InputError(f"{self.case_id}: rod surface maps to invalid channel {ch}")
        if self.L_obs is not None and not 0 <= self.L_obs <= self.heated_length:
            raise InputError(f"{self.case_id}: L_obs outside [0, L_h]")
        if self.hot_channel is not None and not 0 <= self.hot_channel < n:
            raise InputError(f"{self.case_id}: hot_channel out of range")

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    @property
    def dz(self) -> float:
        return self.heated_length / self.n_axial

    def elevations(self):
        """Node elevations: centres of n_axial equal cells."""
        return [(k + 0.5) * self.dz for k in range(self.n_axial)]


# ------------------------------------------------------------------ file i/o

def load_case(path) -> BundleCase:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read case file {path}: {exc}") from exc
    return parse_case(text, path.stem)


def bundled_case_ids() -> list[str]:
    root = resources.files("chfbundle") / "data" / "cases"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def load_bundled_case(case_id: str) -> BundleCase:
    ref = resources.files("chfbundle") / "data" / "cases" / f"{case_id}.toml"
    if not ref.is_file():
        raise InputError(f"unknown bundled case {case_id!r}; available: {', '.join(bundled_case_ids())}")
    return parse_case(ref.read_text(), case_id)


def resolve_case(ref: str) -> BundleCase:
    """A path to a case file, or the id of a bundled case."""
    if Path(ref).is_file():
        return load_case(ref)
    return load_bundled_case(ref)


def parse_case(text: str, default_id: str = "case") -> BundleCase:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise InputError(f"{default_id}: {exc}") from exc
    try:
        inlet = doc["inlet"]
        channels = tuple(ChannelGeometry(*map(float, c)) for c in doc["channels"])
        g = inlet["mass_flux_kgm2s"]
        mass_flux = tuple(float(v) for v in g) if isinstance(g, list) else (float(g),) * len(channels)
        truth = doc.get("truth", {})
        return BundleCase(
            channels=channels,
            gaps=tuple(Gap(int(i), int(j), float(w)) for i, j, w in doc.get("gaps", [])),
            rods=tuple(
                Rod(float(r["diameter_m"]), float(r["peaking"]), tuple((int(c), float(f)) for c, f in r["surfaces"]))
                for r in doc.get("rods", [])
            ),
            heated_length=float(doc["heated_length_m"]),
            n_axial=int(doc["n_axial"]),
            spacers=tuple(Spacer(float(z), float(k)) for z, k in doc.get("spacers", [])),
            inlet_pressure=float(inlet["pressure_kPa"]),
            mass_flux=mass_flux,
            inlet_enthalpy=float(inlet["enthalpy_kJkg"]),
            power=float(inlet["power_kW"]),
            beta=float(doc.get("beta_sp", 0.0)),
            L_obs=float(doc["L_obs_m"]) if "L_obs_m" in doc else None,
            friction_factor=float(doc.get("friction_factor", 0.02)),
            case_id=str(doc.get("id", default_id)),
            synthetic=bool(doc.get("synthetic", False)),
            hot_channel=int(doc["hot_channel"]) if "hot_channel" in doc else None,
            models=tuple(doc.get("models", [])),
            exp_chf=float(truth["chf_kWm2"]) if "chf_kWm2" in truth else None,
            exp_L_cr=float(truth["L_cr_m"]) if "L_cr_m" in truth else None,
            axial_profile=str(doc.get("axial_profile", "uniform")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{default_id}: malformed case file ({type(exc).__name__}: {exc})") from exc


def _num(v):
    return repr(float(v))


def dump_case(case: BundleCase) -> str:
    """Serialise to the TOML layout read by :func:`parse_case`."""
    out = [
        f'id = "{case.case_id}"',
        f"synthetic = {'true' if case.synthetic else 'false'}",
        f'axial_profile = "{case.axial_profile}"',
        f"heated_length_m = {_num(case.heated_length)}",
        f"n_axial = {case.n_axial}",
        f"beta_sp = {_num(case.beta)}",
        f"friction_factor = {_num(case.friction_factor)}",
    ]
    if case.L_obs is not None:
        out.append(f"L_obs_m = {_num(case.L_obs)}")
    if case.hot_channel is not None:
        out.append(f"hot_channel = {case.hot_channel}")
    if case.models:
        out.append("models = [" + ", ".join(f'"{m}"' for m in case.models) + "]")
    out.append("spacers = [" + ", ".join(f"[{_num(s.elevation)}, {_num(s.K)}]" for s in case.spacers) + "]")
    out.append("# [area_m2, heated_perimeter_m, wetted_perimeter_m]")
    out.append("channels = [")
    out += [f"  [{_num(c.area)}, {_num(c.heated_perimeter)}, {_num(c.wetted_perimeter)}]," for c in case.channels]
    out.append("]")
    out.append("# [channel_i, channel_j, gap_width_m]")
    out.append("gaps = [")
    out += [f"  [{g.i}, {g.j}, {_num(g.width)}]," for g in case.gaps]
    out.append("]")
    out.append("")
    out.append("[inlet]")
    out.append(f"pressure_kPa = {_num(case.inlet_pressure)}")
    out.append(f"enthalpy_kJkg = {_num(case.inlet_enthalpy)}")
    if len(set(case.mass_flux)) == 1:
        out.append(f"mass_flux_kgm2s = {_num(case.mass_flux[0])}")
    else:
        out.append("mass_flux_kgm2s = [" + ", ".join(_num(g) for g in case.mass_flux) + "]")
    out.append(f"power_kW = {_num(case.power)}")
    if case.exp_chf is not None or case.exp_L_cr is not None:
        out += ["", "[truth]"]
        if case.exp_chf is not None:
            out.append(f"chf_kWm2 = {_num(case.exp_chf)}")
        if case.exp_L_cr is not None:
            out.append(f"L_cr_m = {_num(case.exp_L_cr)}")
    for r in case.rods:
        surf = ", ".join(f"[{c}, {_num(f)}]" for c, f in r.surfaces)
        out += ["", "[[rods]]", f"diameter_m = {_num(r.diameter)}", f"peaking = {_num(r.peaking)}", f"surfaces = [{surf}]"]
    return "\n".join(out) + "\n"


# ------------------------------------------------------------------ builders

def square_lattice(n_side: int, pitch: float, rod_d: float, wall_gap: float):
    """Channels, gaps and rod-surface maps for an ``n_side`` x ``n_side`` rod array in a box.

    Channels sit on an (n_side+1)^2 grid, row-major; rod (a, b) touches the four
    channels around it with a quarter of its perimeter each.  ``wall_gap`` is
    the clearance between the outer rod surfaces and the duct wall.
    """
    m = n_side + 1
    half = rod_d / 2.0 + wall_gap  # rod centre line to duct wall
    rod_area_quarter = math.pi * rod_d**2 / 16.0
    quarter_perim = math.pi * rod_d / 4.0

    def span(k):
        return half if k in (0, m - 1) else pitch

    channels = []
    for r in range(m):
        for c in range(m):
            nrods = sum(
                1
                for a, b in ((r - 1, c - 1), (r - 1, c), (r, c - 1), (r, c))
                if 0 <= a < n_side and 0 <= b < n_side
            )
            h, w = span(r), span(c)
            area = h * w - nrods * rod_area_quarter
            wall = (w if r in (0, m - 1) else 0.0) + (h if c in (0, m - 1) else 0.0)
            channels.append(ChannelGeometry(area, nrods * quarter_perim, nrods * quarter_perim + wall))
    gaps = []
    for r in range(m):
        for c in range(m):
            i = r * m + c
            if c + 1 < m:
                width = pitch - rod_d if 0 < r < m - 1 else half - rod_d / 2.0
                gaps.append(Gap(i, i + 1, width))
            if r + 1 < m:
                width = pitch - rod_d if 0 < c < m - 1 else half - rod_d / 2.0
                gaps.append(Gap(i, i + m, width))
    surfaces = []
    for a in range(n_side):
        for b in range(n_side):
            chans = (a * m + b, a * m + b + 1, (a + 1) * m + b, (a + 1) * m + b + 1)
            surfaces.append(tuple((ch, 0.25) for ch in chans))
    return channels, gaps, surfaces


def tube_case(
    diameter: float,
    heated_length: float,
    pressure: float,
    mass_flux: float,
    inlet_enthalpy: float,
    heat_flux: float,
    n_axial: int = 60,
    case_id: str = "tube",
) -> BundleCase:
    """Single uniformly heated tube: one channel, no gaps, no spacers."""
    area = math.pi * diameter**2 / 4.0
    perim = math.pi * diameter
    power = heat_flux * perim * heated_length
    return BundleCase(
        channels=(ChannelGeometry(area, perim, perim),),
        gaps=(),
        rods=(Rod(diameter, 1.0, ((0, 1.0),)),),
        heated_length=heated_length,
        n_axial=n_axial,
        spacers=(),
        inlet_pressure=pressure,
        mass_flux=(mass_flux,),
        inlet_enthalpy=inlet_enthalpy,
        power=power,
        L_obs=heated_length,
        case_id=case_id,
    )
