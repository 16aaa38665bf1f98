"""Tube validation runs: one 60-node heated tube per CHF point, read at the outlet."""
from __future__ import annotations

from dataclasses import replace

import numpy as np

from ..props import PropertyTable, default_table
from .case import tube_case
from .solver import march


def tube_exit_states(points, props: PropertyTable | None = None, n_axial: int = 60):
    """Outlet (D_he, P, G, x_e) arrays after marching each point's tube.

    The tube is heated at the point's CHF over its heated length from the
    inlet enthalpy implied by its subcooling; friction is off so the local
    pressure stays at the measured value.
    """
    props = props or default_table()
    out = np.empty((len(points), 4))
    for n, p in enumerate(points):
        h_in = float(props.interp("h_f", p.P)) - p.dh_sub
        case = tube_case(p.D_he, p.L_h, p.P, p.G, h_in, p.exp_chf, n_axial=n_axial, case_id=f"tube{n}")
        prof = march(replace(case, friction_factor=0.0), props)
        h_out = prof.h_out[0]
        x = (h_out - props.interp("h_f", p.P)) / props.interp("h_fg", p.P)
        out[n] = (p.D_he, p.P, p.G, float(x))
    return out

