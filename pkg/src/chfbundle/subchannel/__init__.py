"""Simplified steady-state subchannel solver."""
from .case import (
    BundleCase,
    ChannelGeometry,
    Gap,
    Rod,
    Spacer,
    bundled_case_ids,
    dump_case,
    load_bundled_case,
    load_case,
    parse_case,
    resolve_case,
    square_lattice,
    tube_case,
)
from .solver import (
    AxialProfileResult,
    CaseResult,
    SweepRow,
    ThermalProfile,
    beta_sensitivity,
    bracketing_nodes,
    channel_linear_power,
    evaluate_chf,
    extract,
    find_critical,
    limiting_channel,
    magnitude_at,
    march,
    mix_step,
    solve_case,
)
from .tubes import tube_exit_states
