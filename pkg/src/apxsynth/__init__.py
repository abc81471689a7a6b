"""Approximate logic synthesis of small arithmetic circuits.

Searches, through an external SMT solver over parametrisable sum-of-products
templates, for approximate circuits whose worst-case error never exceeds a
threshold, using template-level proxies (products in total, product sharing)
to steer towards low synthesised area.
"""

from .area import AreaReport, CellLibrary, default_library, estimate_area, load_library
from .error import (
    DistKind,
    ErrorSpec,
    MapKind,
    SoundnessReport,
    dist,
    is_sound,
    map_value,
    worst_case_error,
)
from .explore import (
    ExplorationResult,
    Schedule,
    StopPolicy,
    default_schedule,
    explore,
    pareto_front,
)
from .netlist import (
    Circuit,
    Gate,
    array_multiplier,
    emit_netlist,
    emit_verilog,
    evaluate,
    parse_netlist,
    ripple_adder,
    truth_table,
)
from .smt import (
    MiterProblem,
    SolverOutcome,
    SolverStatus,
    decode_model,
    encode_miter,
    solve,
    solver_command,
)
from .template import (
    NonsharedTemplate,
    ParameterAssignment,
    ProxyBounds,
    Selector,
    SharedTemplate,
    TemplateFamily,
    as_shared,
    count_its,
    count_lpp,
    count_pit,
    count_ppo,
    format_assignment,
    instantiate,
    parse_assignment,
    random_assignment,
)

__version__ = "0.1.0"

__all__ = [
    "AreaReport",
    "CellLibrary",
    "Circuit",
    "DistKind",
    "ErrorSpec",
    "ExplorationResult",
    "Gate",
    "MapKind",
    "MiterProblem",
    "NonsharedTemplate",
    "ParameterAssignment",
    "ProxyBounds",
    "Schedule",
    "Selector",
    "SharedTemplate",
    "SolverOutcome",
    "SolverStatus",
    "SoundnessReport",
    "StopPolicy",
    "TemplateFamily",
    "array_multiplier",
    "as_shared",
    "count_its",
    "count_lpp",
    "count_pit",
    "count_ppo",
    "decode_model",
    "default_library",
    "default_schedule",
    "dist",
    "emit_netlist",
    "emit_verilog",
    "encode_miter",
    "estimate_area",
    "evaluate",
    "explore",
    "format_assignment",
    "instantiate",
    "is_sound",
    "load_library",
    "map_value",
    "parse_assignment",
    "parse_netlist",
    "pareto_front",
    "random_assignment",
    "ripple_adder",
    "solve",
    "solver_command",
    "truth_table",
    "worst_case_error",
]
