"""Two-unicast layered networks: choke-point analysis, DoF outer bounds,
and delayed-CSIT linear scheme simulation."""

from .network import (
    LayeredNetwork,
    NetworkError,
    UnknownNodeError,
    gen_bottleneck_family,
    gen_double_bottleneck_family,
    gen_no_bottleneck_example,
    parse_network,
    serialize_network,
)
from .cuts import (
    BottleneckRecord,
    BottleneckReport,
    CutQuery,
    IndegreeBudgetError,
    OmniscientRecord,
    detect_bottlenecks,
    detect_omniscient,
    is_cut,
)
from .dof import DofConstraint, DofRegion, build_region, max_sum_dof, sum_dof_membership
from .scheme import (
    BUILTIN_FAMILIES,
    Scheme,
    SchemeError,
    builtin_network,
    builtin_scheme,
    check_csit_legality,
    parse_scheme,
    serialize_scheme,
)
from .sim import (
    ChannelRealization,
    ReconstructionError,
    SignalLedger,
    SimulationError,
    SimulationReport,
    decodable,
    draw_realization,
    execute,
    monte_carlo,
)

__version__ = "0.1.0"

__all__ = [
    "LayeredNetwork",
    "NetworkError",
    "UnknownNodeError",
    "gen_bottleneck_family",
    "gen_double_bottleneck_family",
    "gen_no_bottleneck_example",
    "parse_network",
    "serialize_network",
    "BottleneckRecord",
    "BottleneckReport",
    "CutQuery",
    "IndegreeBudgetError",
    "OmniscientRecord",
    "detect_bottlenecks",
    "detect_omniscient",
    "is_cut",
    "DofConstraint",
    "DofRegion",
    "build_region",
    "max_sum_dof",
    "sum_dof_membership",
    "BUILTIN_FAMILIES",
    "Scheme",
    "SchemeError",
    "builtin_network",
    "builtin_scheme",
    "check_csit_legality",
    "parse_scheme",
    "serialize_scheme",
    "ChannelRealization",
    "ReconstructionError",
    "SignalLedger",
    "SimulationError",
    "SimulationReport",
    "decodable",
    "draw_realization",
    "execute",
    "monte_carlo",
]
