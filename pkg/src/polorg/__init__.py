"""polorg: model and explore power, influence and mood in organisation charts."""

from .model import (
    Diagnostic,
    Entity,
    EntityId,
    FormalEdge,
    InformalEdge,
    Mood,
    OrgError,
    OrgModel,
    Severity,
    Span,
    canonical_order,
    depth,
    validate,
)
from .dsl import ParseResult, format_model, parse
from .analysis import (
    AccessStatus,
    Delivery,
    EdgeKind,
    InfluenceMode,
    InfluenceRanking,
    MoodChange,
    PropagationParams,
    PropagationTrace,
    Scenario,
    Termination,
    TerminationKind,
    access_report,
    diff_moods,
    influence_rank,
    parse_scenario,
    propagate,
    whatif,
)
from .render import LayoutPlan, RenderOptions, layout, to_dot, to_svg

__version__ = "0.1.0"

__all__ = [
    "AccessStatus",
    "Delivery",
    "Diagnostic",
    "EdgeKind",
    "Entity",
    "EntityId",
    "FormalEdge",
    "InformalEdge",
    "InfluenceMode",
    "InfluenceRanking",
    "LayoutPlan",
    "Mood",
    "MoodChange",
    "OrgError",
    "OrgModel",
    "ParseResult",
    "PropagationParams",
    "PropagationTrace",
    "RenderOptions",
    "Scenario",
    "Severity",
    "Span",
    "Termination",
    "TerminationKind",
    "access_report",
    "canonical_order",
    "depth",
    "diff_moods",
    "format_model",
    "influence_rank",
    "layout",
    "parse",
    "parse_scenario",
    "propagate",
    "to_dot",
    "to_svg",
    "validate",
    "whatif",
]
