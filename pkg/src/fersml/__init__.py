"""FerSML: footballer and football simulation markup, with a seeded match engine."""

from fersml.model import (
    Avatar,
    Coach,
    Estimations,
    Factor,
    FersmlDocument,
    Formation,
    ImpactOfSkills,
    LineupEntry,
    Person,
    PlayerPosition,
    ProbTable,
    SimulationSpec,
    Skills,
    interpolate_prob,
    resolve_lineup,
    skill_weighted_score,
    validate_document,
)
from fersml.xmlio import (
    FersmlSyntaxError,
    ParseDiagnostic,
    check_fersml,
    load_fersml,
    parse_fersml,
    sample_document,
    serialize_fersml,
)

__version__ = "0.1.0"
