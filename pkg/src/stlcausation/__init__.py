"""Online monitoring of discrete-time STL with robustness intervals and causation."""

from .causation import (
    CausationOutput,
    QuantitativeCausationMonitor,
    derive_bcaum,
    qcaum_step,
    reconstruct_clam,
)
from .classic import (
    ClassicMonitor,
    RobustnessInterval,
    Verdict,
    clam_offline_check,
    clam_step,
    derive_verdict,
)
from .engine import DEQUE, NAIVE, Engine
from .epochs import (
    BooleanCausationMonitor,
    CausationVerdict,
    bcaum_step,
    causation_from_epochs,
    satisfaction_epoch,
    violation_epoch,
)
from .formula import (
    FALSE,
    TRUE,
    Formula,
    FormulaError,
    FormulaSyntaxError,
    IntervalError,
    UnknownVariableError,
    format_formula,
    horizon,
    parse_formula,
)
from .oracle import robustness, satisfies
from .reset import ResetMonitor, ResetOutput, resm_step
from .suite import gen_case, gen_suite
from .trace import (
    DomainBounds,
    PrefixView,
    Trace,
    TraceError,
    TraceFormatError,
    read_csv,
    value_at,
)

__all__ = [
    "BooleanCausationMonitor",
    "CausationOutput",
    "CausationVerdict",
    "ClassicMonitor",
    "DEQUE",
    "DomainBounds",
    "Engine",
    "FALSE",
    "Formula",
    "FormulaError",
    "FormulaSyntaxError",
    "IntervalError",
    "NAIVE",
    "PrefixView",
    "QuantitativeCausationMonitor",
    "ResetMonitor",
    "ResetOutput",
    "RobustnessInterval",
    "TRUE",
    "Trace",
    "TraceError",
    "TraceFormatError",
    "UnknownVariableError",
    "Verdict",
    "bcaum_step",
    "causation_from_epochs",
    "clam_offline_check",
    "clam_step",
    "derive_bcaum",
    "derive_verdict",
    "format_formula",
    "gen_case",
    "gen_suite",
    "horizon",
    "parse_formula",
    "qcaum_step",
    "read_csv",
    "reconstruct_clam",
    "resm_step",
    "robustness",
    "satisfaction_epoch",
    "satisfies",
    "value_at",
    "violation_epoch",
]
