"""Locally differentially private measurement of group performance gaps.

Clients randomize (group, performance) tuples before reporting; the
aggregator recovers unbiased per-group means and their gap. The package
bundles the mechanisms, the estimators, closed-form error analysis with
budget optimizers, privacy auditors, and a deterministic Monte-Carlo
harness that checks the theory against simulation.
"""

__version__ = "0.1.0"

from ldpgap.errors import (
    DegenerateBudgetError,
    DomainError,
    MissingGroupError,
    MissingMeanError,
    NonMonotonicObjectiveError,
)
from ldpgap.mechanisms import (
    AuditReport,
    Budget,
    ClientRecord,
    MechanismSpec,
    PerturbedRecord,
)

__all__ = [
    "__version__",
    "AuditReport",
    "Budget",
    "ClientRecord",
    "DegenerateBudgetError",
    "DomainError",
    "MechanismSpec",
    "MissingGroupError",
    "MissingMeanError",
    "NonMonotonicObjectiveError",
    "PerturbedRecord",
]
