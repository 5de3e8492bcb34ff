"""
Enums used throughout the application.
"""
from enum import Enum

class ErrorType(Enum):
    """Types of errors that can occur while fitting or simulating."""
    VALIDATION = "validation"
    SCHEMA = "schema"
    NUMERICAL = "numerical"
    IO = "io"
    DATABASE = "database"
    UNKNOWN = "unknown"

class ErrorSeverity(Enum):
    """Severity levels for errors."""
    CRITICAL = "critical"  # Stops the run
    HIGH = "high"         # Run result is unusable
    MEDIUM = "medium"     # Replicate lost, harness continues
    LOW = "low"          # Bad input, user can fix and rerun
    INFO = "info"        # Informational

class OutcomeMode(str, Enum):
    """Outcome types the sampler supports."""
    CONTINUOUS = "continuous"
    PROBIT = "probit"

class MoveKind(str, Enum):
    """Tree proposal moves."""
    GROW = "grow"
    PRUNE = "prune"
    CHANGE = "change"

class CovariateKind(str, Enum):
    """Covariate column kinds."""
    CONTINUOUS = "continuous"
    CATEGORICAL = "categorical"

class ScenarioId(str, Enum):
    """Simulation scenarios."""
    FRIEDMAN1 = "friedman1"
    FRIEDMAN2 = "friedman2"
    TTCM_LIKE = "ttcm_like"

class ModelVariant(str, Enum):
    """Model variants compared by the replicate runner."""
    SUBART = "subart"
    PS_SUBART = "ps-subart"
    IND_BART = "ind-bart"
    PS_IND_BART = "ps-ind-bart"

    @property
    def uses_propensity(self) -> bool:
        return self in (ModelVariant.PS_SUBART, ModelVariant.PS_IND_BART)

    @property
    def independent(self) -> bool:
        return self in (ModelVariant.IND_BART, ModelVariant.PS_IND_BART)
