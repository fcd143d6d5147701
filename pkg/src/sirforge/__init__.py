"""sirforge: syntactic-representation tooling for parallel code corpora.

Turns Python/Java function corpora into language-agnostic syntactic
information representations (SIR), mines statement-level aligned pairs with
a contrastive matching model, emits dual-stage instruction-tuning datasets,
and evaluates candidate translations.
"""

__version__ = "0.1.0"

from sirforge.errors import (
    CheckpointError,
    ConfigError,
    DegenerateBatch,
    EmptyCandidates,
    EmptyCorpus,
    EmptyInput,
    EmptyNeighborhood,
    EmptyResult,
    MissingField,
    NoStatements,
    NonFiniteLoss,
    ParseFatal,
    SchemaError,
    SequenceTooLong,
    ShapeMismatch,
    SirforgeError,
    TooFewRecords,
    UnsupportedLanguage,
    VersionMismatch,
)

__all__ = [
    "__version__",
    "SirforgeError",
    "UnsupportedLanguage",
    "ParseFatal",
    "EmptyResult",
    "SchemaError",
    "NoStatements",
    "EmptyCorpus",
    "SequenceTooLong",
    "ShapeMismatch",
    "EmptyNeighborhood",
    "DegenerateBatch",
    "NonFiniteLoss",
    "VersionMismatch",
    "CheckpointError",
    "EmptyCandidates",
    "MissingField",
    "TooFewRecords",
    "ConfigError",
    "EmptyInput",
]
