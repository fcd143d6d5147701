"""Exception hierarchy shared across the pipeline stages."""


class SirforgeError(Exception):
    """Base class for all sirforge errors."""


class UnsupportedLanguage(SirforgeError):
    """Requested a language outside {python, java}."""


class ParseFatal(SirforgeError):
    """The grammar could not produce any tree for the input."""


class EmptyResult(SirforgeError):
    """Rule application pruned the tree down to nothing."""


class SchemaError(SirforgeError):
    """A JSONL record violates the expected schema.

    Carries the 1-based line number when raised during file ingestion.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NoStatements(SirforgeError):
    """Segmentation found an empty function body."""


class EmptyCorpus(SirforgeError):
    """Tokenizer training received no text."""


class SequenceTooLong(SirforgeError):
    """Input exceeds max_seq and truncation is disabled."""


class ShapeMismatch(SirforgeError):
    """Embedding matrices disagree in rows or dimension."""


class EmptyNeighborhood(SirforgeError):
    """An alignment neighborhood resolved to the empty set."""


class DegenerateBatch(SirforgeError):
    """Contrastive batch with fewer than 2 rows."""


class NonFiniteLoss(SirforgeError):
    """Training loss became NaN/inf; a diagnostic snapshot was written."""

    def __init__(self, message: str, snapshot_path: str | None = None):
        self.snapshot_path = snapshot_path
        super().__init__(message)


class CheckpointError(SirforgeError):
    """Checkpoint file is unreadable or corrupt."""


class VersionMismatch(CheckpointError):
    """Checkpoint version or configuration does not match expectations."""


class EmptyCandidates(SirforgeError):
    """A candidate set has no target snippets to score."""


class MissingField(SirforgeError):
    """Template rendering could not resolve a placeholder."""


class TooFewRecords(SirforgeError):
    """Not enough records to carve out the requested validation split."""


class ConfigError(SirforgeError):
    """Invalid evaluation or pipeline configuration."""


class EmptyInput(SirforgeError):
    """An operation that requires content received an empty string."""
