"""
Exception hierarchy for the contact-complexity pipeline.

Every exception carries the process exit code the CLI reports for it:
1 for usage/configuration problems, 2 for bad input data.
"""

from typing import Optional


class ContactComplexityError(Exception):
    """Base class for all pipeline errors."""

    exit_code: int = 2


class ParseError(ContactComplexityError, ValueError):
    """A corpus line could not be parsed into a Transcript."""

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.line = line
        self.path = path
        location = ""
        if path is not None:
            location += f"{path}"
        if line is not None:
            location += f"{':' if location else 'line '}{line}"
        super().__init__(f"{location}: {message}" if location else message)


class CorpusError(ContactComplexityError, ValueError):
    """The corpus as a whole violates an invariant (duplicate ids, missing labels)."""


class FitError(ContactComplexityError, ValueError):
    """A fit operation received data it cannot fit."""


class TrainError(ContactComplexityError, ValueError):
    """Gradient boosting training preconditions were violated."""


class DomainError(ContactComplexityError, ValueError):
    """A numeric argument lies outside the operation's domain."""


class DivergenceUndefinedError(DomainError):
    """KL divergence requested where q_k = 0 but p_k > 0."""


class ConfigError(ContactComplexityError, ValueError):
    """A configuration invariant was violated."""

    exit_code = 1


class ModelFileError(ContactComplexityError, ValueError):
    """The model file is malformed."""


class ChecksumError(ModelFileError):
    """The model file content does not match its stored checksum."""


class ModelVersionError(ModelFileError):
    """The model file was written with an unsupported format version."""


class EvaluationError(ContactComplexityError, ValueError):
    """Evaluation inputs are misaligned or carry unknown labels."""


class UsageError(ContactComplexityError):
    """The command line could not be parsed."""

    exit_code = 1
