"""Exception hierarchy shared by every unit.

All engine failures derive from CogitoError so the runner can turn them into a
terminal trace marker and an exit code instead of a crash.
"""


class CogitoError(Exception):
    """Base class for engine errors."""


class EmptyText(CogitoError):
    """A text field was empty after whitespace trimming."""


class ActiveExists(CogitoError):
    """pop_next was called while a need is already active."""


class UnknownNeed(CogitoError):
    """Referenced need id does not exist in the store."""


class NotActive(CogitoError):
    """Operation requires the need to be in the active state."""


class EmptyActionList(CogitoError):
    """schedule_actions received no action texts."""


class MalformedResponse(CogitoError):
    """A backend response violated the wire contract."""


class ParseError(CogitoError):
    """A fixture file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class DimensionMismatch(CogitoError):
    """Embedding vectors of different dimensions were combined."""


class ZeroNorm(CogitoError):
    """An embedding had zero norm; cosine similarity is undefined."""


class EmptyContext(CogitoError):
    """A non-empty context list was required."""


class NoActions(CogitoError):
    """Action parsing produced no actions."""


class WrongStimulusKind(CogitoError):
    """A stimulus of a different kind was required."""


class UnknownSentenceId(CogitoError):
    """A ranking referenced a sentence id missing from the lookup."""


class BackendUnavailable(CogitoError):
    """The requested backend capability cannot be reached."""


class FixtureMiss(BackendUnavailable):
    """Fixture mode has no recorded response for this request."""


class Timeout(CogitoError):
    """A backend call exceeded its deadline (after any retries)."""


class BackendError(CogitoError):
    """The backend answered with a non-2xx status."""

    def __init__(self, status: int, body_excerpt: str = ""):
        super().__init__(f"backend returned status {status}: {body_excerpt}")
        self.status = status
        self.body_excerpt = body_excerpt


class InvalidScenario(CogitoError):
    """run_loop was handed a scenario that fails validation."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__(
            "invalid scenario: " + "; ".join(str(v) for v in self.violations)
        )


# File-system failures keep the builtin semantics; the contract name maps onto it.
IoError = OSError
