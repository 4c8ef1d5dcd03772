"""Exception types shared across the package."""


class AlgorithmFailure(RuntimeError):
    """An algorithm reached its "fail" output.

    This is a legitimate result of running an algorithm on an input that does
    not meet its preconditions (for example a non-generic tensor), not a bug.

    Attributes
    ----------
    step:
        Short label of the pipeline step that failed.
    condition:
        Uniqueness-certificate condition label most likely violated, if known.
    """

    def __init__(self, message, step="", condition=None):
        super().__init__(message)
        self.step = step
        self.condition = condition

    def __str__(self):
        msg = super().__str__()
        parts = []
        if self.step:
            parts.append(f"[{self.step}]")
        parts.append(msg)
        if self.condition:
            parts.append(f"(likely violated: condition {self.condition})")
        return " ".join(parts)


class DiagonalizationError(AlgorithmFailure):
    """Simultaneous diagonalization could not separate the components."""


class FormatError(ValueError):
    """Malformed on-disk artifact; ``pointer`` is a JSON pointer to the offending node."""

    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
