"""Exception hierarchy with machine-readable codes.

Every error carries a short machine code (stable across releases, used in
JSON error reports) and an exit class:

    3  invalid input (parse errors, wrong degrees, non-free divisors, ...)
    4  out of scope (irrational spectra, non-proportional dual operators,
       unstable filtration windows, oversized stretch inputs)

Mathematical check failures (routes disagreeing, theorem checks false) are
not exceptions; they are report entries and map to exit code 2 in the CLI.
"""


class LfdError(Exception):
    """Base class for all library errors."""

    exit_class = 3
    code = "error"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class ParseError(LfdError):
    code = "parse-error"

    def __init__(self, message, position=None):
        super().__init__(message, position=position)
        self.position = position


class UnknownVariableError(ParseError):
    code = "unknown-variable"


class DegreeMismatchError(LfdError):
    code = "degree-mismatch"


class NotLinearFreeError(LfdError):
    code = "not-linear-free"


class WrongCountError(LfdError):
    code = "wrong-field-count"


class NotClosedError(LfdError):
    code = "bracket-not-closed"


class NotLinearError(LfdError):
    code = "not-linear"


class NoDecompositionError(LfdError):
    code = "no-decomposition"


class UnknownCatalogEntryError(LfdError):
    code = "unknown-catalog-entry"


class InputTooLargeError(LfdError):
    code = "input-too-large"


class NonRationalSpectrumError(LfdError):
    exit_class = 4
    code = "non-rational-spectrum"


class NotProportionalError(LfdError):
    exit_class = 4
    code = "not-proportional"


class WindowUnstableError(LfdError):
    exit_class = 4
    code = "window-unstable"


class CalibrationError(LfdError):
    """A built-in convention self-test failed; the install is unusable."""

    exit_class = 4
    code = "calibration-failure"
