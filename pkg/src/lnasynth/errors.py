"""Exception hierarchy shared by all lnasynth modules."""


class LnaSynthError(Exception):
    """Base class for every domain error raised by the package."""


class SingularSystem(LnaSynthError):
    def __init__(self, message, freq=None):
        super().__init__(message)
        self.freq = freq


class InvalidPort(LnaSynthError):
    pass


class NetlistError(LnaSynthError):
    """Malformed netlist (undeclared node, bad value, bad JSON document)."""


class MissingSourceNoise(LnaSynthError):
    pass


class Unattainable(LnaSynthError):
    pass


class OutOfTechnologyRange(LnaSynthError):
    pass


class DegenerateConversion(LnaSynthError):
    pass


class BandOutsideGrid(LnaSynthError):
    pass


class NegativeCx(LnaSynthError):
    pass


class NonPositiveLg(LnaSynthError):
    pass


class TransformImpossible(LnaSynthError):
    pass


class NegativeCeq(LnaSynthError):
    pass


class SynthesisError(LnaSynthError):
    """A synthesis pipeline stage failed; ``stage`` names it, ``cause`` holds the original error."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


class NoFeasibleCandidate(LnaSynthError):
    def __init__(self, message, reasons=None):
        super().__init__(message)
        self.reasons = reasons or []


class TouchstoneError(LnaSynthError):
    """Base for Touchstone parse errors; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class TouchstoneSyntaxError(TouchstoneError):
    pass


class NonMonotonicFrequency(TouchstoneError):
    pass


class WrongColumnCount(TouchstoneError):
    pass


class FrequencyOutOfRange(LnaSynthError):
    pass
