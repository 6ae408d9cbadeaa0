"""Exception types shared across the toolkit."""


class FractalLabError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(FractalLabError, ValueError):
    """An argument violates an operation's documented domain."""


class ParseError(InvalidInputError):
    """A point-cloud or space file is malformed; message carries line/field info."""


class ConstructionError(FractalLabError):
    """A cube hierarchy could not be assembled consistently."""

    def __init__(self, message, *, level=None, cube=None):
        super().__init__(message)
        self.level = level
        self.cube = cube


class CoverInfeasibleError(FractalLabError):
    """No separated ball cover exists at the requested radius and separation."""


class ResolutionExhaustedError(FractalLabError):
    """Cube subdivision hit the deepest level with major cubes remaining."""

    def __init__(self, message, *, trace=None):
        super().__init__(message)
        self.trace = trace


class OutOfRangeError(InvalidInputError):
    """A target scale lies outside the representable level range."""
