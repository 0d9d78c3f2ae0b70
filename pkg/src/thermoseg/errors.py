"""Exception types raised by the library.

Everything derives from ThermosegError so callers (and the CLI) can catch
domain failures without swallowing programming errors.
"""

from __future__ import annotations


class ThermosegError(Exception):
    """Base class for all library errors."""


class ParameterError(ThermosegError, ValueError):
    """A parameter is out of its documented range or otherwise invalid."""


class RasterParseError(ThermosegError, ValueError):
    """A raster or mask file is malformed; message names row/column."""


class PreconditionError(ThermosegError, ValueError):
    """An operation precondition does not hold (e.g. marker exceeds mask)."""


class DegenerateInputError(ThermosegError, ValueError):
    """Input has too little structure for the operation (e.g. < 2 distinct values)."""


class NoReferenceError(ThermosegError, RuntimeError):
    """No usable high-gradient reference population could be extracted."""


class StageError(ThermosegError, RuntimeError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
