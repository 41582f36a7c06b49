"""Exception types raised by the library."""


class LpplError(Exception):
    """Base class for every error raised by :mod:`lppl_sloppy`."""


class DomainError(LpplError, ValueError):
    """An evaluation point sits at or beyond the singularity ``t_c``."""


class DegenerateWindow(LpplError, ValueError):
    """Not enough observations for the number of free parameters."""


class DegenerateDesign(LpplError, ValueError):
    """The linear sub-problem is too ill-conditioned to solve."""


class BZero(LpplError, ValueError):
    """The power-law amplitude vanished, so ``C = C2 / B`` is unrecoverable."""


class InitInvalid(LpplError, ValueError):
    """A starting point for the local optimizer is not admissible."""


class NotSymmetric(LpplError, ValueError):
    pass


class TooFewSamples(LpplError, ValueError):
    pass


class SummaryEmpty(LpplError):
    """Every fit at some window end failed."""


class ParseError(LpplError, ValueError):
    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class GapError(ParseError):
    pass


class NonPositiveError(ParseError):
    pass
