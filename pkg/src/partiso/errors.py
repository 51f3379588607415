"""Exception hierarchy.

Every error raised by the library derives from :class:`PartisoError`.  Errors
that describe a violated numerical condition carry the offending residual so
that verification suites can record it instead of a bare failure flag.
"""


class PartisoError(Exception):
    def __init__(self, message: str = "", residual: float | None = None):
        super().__init__(message)
        self.residual = residual


# -- matcore --------------------------------------------------------------

class NonConvergence(PartisoError):
    pass


class InvalidOrder(PartisoError, ValueError):
    pass


class NotHermitian(PartisoError, ValueError):
    pass


class SingularSpectrum(PartisoError):
    pass


class RankDeficient(PartisoError):
    pass


class NotFinite(PartisoError, ValueError):
    pass


# -- grassmann ------------------------------------------------------------

class DimensionMismatch(PartisoError, ValueError):
    pass


class FullSpace(PartisoError):
    pass


class NotProjector(PartisoError, ValueError):
    pass


class OutsideDomain(PartisoError):
    """A point lies outside the domain of a Grassmann chart or transition."""


# -- groupoid -------------------------------------------------------------

class NotPartialIsometry(PartisoError, ValueError):
    pass


class NotComposable(PartisoError):
    """``s(g) != t(h)``; ``mismatch`` is the operator-norm distance."""

    def __init__(self, mismatch: float):
        super().__init__(f"source/target mismatch {mismatch:.3e}", residual=mismatch)
        self.mismatch = mismatch


# -- atlas ----------------------------------------------------------------

class DomainTooFar(PartisoError):
    pass


class OutsideSectionDomain(PartisoError):
    pass


class NotSkewHermitian(PartisoError, ValueError):
    pass


class OutsideChartDomain(PartisoError):
    """Raised by groupoid charts; ``which`` names the failed condition."""

    def __init__(self, which: str, message: str = ""):
        super().__init__(f"{which}: {message}" if message else which)
        self.which = which


class BranchCut(OutsideChartDomain):
    """Spectrum of the transported unitary touches the logarithm's branch cut."""

    def __init__(self, message: str = ""):
        super().__init__("unitary", message)


class ChartMismatch(PartisoError, ValueError):
    pass


# -- harness --------------------------------------------------------------

class ConfigError(PartisoError, ValueError):
    pass


class IoError(PartisoError, OSError):
    pass


# Conditions that make a random sample unusable rather than wrong.
DOMAIN_ERRORS = (OutsideDomain, OutsideChartDomain, OutsideSectionDomain, DomainTooFar, BranchCut)
