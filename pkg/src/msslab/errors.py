"""Exception taxonomy shared across the package."""


class MsslabError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(MsslabError):
    """A configuration field is missing, malformed, or inconsistent."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field '{field}': {message}")


class IoError(MsslabError):
    """Wraps filesystem failures so the CLI can map them to one exit code."""


class ParseError(MsslabError):
    """A data file could not be parsed; carries the offending line number."""

    def __init__(self, path, line_no: int, message: str):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class NearDegenerateAlphas(MsslabError):
    """Vandermonde determinant too small for a stable determinant ratio."""


class SelfDualViolation(MsslabError):
    """A self-dual form produced a coefficient with a non-negligible imaginary part."""


class OutOfRange(MsslabError):
    """A requested index exceeds what the data source can provide."""


class MissingPrime(OutOfRange):
    """An eigenvalue file does not cover a prime the sieve needs."""

    def __init__(self, p: int):
        self.p = p
        super().__init__(f"no a_p entry for prime {p}")


class PoleProximity(MsslabError):
    """Evaluation point is too close to a pole or a vanishing local factor."""


class Diverges(MsslabError):
    """A local factor series cannot converge for the requested parameters."""


class RangeExceeded(MsslabError):
    """An interval or truncation point runs past the end of the table."""


class InadmissibleParams(MsslabError):
    """Experiment parameters violate a stated admissibility inequality."""

    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("inadmissible parameters: " + "; ".join(self.failures))


class NonConvergence(MsslabError):
    """Step-halving stalled above the requested quadrature tolerance."""


class HypothesisViolated(MsslabError):
    """Contour parameters violate the y < (nY/2)^n hypothesis."""


class CorruptCache(MsslabError):
    """A coefficient cache file failed its magic/version/CRC validation."""


class NonArithmeticForm(MsslabError):
    """Operation rejects the degenerate constant-one test form."""


class UnsupportedRank(MsslabError):
    """Operation is only implemented for small rank n."""
