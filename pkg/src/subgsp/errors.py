"""Exception and warning types shared across the package."""


class SubgspError(Exception):
    """Base class for all errors raised by this package."""


class InvalidGraph(SubgspError):
    """Graph data violates a structural invariant (ids, weights, loops)."""


class InvalidParams(SubgspError):
    """A parameter is outside its documented range."""


class NonNormalShift(SubgspError):
    """Shift matrix is not normal, so no unitary eigenbasis exists."""


class EmptySources(SubgspError):
    """Hop-distance computation was given an empty source set."""


class DisconnectedGraph(SubgspError):
    """Operation requires a connected graph (finite diameter)."""


class DimensionMismatch(SubgspError):
    """Signal length does not match the expected vertex count."""


class DegreeOverflow(SubgspError):
    """Polynomial degree is not smaller than the vertex count."""


class BadParamCount(SubgspError):
    """Parameter vector length does not match the operator family."""


class SingularInterior(SubgspError):
    """Interior block of the Laplacian is numerically singular."""


class EmptyProjection(SubgspError):
    """Lead eigenvector projects to (numerically) zero on the subset."""


class InfeasibleConstraint(SubgspError):
    """A pinned coefficient refers to a nonexistent (set, power) slot."""


class NotSingleSet(SubgspError):
    """Filter must consist of a single set covering the observed subset."""


class ZeroSignal(SubgspError):
    """Signal is identically zero where a nonzero norm is required."""


class DegenerateReference(SubgspError):
    """Reference high-band score is too small for a meaningful ratio."""


class ZeroNoise(SubgspError):
    """Noisy signal equals the clean signal; error ratio undefined."""


class InvalidBandwidth(SubgspError):
    """Bandwidth must be between 1 and the number of vertices."""


class DisconnectedPair(SubgspError):
    """Effective resistance requested between disconnected vertices."""


class FamilyUnsupported(SubgspError):
    """Operator family not handled by this routine."""


class TooLarge(SubgspError):
    """Instance exceeds the exhaustive-enumeration size limit."""


class ConfigError(SubgspError):
    """Experiment configuration is malformed or references missing files."""


class RankWarning(UserWarning):
    """Design matrix of a least-squares fit is rank deficient (non-fatal)."""
