"""Exception hierarchy.

Input problems derive from :class:`ValidationError` (a ``ValueError``); numerical
failures derive from :class:`SolverFailure`. The CLI maps the two families to
exit codes 2 and 3.
"""


class ValidationError(ValueError):
    """Bad input: wrong shapes, out-of-range parameters, invalid pairings."""


class DimensionMismatch(ValidationError):
    pass


class ProbabilityOutOfRange(ValidationError):
    pass


class BadWeights(ValidationError):
    pass


class KindMismatch(ValidationError):
    pass


class EmptySlice(ValidationError):
    pass


class NotAPlaneFragment(ValidationError):
    pass


class OrbitInvalid(ValidationError):
    pass


class DegenerateData(ValidationError):
    pass


class SingularMap(ValidationError):
    pass


class SolverFailure(RuntimeError):
    """A numerical routine did not produce a usable answer."""


class InfeasibleOrbit(SolverFailure):
    pass


class NoConvergence(SolverFailure):
    pass
