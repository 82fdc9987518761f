"""Exception hierarchy. CLI exit codes are attached to the classes."""


class ThinFilmError(Exception):
    exit_code = 1


class ValidationError(ThinFilmError, ValueError):
    """Parameters violate a documented invariant; raised before any compute."""

    exit_code = 2


class DomainError(ThinFilmError, ValueError):
    """Evaluation point outside the closed strip [-1, 1] x T."""

    exit_code = 2


class ResolutionError(ThinFilmError, ValueError):
    """Grid too coarse for the requested length scale."""

    exit_code = 2


class IntegrityError(ThinFilmError):
    """A field violates the unit-length constraint beyond tolerance."""

    exit_code = 4


class DivergenceError(ThinFilmError, FloatingPointError):
    """NaN or overflow during time stepping."""

    exit_code = 3


class ContractViolation(ThinFilmError):
    """A proven bound (energy ceiling, dissipation) failed numerically."""

    exit_code = 4


class NoWallError(ThinFilmError, ValueError):
    """Energy density vanishes identically; no wall to locate."""

    exit_code = 2


class DegreeUndefinedError(ThinFilmError, ValueError):
    """|m'| drops below 1/2 on a loop so the winding number is ill-defined."""

    exit_code = 4


class ProjectionError(ThinFilmError, ValueError):
    """Vanishing modulus prevents projection onto the circle."""

    exit_code = 4


class InsufficientDataError(ThinFilmError, ValueError):
    exit_code = 2
