"""Exception hierarchy shared by every module in the package."""

from __future__ import annotations


class PencilError(ValueError):
    """Base class for all domain errors raised by :mod:`pencilrep`."""


class InvalidInput(PencilError):
    """Malformed matrices, mismatched dimensions, non-finite entries."""


class DirectSumError(PencilError):
    """Subspaces do not form a direct sum spanning the ambient space."""

    def __init__(self, message: str, min_gap: float):
        super().__init__(f"{message} (min_gap={min_gap:.3e})")
        self.min_gap = min_gap


class SingularError(PencilError):
    """Pencil value is numerically singular where an inverse was requested."""

    def __init__(self, z: complex, smallest_singular_value: float):
        super().__init__(
            f"A(z) is singular at z={z!r} "
            f"(smallest singular value {smallest_singular_value:.3e})"
        )
        self.z = z
        self.smallest_singular_value = smallest_singular_value


class IdenticallySingular(PencilError):
    """Pencil is singular for every z; it has no discrete spectrum."""


class NotSingular(PencilError):
    """A(z0) is invertible, so there is no pole to analyse."""


class ContourError(PencilError):
    """Integration contour touches or encloses unwanted spectrum."""


class QuadratureError(PencilError):
    """Trapezoidal quadrature failed its node-doubling convergence check."""


class ConditionDisagreement(PencilError):
    """Equivalent pole conditions evaluated to different booleans.

    The conditions are mathematically equivalent, so a disagreement is a
    numerical signal. The full set of flags and diagnostics is attached for
    inspection.
    """

    def __init__(self, message: str, flags: dict, diagnostics: dict):
        super().__init__(f"{message}: flags={flags}, diagnostics={diagnostics}")
        self.flags = flags
        self.diagnostics = diagnostics


class InconsistencyError(PencilError):
    """Two independent computational routes disagree beyond tolerance."""


class NotSimplePole(PencilError):
    pass


class NotSecondOrder(PencilError):
    pass


class Assumption1Violated(PencilError):
    """Autoregressive pencil does not have a lone unit root in the closed disk."""

    def __init__(self, message: str, points=()):
        super().__init__(message)
        self.points = list(points)


class NotI1(PencilError):
    pass


class NotI2(PencilError):
    pass
