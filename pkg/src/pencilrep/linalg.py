"""Dense complex linear algebra on finite truncations of a Hilbert space.

Every subspace is carried as a :class:`SubspaceBasis`, a matrix whose
orthonormal columns span it. Rank decisions are made from singular values,
so all routines accept a tolerance below which a singular value is treated
as zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DirectSumError, InvalidInput

ORTHONORMAL_TOL = 1e-10
SUBSPACE_TOL = 1e-8


def as_matrix(A, *, square: bool = False, name: str = "matrix") -> np.ndarray:
    """Validate ``A`` and return it as a 2-D ``complex128`` array."""
    M = np.asarray(A, dtype=np.complex128)
    if M.ndim != 2:
        raise InvalidInput(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInput(f"{name} has non-finite entries")
    if square and M.shape[0] != M.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {M.shape}")
    return M


def default_tol(s: np.ndarray, shape: tuple[int, int]) -> float:
    """Machine epsilon times the larger dimension times the top singular value."""
    if s.size == 0:
        return 0.0
    return float(np.finfo(np.float64).eps * max(shape) * s[0])


def opnorm(A) -> float:
    """Operator (spectral) norm; zero for empty matrices."""
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


@dataclass(eq=False)
class SubspaceBasis:
    """Orthonormal basis of a subspace of ``C^ambient_dim``.

    ``basis`` has shape ``(ambient_dim, r)``; ``r = 0`` encodes the zero
    subspace.
    """

    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=np.complex128)
        if B.ndim != 2:
            raise InvalidInput(f"basis must be 2-D, got shape {B.shape}")
        if not np.all(np.isfinite(B)):
            raise InvalidInput("basis has non-finite entries")
        n, r = B.shape
        if r > n:
            raise InvalidInput(f"subspace dimension {r} exceeds ambient {n}")
        if r and np.linalg.norm(B.conj().T @ B - np.eye(r), 2) > ORTHONORMAL_TOL:
            raise InvalidInput("basis columns are not orthonormal")
        self.basis = B

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, n: int) -> "SubspaceBasis":
        return cls(np.zeros((n, 0), dtype=np.complex128))

    @classmethod
    def full(cls, n: int) -> "SubspaceBasis":
        return cls(np.eye(n, dtype=np.complex128))

    @classmethod
    def span_of(cls, vectors, tol: float = SUBSPACE_TOL) -> "SubspaceBasis":
        """Orthonormal basis for the column span of ``vectors``."""
        return span(vectors, tol)

    def __repr__(self) -> str:
        return f"SubspaceBasis(ambient_dim={self.ambient_dim}, dim={self.dim})"


@dataclass(eq=False)
class FundamentalSubspaces:
    ker: SubspaceBasis
    coker: SubspaceBasis
    ran: SubspaceBasis
    coran: SubspaceBasis
    tol_used: float
    singular_values: np.ndarray = field(repr=False)

    @property
    def rank(self) -> int:
        return self.ran.dim


@dataclass
class DirectSumVerdict:
    spans_ambient: bool
    trivial_intersections: bool
    min_gap: float
    dims: list[int]

    @property
    def is_direct_sum(self) -> bool:
        return self.spans_ambient and self.trivial_intersections


def fundamental_subspaces(A, tol: float = 0.0) -> FundamentalSubspaces:
    """Kernel, cokernel, range and corange of a square matrix.

    Parameters
    ----------
    A : array_like
        Square complex matrix.
    tol : float
        Singular values ``<= tol`` count as zero. ``0`` selects
        ``eps * n * sigma_max``.
    """
    A = as_matrix(A, square=True, name="A")
    if tol < 0:
        raise InvalidInput("tol must be nonnegative")
    U, s, Vh = np.linalg.svd(A)
    if tol == 0:
        tol = default_tol(s, A.shape)
    r = int(np.sum(s > tol))
    V = Vh.conj().T
    return FundamentalSubspaces(
        ker=SubspaceBasis(V[:, r:]),
        coker=SubspaceBasis(U[:, r:]),
        ran=SubspaceBasis(U[:, :r]),
        coran=SubspaceBasis(V[:, :r]),
        tol_used=float(tol),
        singular_values=s,
    )


def moore_penrose(A, tol: float = 0.0) -> np.ndarray:
    """Moore-Penrose inverse from a thin SVD, truncating singular values ``<= tol``."""
    A = as_matrix(A, name="A")
    if tol < 0:
        raise InvalidInput("tol must be nonnegative")
    if A.size == 0:
        return np.zeros(A.shape[::-1], dtype=np.complex128)
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    if tol == 0:
        tol = default_tol(s, A.shape)
    r = int(np.sum(s > tol))
    return (Vh[:r].conj().T / s[:r]) @ U[:, :r].conj().T


def penrose_residuals(A, X) -> tuple[float, float, float, float]:
    """Operator-norm residuals of the four Penrose equations for ``X ~ A^+``."""
    A = np.asarray(A, dtype=np.complex128)
    X = np.asarray(X, dtype=np.complex128)
    AX = A @ X
    XA = X @ A
    return (
        opnorm(AX @ A - A),
        opnorm(XA @ X - X),
        opnorm(AX.conj().T - AX),
        opnorm(XA.conj().T - XA),
    )


def orthogonal_projector(V: SubspaceBasis) -> np.ndarray:
    return V.basis @ V.basis.conj().T


def span(M, tol: float = SUBSPACE_TOL) -> SubspaceBasis:
    """Orthonormal basis of the column span of ``M``.

    ``tol`` is relative to ``max(1, ||M||)`` so that bases and images of
    bases are treated alike.
    """
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim == 1:
        M = M[:, None]
    n = M.shape[0]
    if M.shape[1] == 0:
        return SubspaceBasis.zero(n)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    r = int(np.sum(s > tol * max(1.0, s[0])))
    return SubspaceBasis(U[:, :r])


def image(M, V: SubspaceBasis, tol: float = SUBSPACE_TOL) -> SubspaceBasis:
    """The subspace ``M V``."""
    return span(np.asarray(M, dtype=np.complex128) @ V.basis, tol)


def subspace_sum(*parts: SubspaceBasis, tol: float = SUBSPACE_TOL) -> SubspaceBasis:
    _check_ambient(parts)
    return span(np.hstack([p.basis for p in parts]), tol)


def orthogonal_complement(V: SubspaceBasis, tol: float = SUBSPACE_TOL) -> SubspaceBasis:
    n = V.ambient_dim
    if V.dim == 0:
        return SubspaceBasis.full(n)
    U, s, _ = np.linalg.svd(V.basis, full_matrices=True)
    r = int(np.sum(s > tol))
    return SubspaceBasis(U[:, r:])


def intersection(*parts: SubspaceBasis, tol: float = SUBSPACE_TOL) -> SubspaceBasis:
    """Intersection as the common kernel of the complementary projectors.

    ``x`` lies in every part iff ``(I - P_k) x = 0`` for all ``k``; stacking
    the ``I - P_k`` keeps the computation symmetric in its arguments.
    """
    _check_ambient(parts)
    n = parts[0].ambient_dim
    eye = np.eye(n, dtype=np.complex128)
    stacked = np.vstack([eye - orthogonal_projector(p) for p in parts])
    _, s, Vh = np.linalg.svd(stacked)
    s_full = np.zeros(n)
    s_full[: s.size] = s
    keep = s_full <= tol
    return SubspaceBasis(Vh.conj().T[:, keep])


def contains(outer: SubspaceBasis, inner: SubspaceBasis, tol: float = SUBSPACE_TOL) -> bool:
    """Whether ``inner`` is a subspace of ``outer``."""
    _check_ambient((outer, inner))
    if inner.dim == 0:
        return True
    residual = inner.basis - outer.basis @ (outer.basis.conj().T @ inner.basis)
    return opnorm(residual) <= tol


def direct_sum_check(parts: Sequence[SubspaceBasis], tol: float = SUBSPACE_TOL) -> DirectSumVerdict:
    """Numerical certificate that ``parts`` form a direct sum.

    ``min_gap`` is the smallest singular value of the horizontally stacked
    bases. The parts have trivial pairwise-and-beyond intersections iff the
    stack has full column rank, and they span iff it has full row rank.
    """
    parts = list(parts)
    if not parts:
        raise InvalidInput("direct_sum_check needs at least one part")
    _check_ambient(parts)
    n = parts[0].ambient_dim
    dims = [p.dim for p in parts]
    total = sum(dims)
    if total == 0:
        return DirectSumVerdict(spans_ambient=(n == 0), trivial_intersections=True,
                                min_gap=0.0, dims=dims)
    stacked = np.hstack([p.basis for p in parts])
    s = np.linalg.svd(stacked, compute_uv=False)
    rank = int(np.sum(s > tol))
    return DirectSumVerdict(
        spans_ambient=rank == n,
        trivial_intersections=rank == total,
        # more columns than rows forces a null vector, i.e. a zero gap
        min_gap=float(s[-1]) if total <= n else 0.0,
        dims=dims,
    )


def oblique_projector(onto: SubspaceBasis, along: SubspaceBasis, tol: float = SUBSPACE_TOL) -> np.ndarray:
    """Projection with range ``onto`` and kernel ``along``.

    With ``M = [U W]`` the stacked bases, ``P = U E_r M^{-1}`` where ``E_r``
    keeps the first ``r`` coordinates; ``M^{-1}`` is obtained by a linear
    solve rather than an explicit inverse.
    """
    verdict = direct_sum_check([onto, along], tol)
    if not verdict.is_direct_sum:
        raise DirectSumError("onto and along do not form a spanning direct sum", verdict.min_gap)
    n = onto.ambient_dim
    M = np.hstack([onto.basis, along.basis])
    coords = np.linalg.solve(M, np.eye(n, dtype=np.complex128))
    return onto.basis @ coords[: onto.dim]


def principal_angles(U: SubspaceBasis, V: SubspaceBasis) -> np.ndarray:
    """Principal angles between two subspaces, ascending.

    Cosines come from the singular values of ``U^H V``; angles whose cosine
    exceeds ``1/sqrt(2)`` are taken from sines instead, since ``arccos`` loses
    half the digits near zero.
    """
    _check_ambient((U, V))
    if U.dim == 0 or V.dim == 0:
        return np.zeros(0)
    if U.dim < V.dim:
        U, V = V, U
    G = U.basis.conj().T @ V.basis
    cos = np.clip(np.linalg.svd(G, compute_uv=False), 0.0, 1.0)
    residual = V.basis - U.basis @ G
    sin = np.clip(np.linalg.svd(residual, compute_uv=False), 0.0, 1.0)
    # cos descending <-> angles ascending; sin descending <-> angles descending
    angles_cos = np.arccos(cos)
    angles_sin = np.arcsin(sin[::-1])
    return np.sort(np.where(cos ** 2 >= 0.5, angles_sin, angles_cos))


def subspaces_equal(U: SubspaceBasis, V: SubspaceBasis, tol: float = SUBSPACE_TOL) -> bool:
    if U.ambient_dim != V.ambient_dim or U.dim != V.dim:
        return False
    angles = principal_angles(U, V)
    return bool(angles.size == 0 or angles.max() <= tol)


def _check_ambient(parts) -> None:
    dims = {p.ambient_dim for p in parts}
    if len(dims) > 1:
        raise InvalidInput(f"subspaces live in different ambient dimensions: {sorted(dims)}")
