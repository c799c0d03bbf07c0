"""Matrix-polynomial operator pencils ``A(z) = sum_k z^k A_k``."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import IdenticallySingular, InvalidInput, SingularError
from .linalg import as_matrix, opnorm

# Spectrum points closer than this (relative) are one multiple eigenvalue
# whose computed copies were split by rounding; a Jordan chain of length k
# splits by about eps**(1/k).
CLUSTER_TOL = 1e-3
DEDUP_TOL = 1e-8

# fixed probe points for the "not identically singular" precondition
_PROBE_POINTS = (0.318 + 0.127j, -0.611 + 0.493j, 0.271 - 0.883j)


@dataclass(eq=False)
class MatrixPencil:
    """``A(z) = A_0 + z A_1 + ... + z^p A_p`` with square ``dim x dim`` coefficients."""

    coeffs: Sequence[np.ndarray]

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise InvalidInput("a pencil needs at least one coefficient")
        mats = [as_matrix(c, square=True, name=f"A_{k}") for k, c in enumerate(self.coeffs)]
        n = mats[0].shape[0]
        for k, m in enumerate(mats):
            if m.shape != (n, n):
                raise InvalidInput(f"A_{k} has shape {m.shape}, expected {(n, n)}")
        self.coeffs = tuple(mats)

    @property
    def dim(self) -> int:
        return self.coeffs[0].shape[0]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_linear_identity_form(self, tol: float = 1e-14) -> bool:
        """True when ``A(z) = I - zK`` exactly (up to ``tol``)."""
        if self.degree != 1:
            return False
        return opnorm(self.coeffs[0] - np.eye(self.dim)) <= tol

    def __call__(self, z):
        return evaluate(self, z)


@dataclass
class SpectrumReport:
    points: list[complex]
    margin: float
    unit_disk_clean_except: complex | None = None
    all_points: list[complex] = field(default_factory=list, repr=False)


def from_ar(phis: Sequence) -> MatrixPencil:
    """Pencil ``I - sum_j z^j Phi_j`` engendered by an AR(p) law of motion."""
    if len(phis) < 1:
        raise InvalidInput("an AR pencil needs p >= 1 coefficient")
    mats = [as_matrix(P, square=True, name=f"Phi_{j + 1}") for j, P in enumerate(phis)]
    n = mats[0].shape[0]
    if any(m.shape != (n, n) for m in mats):
        raise InvalidInput("all AR coefficients must share one square shape")
    return MatrixPencil([np.eye(n, dtype=np.complex128)] + [-m for m in mats])


def evaluate(P: MatrixPencil, z) -> np.ndarray:
    """Horner evaluation. ``z`` may be a scalar or a 1-D array (batched result)."""
    return derivative(P, 0, z)


def derivative(P: MatrixPencil, k: int, z) -> np.ndarray:
    """Exact ``k``-th derivative ``A^{(k)}(z)``.

    Uses Horner's scheme on the coefficients ``j!/(j-k)! A_j``. A 1-D array of
    ``z`` returns a stack of shape ``(len(z), dim, dim)``.
    """
    if k < 0:
        raise InvalidInput("derivative order must be nonnegative")
    zs = np.asarray(z, dtype=np.complex128)
    batched = zs.ndim == 1
    zb = zs.reshape(-1, 1, 1)
    n = P.dim
    out = np.zeros((zb.shape[0], n, n), dtype=np.complex128)
    for j in range(P.degree, k - 1, -1):
        weight = factorial(j) // factorial(j - k)
        out = out * zb + weight * P.coeffs[j]
    return out if batched else out[0]


def smallest_singular_value(M: np.ndarray) -> float:
    return float(np.linalg.svd(M, compute_uv=False)[-1])


def inverse_at(P: MatrixPencil, z: complex, tol: float | None = None) -> np.ndarray:
    """``A(z)^{-1}``; raises :class:`SingularError` when ``sigma_min(A(z)) <= tol``.

    The default ``tol`` is ``1e-12 * max(1, ||A(z)||)``.
    """
    A = evaluate(P, z)
    s = np.linalg.svd(A, compute_uv=False)
    if tol is None:
        tol = 1e-12 * max(1.0, s[0])
    if s[-1] <= tol:
        raise SingularError(complex(z), float(s[-1]))
    return np.linalg.solve(A, np.eye(P.dim, dtype=np.complex128))


def _cluster(points: np.ndarray, rel_tol: float) -> list[complex]:
    """Merge points within ``rel_tol * max(1, |z|)`` of each other; return centroids."""
    remaining = list(points)
    clusters: list[list[complex]] = []
    while remaining:
        seed = remaining.pop(0)
        group = [seed]
        grew = True
        while grew:
            grew = False
            for q in list(remaining):
                if any(abs(q - g) <= rel_tol * max(1.0, abs(g)) for g in group):
                    group.append(q)
                    remaining.remove(q)
                    grew = True
        clusters.append(group)
    return [complex(np.mean(g)) for g in clusters]


def spectrum(P: MatrixPencil) -> list[complex]:
    """All finite points where ``A(z)`` is singular.

    The reversed polynomial ``w^p A(1/w)`` has leading coefficient ``A_0``; its
    block-companion linearization is solved as a generalized eigenproblem in
    homogeneous form and ``z = beta/alpha`` recovered, dropping ``alpha = 0``
    (points at infinity). Rounding-split copies of a multiple point are merged.
    """
    _require_regular(P)
    n, p = P.dim, P.degree
    if p == 0:
        return []
    rev = [P.coeffs[p - i] for i in range(p + 1)]  # rev[i] multiplies w^i
    N = n * p
    C = np.zeros((N, N), dtype=np.complex128)
    D = np.eye(N, dtype=np.complex128)
    if p > 1:
        C[: N - n, n:] = np.eye(N - n)
    for i in range(p):
        C[N - n:, i * n:(i + 1) * n] = -rev[i]
    D[N - n:, N - n:] = rev[p]
    ab = scipy.linalg.eig(C, D, right=False, homogeneous_eigvals=True)
    alpha, beta = ab[0], ab[1]
    scale = np.maximum(np.abs(alpha), np.abs(beta))
    finite = np.abs(alpha) > 1e-13 * scale
    zs = beta[finite] / alpha[finite]
    zs = zs[np.argsort(np.abs(zs))]
    return _cluster(zs, CLUSTER_TOL)


def unit_disk_spectrum(P: MatrixPencil, margin: float = 1e-6) -> SpectrumReport:
    """Spectrum points in the closed disk ``|z| <= 1 + margin``."""
    pts = spectrum(P)
    inside = [z for z in pts if abs(z) <= 1 + margin]
    clean = None
    if len(inside) == 1 and abs(inside[0] - 1) <= DEDUP_TOL:
        clean = 1.0 + 0j
    return SpectrumReport(points=inside, margin=margin, unit_disk_clean_except=clean,
                          all_points=pts)


def _require_regular(P: MatrixPencil) -> None:
    for z in _PROBE_POINTS:
        A = evaluate(P, z)
        s = np.linalg.svd(A, compute_uv=False)
        if s[-1] > 1e-12 * max(1.0, s[0]):
            return
    raise IdenticallySingular("pencil is singular at every probe point")
