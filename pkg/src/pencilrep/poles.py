"""Pole order and Laurent principal parts of ``A(z)^{-1}`` at a spectrum point.

Two independent routes are provided:

* closed-form: the bijectivity and direct-sum characterisations of simple and
  second-order poles, with residue / leading-coefficient formulas assembled
  from ``A(z0)``, its derivatives and Moore-Penrose inverses;
* oracle: Laurent coefficients read off a trapezoidal contour integral of
  ``A(z)^{-1}`` around ``z0``.

The classifiers evaluate every equivalent condition and refuse to pick a
side when they disagree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import (
    ConditionDisagreement,
    ContourError,
    InvalidInput,
    NotSecondOrder,
    NotSimplePole,
    NotSingular,
    QuadratureError,
)
from .linalg import (
    SubspaceBasis,
    as_matrix,
    direct_sum_check,
    fundamental_subspaces,
    image,
    intersection,
    moore_penrose,
    oblique_projector,
    opnorm,
    subspace_sum,
)
from .pencil import CLUSTER_TOL, MatrixPencil, derivative, evaluate, spectrum

Order = Union[int, str]
EXCEEDS_CAP = "exceeds_cap"

ORDER_REL_THRESHOLD = 1e-7
DOUBLING_TOL = 1e-8
DEFAULT_NODES = 512
MAX_RADIUS = 0.1


@dataclass(eq=False)
class StructuredOperators:
    """Operators built from ``A`` and its derivatives at ``z0``.

    ``B1`` and ``B2`` are stored in coordinates of the orthonormal bases
    ``ker_A -> coker_A`` and ``ker_B1 -> coker_B1``; the ``*_ambient``
    properties lift them back to ``C^n``.
    """

    z0: complex
    A0: np.ndarray
    A1: np.ndarray
    A2: np.ndarray
    A3: np.ndarray
    A0_pinv: np.ndarray
    ker_A: SubspaceBasis
    coker_A: SubspaceBasis
    ran_A: SubspaceBasis
    coran_A: SubspaceBasis
    B1: np.ndarray
    B1_singular_values: np.ndarray
    ker_B1: SubspaceBasis
    coker_B1: SubspaceBasis
    ran_B1: SubspaceBasis
    V: np.ndarray
    Vtilde: np.ndarray
    B2: np.ndarray
    B2_singular_values: np.ndarray
    tol_rank: float
    tol_B1: float
    tol_B2: float

    @property
    def dim(self) -> int:
        return self.A0.shape[0]

    @property
    def B1_ambient(self) -> np.ndarray:
        return self.coker_A.basis @ self.B1 @ self.ker_A.basis.conj().T

    @property
    def B1_pinv_ambient(self) -> np.ndarray:
        """``B1^+ P_coker A`` as an operator on ``C^n``."""
        return self.ker_A.basis @ moore_penrose(self.B1, self.tol_B1) @ self.coker_A.basis.conj().T

    @property
    def sigma_min_B1(self) -> float:
        s = self.B1_singular_values
        return float(s[-1]) if s.size else float("inf")

    @property
    def sigma_min_B2(self) -> float:
        s = self.B2_singular_values
        return float(s[-1]) if s.size else float("inf")

    @property
    def B1_bijective(self) -> bool:
        return self.sigma_min_B1 > self.tol_B1

    @property
    def B2_bijective(self) -> bool:
        return self.sigma_min_B2 > self.tol_B2


@dataclass
class PoleVerdict:
    z0: complex
    pole_type: str
    holds: bool
    order: Order
    condition_flags: dict[str, bool]
    diagnostics: dict[str, float]
    oracle_norms: dict[int, float] = field(default_factory=dict)


@dataclass(eq=False)
class LaurentExpansion:
    z0: complex
    min_order: int
    coeffs: dict[int, np.ndarray]
    radius_used: float
    nodes_used: int
    doubling_change: float = 0.0

    def __getitem__(self, k: int) -> np.ndarray:
        return self.coeffs[k]

    def norms(self) -> dict[int, float]:
        return {k: opnorm(v) for k, v in sorted(self.coeffs.items())}

    def partial_sum(self, z, k_max: int | None = None) -> np.ndarray:
        w = complex(z) - self.z0
        ks = [k for k in self.coeffs if k_max is None or k <= k_max]
        return sum(self.coeffs[k] * w ** k for k in sorted(ks))


# ---------------------------------------------------------------------------
# closed-form route


def structured_operators(P: MatrixPencil, z0: complex, tol: float | None = None) -> StructuredOperators:
    """Assemble ``B1``, ``V``, ``Vtilde`` and ``B2`` at ``z0``.

    With ``tol=None`` the rank of ``A(z0)`` uses ``1e-8 * ||A(z0)||``,
    bijectivity of ``B1`` uses ``1e-8 * ||A'(z0)||`` and of ``B2`` uses
    ``1e-8 * ||V||``. An explicit ``tol`` is used for all three.
    """
    z0 = complex(z0)
    A0 = evaluate(P, z0)
    A1 = derivative(P, 1, z0)
    A2 = derivative(P, 2, z0)
    A3 = derivative(P, 3, z0)
    tol_rank = tol if tol is not None else 1e-8 * max(1.0, opnorm(A0))
    fs = fundamental_subspaces(A0, tol_rank)
    if fs.ker.dim == 0:
        raise NotSingular(f"A(z0) is nonsingular at z0={z0!r}")
    A0_pinv = moore_penrose(A0, tol_rank)

    K, C = fs.ker.basis, fs.coker.basis
    B1 = C.conj().T @ A1 @ K
    tol_B1 = tol if tol is not None else 1e-8 * max(1.0, opnorm(A1))
    Ub, sb, Vbh = np.linalg.svd(B1)
    rb = int(np.sum(sb > tol_B1))
    ker_B1 = SubspaceBasis(K @ Vbh.conj().T[:, rb:])
    coker_B1 = SubspaceBasis(C @ Ub[:, rb:])
    ran_B1 = SubspaceBasis(C @ Ub[:, :rb])

    core = A1 @ A0_pinv @ A1
    V = 0.5 * A2 - core
    Vtilde = A3 / 6.0 - core @ A0_pinv @ A1
    B2 = coker_B1.basis.conj().T @ V @ ker_B1.basis
    tol_B2 = tol if tol is not None else 1e-8 * max(1.0, opnorm(V))
    sB2 = np.linalg.svd(B2, compute_uv=False) if B2.size else np.zeros(0)

    return StructuredOperators(
        z0=z0, A0=A0, A1=A1, A2=A2, A3=A3, A0_pinv=A0_pinv,
        ker_A=fs.ker, coker_A=fs.coker, ran_A=fs.ran, coran_A=fs.coran,
        B1=B1, B1_singular_values=sb, ker_B1=ker_B1, coker_B1=coker_B1, ran_B1=ran_B1,
        V=V, Vtilde=Vtilde, B2=B2, B2_singular_values=sB2,
        tol_rank=tol_rank, tol_B1=tol_B1, tol_B2=tol_B2,
    )


def _first_order_sum(ops: StructuredOperators) -> SubspaceBasis:
    """``ran A(z0) + A'(z0) ker A(z0)``."""
    return subspace_sum(ops.ran_A, image(ops.A1, ops.ker_A))


def residue_simple(P: MatrixPencil, z0: complex, tol: float | None = None,
                   ops: StructuredOperators | None = None) -> np.ndarray:
    """Residue ``B1^{-1} P_coker`` of a simple pole, lifted to ``C^n``."""
    ops = ops or structured_operators(P, z0, tol)
    if not ops.B1_bijective:
        raise NotSimplePole(f"B1 is not bijective at z0={ops.z0!r} (sigma_min={ops.sigma_min_B1:.3e})")
    return ops.ker_A.basis @ np.linalg.solve(ops.B1, ops.coker_A.basis.conj().T)


def laurent_principal_second(P: MatrixPencil, z0: complex, tol: float | None = None,
                             ops: StructuredOperators | None = None) -> tuple[np.ndarray, np.ndarray]:
    """``(N_{-2}, N_{-1})`` of a second-order pole from the closed-form formulas.

    ``N_{-1}`` is the sum of its compressions onto ``ran A(z0)``,
    ``ran B1`` and ``coker B1``, which partition ``C^n`` orthogonally.
    """
    ops = ops or structured_operators(P, z0, tol)
    if ops.B1_bijective:
        raise NotSecondOrder(f"pole at z0={ops.z0!r} is simple")
    if not ops.B2_bijective:
        raise NotSecondOrder(
            f"B2 is not bijective at z0={ops.z0!r} (sigma_min={ops.sigma_min_B2:.3e})")
    n = ops.dim
    eye = np.eye(n, dtype=np.complex128)
    J, Kc = ops.ker_B1.basis, ops.coker_B1.basis
    N2 = J @ np.linalg.solve(ops.B2, Kc.conj().T)

    A1, Ap, V, Vt = ops.A1, ops.A0_pinv, ops.V, ops.Vtilde
    lift = (eye - N2 @ V) @ ops.B1_pinv_ambient
    on_ran_A = -N2 @ A1 @ Ap
    on_ran_B1 = lift
    on_coker_B1 = N2 @ (A1 @ Ap @ V + V @ Ap @ A1 - Vt) @ N2 - (Ap @ A1 + lift @ V) @ N2
    return N2, on_ran_A + on_ran_B1 + on_coker_B1


# ---------------------------------------------------------------------------
# contour-integral oracle


def _other_spectrum_distance(P: MatrixPencil, z0: complex) -> float:
    pts = spectrum(P)
    others = [abs(z - z0) for z in pts if abs(z - z0) > CLUSTER_TOL * max(1.0, abs(z0))]
    return min(others) if others else np.inf


def default_radius(P: MatrixPencil, z0: complex) -> float:
    """Half the distance to the nearest other spectrum point, capped at 0.1."""
    return min(MAX_RADIUS, 0.5 * _other_spectrum_distance(P, z0))


def _inverse_on_circle(P: MatrixPencil, center: complex, radius: float, nodes: int) -> np.ndarray:
    theta = 2 * np.pi * np.arange(nodes) / nodes
    zs = center + radius * np.exp(1j * theta)
    A = evaluate(P, zs)
    s = np.linalg.svd(A, compute_uv=False)
    if np.any(s[:, -1] <= 1e-12 * np.maximum(1.0, s[:, 0])):
        raise ContourError(f"contour |z - {center}| = {radius} passes through the spectrum")
    eye = np.broadcast_to(np.eye(P.dim, dtype=np.complex128), A.shape)
    return np.linalg.solve(A, eye)


def _fourier_coefficients(F: np.ndarray, radius: float, ks) -> dict[int, np.ndarray]:
    """``N_k = radius^{-k} * mean_j F_j exp(-i k theta_j)`` for each ``k``."""
    M = F.shape[0]
    c = np.fft.fft(F, axis=0) / M
    return {k: c[k % M] * radius ** (-k) for k in ks}


def _principal_order(norms: dict[int, float]) -> tuple[int, float]:
    principal = {k: v for k, v in norms.items() if k < 0}
    scale = max(principal.values(), default=0.0)
    if scale == 0.0:
        return 0, 0.0
    thresh = ORDER_REL_THRESHOLD * scale
    above = [-k for k, v in principal.items() if v > thresh]
    return (max(above) if above else 0), thresh


def laurent_oracle(P: MatrixPencil, z0: complex, k_min: int = -4, k_max: int = 0,
                   radius: float | None = None, nodes: int = DEFAULT_NODES) -> LaurentExpansion:
    """Laurent coefficients ``N_k``, ``k_min <= k <= k_max``, by contour quadrature.

    ``N_k = (1/2 pi i) oint (z - z0)^{-k-1} A(z)^{-1} dz`` on a circle about
    ``z0`` with ``nodes`` equispaced trapezoidal nodes. The integrand is
    periodic and analytic, so the rule converges geometrically; the result is
    certified by repeating with twice the nodes.

    ``min_order`` is the true pole order read from all principal coefficients
    the quadrature resolves, with threshold ``1e-7`` relative to the largest
    principal coefficient.
    """
    z0 = complex(z0)
    if k_min > k_max:
        raise InvalidInput("k_min must not exceed k_max")
    if nodes < 8 or max(abs(k_min), abs(k_max)) >= nodes // 4:
        raise InvalidInput("nodes too small for the requested coefficient range")
    gap = _other_spectrum_distance(P, z0)
    if radius is None:
        radius = min(MAX_RADIUS, 0.5 * gap)
    elif radius <= 0 or radius >= gap:
        raise ContourError(f"radius {radius} encloses another spectrum point (nearest at {gap:.3e})")

    F2 = _inverse_on_circle(P, z0, radius, 2 * nodes)
    F = F2[::2]
    ks = list(range(k_min, k_max + 1))
    coarse = _fourier_coefficients(F, radius, ks)
    fine = _fourier_coefficients(F2, radius, ks)
    scale = max(1.0, max(opnorm(v) for v in fine.values()))
    change = max(opnorm(coarse[k] - fine[k]) for k in ks) / scale
    if change > DOUBLING_TOL:
        raise QuadratureError(f"node doubling changed coefficients by {change:.3e}")

    # all principal coefficients the rule resolves, for the order decision
    depth = min(nodes // 4, 4 * P.dim * max(P.degree, 1) + 4)
    principal = _fourier_coefficients(F, radius, range(-depth, 0))
    order, _ = _principal_order({k: opnorm(v) for k, v in principal.items()})
    return LaurentExpansion(z0=z0, min_order=order, coeffs=coarse, radius_used=radius,
                            nodes_used=nodes, doubling_change=change)


def pole_order(P: MatrixPencil, z0: complex, cap: int = 4, **oracle_kw) -> Order:
    """Order of the pole of ``A(z)^{-1}`` at ``z0`` from the oracle, or ``"exceeds_cap"``."""
    s = np.linalg.svd(evaluate(P, z0), compute_uv=False)
    if s[-1] > 1e-8 * max(1.0, s[0]):
        raise NotSingular(f"A(z0) is nonsingular at z0={z0!r}")
    exp = laurent_oracle(P, z0, k_min=-(cap + 1), k_max=0, **oracle_kw)
    return exp.min_order if exp.min_order <= cap else EXCEEDS_CAP


def riesz_projection(K, sigma: complex, radius: float | None = None,
                     nodes: int = DEFAULT_NODES) -> np.ndarray:
    """Spectral projector ``(1/2 pi i) oint (zI - K)^{-1} dz`` around eigenvalue ``sigma``.

    The default radius is half the distance from ``sigma`` to the nearest
    other eigenvalue or to zero, capped at 0.1.
    """
    K = as_matrix(K, square=True, name="K")
    sigma = complex(sigma)
    n = K.shape[0]
    eig = np.linalg.eigvals(K)
    near = CLUSTER_TOL * max(1.0, abs(sigma))
    if not np.any(np.abs(eig - sigma) <= near):
        raise ContourError(f"{sigma!r} is not an eigenvalue of K")
    others = [abs(e - sigma) for e in eig if abs(e - sigma) > near]
    gap = min(others + [abs(sigma)])
    if radius is None:
        radius = min(MAX_RADIUS, 0.5 * gap)
    elif radius <= 0 or radius >= gap:
        raise ContourError("contour does not separate sigma from zero and other eigenvalues")
    theta = 2 * np.pi * np.arange(nodes) / nodes
    w = radius * np.exp(1j * theta)
    zs = sigma + w
    R = zs[:, None, None] * np.eye(n) - K
    F = np.linalg.solve(R, np.broadcast_to(np.eye(n, dtype=np.complex128), R.shape))
    return np.tensordot(w, F, axes=(0, 0)) / nodes


# ---------------------------------------------------------------------------
# classifiers


def _verdict(z0, pole_type, flags, diagnostics, order, norms) -> PoleVerdict:
    values = set(flags.values())
    if len(values) != 1:
        raise ConditionDisagreement(f"{pole_type} conditions disagree at z0={z0!r}", flags, diagnostics)
    return PoleVerdict(z0=z0, pole_type=pole_type, holds=values.pop(), order=order,
                       condition_flags=flags, diagnostics=diagnostics, oracle_norms=norms)


def _oracle_probe(P, z0, cap, oracle_kw) -> tuple[Order, dict[int, float]]:
    exp = laurent_oracle(P, z0, k_min=-(cap + 1), k_max=0, **oracle_kw)
    order = exp.min_order if exp.min_order <= cap else EXCEEDS_CAP
    return order, {k: v for k, v in exp.norms().items() if k < 0}


def classify_simple_pole(P: MatrixPencil, z0: complex, tol: float | None = None,
                         cap: int = 4, **oracle_kw) -> PoleVerdict:
    """Evaluate every simple-pole characterisation at ``z0``.

    Flags ``1``-``4`` are: oracle order is one; ``B1`` is bijective;
    ``ran A + A' ker A`` is a spanning direct sum; it is a spanning sum. For
    pencils of the form ``I - zK`` the specialised flags ``lin_2``-``lin_4``
    (``ran A (+) ker A``, ``ran A + ker A``, ``ran A cap ker A = 0``) are added.
    """
    z0 = complex(z0)
    ops = structured_operators(P, z0, tol)
    ds = direct_sum_check([ops.ran_A, image(ops.A1, ops.ker_A)])
    order, norms = _oracle_probe(P, z0, cap, oracle_kw)
    flags = {
        "1": order == 1,
        "2": ops.B1_bijective,
        "3": ds.is_direct_sum,
        "4": ds.spans_ambient,
    }
    diagnostics = {
        "sigma_min_B1": ops.sigma_min_B1,
        "sigma_min_B2": ops.sigma_min_B2 if not ops.B1_bijective else float("nan"),
        "direct_sum_gap": ds.min_gap,
        "dim_ker": ops.ker_A.dim,
    }
    if P.is_linear_identity_form():
        lin = direct_sum_check([ops.ran_A, ops.ker_A])
        flags["lin_2"] = lin.is_direct_sum
        flags["lin_3"] = lin.spans_ambient
        flags["lin_4"] = intersection(ops.ran_A, ops.ker_A).dim == 0
        diagnostics["lin_direct_sum_gap"] = lin.min_gap
    return _verdict(z0, "simple", flags, diagnostics, order, norms)


def classify_second_order(P: MatrixPencil, z0: complex, tol: float | None = None,
                          cap: int = 4, **oracle_kw) -> PoleVerdict:
    """Evaluate every second-order characterisation at ``z0`` (pole must not be simple).

    Flags ``1``-``4``: oracle order is two; ``B2`` is bijective;
    ``(ran A + A' ker A) (+) V ker B1`` spans directly; the plain sum spans.
    Linear pencils add ``lin_2``/``lin_3`` built on
    ``(I - A^+)(ran A cap ker A)``.
    """
    z0 = complex(z0)
    ops = structured_operators(P, z0, tol)
    if ops.B1_bijective:
        raise NotSecondOrder(f"pole at z0={z0!r} is simple; second-order test does not apply")
    S = _first_order_sum(ops)
    VJ = image(ops.V, ops.ker_B1)
    ds = direct_sum_check([S, VJ])
    order, norms = _oracle_probe(P, z0, cap, oracle_kw)
    flags = {
        "1": order == 2,
        "2": ops.B2_bijective,
        "3": ds.is_direct_sum,
        "4": ds.spans_ambient,
    }
    diagnostics = {
        "sigma_min_B1": ops.sigma_min_B1,
        "sigma_min_B2": ops.sigma_min_B2,
        "direct_sum_gap": ds.min_gap,
        "dim_ker": ops.ker_A.dim,
        "dim_ker_B1": ops.ker_B1.dim,
    }
    if P.is_linear_identity_form():
        n = ops.dim
        cap_space = intersection(ops.ran_A, ops.ker_A)
        W = image(np.eye(n) - ops.A0_pinv, cap_space)
        lin = direct_sum_check([subspace_sum(ops.ran_A, ops.ker_A), W])
        flags["lin_2"] = lin.is_direct_sum
        flags["lin_3"] = lin.spans_ambient
        diagnostics["lin_direct_sum_gap"] = lin.min_gap
    return _verdict(z0, "second_order", flags, diagnostics, order, norms)


def classify_pole(P: MatrixPencil, z0: complex, tol: float | None = None, **oracle_kw) -> Order:
    """1, 2 or ``"exceeds_cap"`` from the closed-form characterisations."""
    if classify_simple_pole(P, z0, tol, **oracle_kw).holds:
        return 1
    if classify_second_order(P, z0, tol, **oracle_kw).holds:
        return 2
    return EXCEEDS_CAP


def linear_residue_via_projection(P: MatrixPencil, z0: complex, tol: float | None = None) -> np.ndarray:
    """``-z0`` times the projection on ``ker A(z0)`` along ``ran A(z0)`` (pencils ``I - zK``)."""
    if not P.is_linear_identity_form():
        raise InvalidInput("pencil is not of the form I - zK")
    ops = structured_operators(P, z0, tol)
    return -complex(z0) * oblique_projector(ops.ker_A, ops.ran_A)
