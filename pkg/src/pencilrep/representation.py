"""I(1) and I(2) representations of autoregressive Hilbertian processes.

For ``X_t = sum_j Phi_j X_{t-j} + eps_t`` with pencil
``Phi(z) = I - sum_j z^j Phi_j`` having a pole of order one or two at ``z = 1``
this module produces the principal-part operators, the Taylor coefficients
of the holomorphic remainder, and the cointegrating/attractor subspaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    Assumption1Violated,
    InconsistencyError,
    InvalidInput,
    NotI1,
    NotI2,
    NotSecondOrder,
)
from .linalg import (
    SubspaceBasis,
    as_matrix,
    fundamental_subspaces,
    image,
    intersection,
    moore_penrose,
    opnorm,
    orthogonal_complement,
    subspace_sum,
)
from .pencil import CLUSTER_TOL, MatrixPencil, evaluate, from_ar, unit_disk_spectrum
from .poles import (
    classify_pole,
    laurent_oracle,
    laurent_principal_second,
    pole_order,
    residue_simple,
    riesz_projection,
    structured_operators,
)

TAIL_TOL = 1e-12
MAX_TRUNCATION = 512
ORACLE_REL_TOL = 1e-7

COMPACTNESS_NOTE = (
    "compactness of the autoregressive operators is automatic for matrices; "
    "it is not tested at finite truncation"
)


@dataclass(eq=False)
class ARModel:
    """AR(p) law of motion with innovation covariance ``L L^H``."""

    phis: Sequence[np.ndarray]
    sigma_factor: np.ndarray

    def __post_init__(self):
        if len(self.phis) < 1:
            raise InvalidInput("an AR model needs at least one coefficient")
        self.phis = tuple(as_matrix(P, square=True, name=f"Phi_{j + 1}") for j, P in enumerate(self.phis))
        n = self.phis[0].shape[0]
        if any(P.shape != (n, n) for P in self.phis):
            raise InvalidInput("all AR coefficients must share one square shape")
        L = as_matrix(self.sigma_factor, name="sigma_factor")
        if L.shape[0] != n:
            raise InvalidInput(f"sigma_factor must have {n} rows")
        s = np.linalg.svd(L, compute_uv=False)
        if L.shape[1] < n or s[-1] <= 1e-12 * max(1.0, s[0]):
            raise InvalidInput("innovation covariance L L^H is not positive definite")
        self.sigma_factor = L

    @property
    def dim(self) -> int:
        return self.phis[0].shape[0]

    @property
    def p(self) -> int:
        return len(self.phis)

    @property
    def sigma(self) -> np.ndarray:
        return self.sigma_factor @ self.sigma_factor.conj().T

    @property
    def pencil(self) -> MatrixPencil:
        return from_ar(self.phis)


@dataclass
class Assumption1Report:
    sigma_min: float
    spectrum_in_disk: list[complex]
    singular_at_one: bool
    notes: list[str] = field(default_factory=list)


@dataclass(eq=False)
class Decomposition:
    """Principal-part operators and holomorphic-part Taylor coefficients.

    ``psitilde[k]`` is the ``k``-th Taylor coefficient about zero of the
    holomorphic part of ``Phi(z)^{-1}`` about one.
    """

    kind: str
    psitilde: np.ndarray
    truncation_K: int
    tail_norm: float
    taylor_radius: float
    psi1: np.ndarray | None = None
    upsilon2: np.ndarray | None = None
    upsilon1: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.psitilde.shape[1]

    def psitilde_at(self, z) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for C in self.psitilde[::-1]:
            out = out * z + C
        return out

    def psi_at(self, z) -> np.ndarray:
        """``(1-z)^d Phi(z)^{-1}`` rebuilt from the stored pieces, ``d`` = 1 or 2."""
        w = 1 - z
        if self.kind == "I1":
            return self.psi1 + w * self.psitilde_at(z)
        return self.upsilon2 - w * self.upsilon1 + w * w * self.psitilde_at(z)

    def principal_part(self) -> dict[int, np.ndarray]:
        """Laurent coefficients of ``(z-1)^k`` for negative ``k``."""
        if self.kind == "I1":
            return {-1: -self.psi1}
        return {-2: self.upsilon2, -1: self.upsilon1}


@dataclass(eq=False)
class CointegrationReport:
    kind: str
    spaces: dict[str, SubspaceBasis]

    def __getitem__(self, name: str) -> SubspaceBasis:
        return self.spaces[name]


def check_assumption1(model: ARModel, margin: float = 1e-6) -> Assumption1Report:
    """Positive-definite innovations and a lone unit root in the closed unit disk."""
    sigma_min = float(np.linalg.svd(model.sigma, compute_uv=False)[-1])
    if sigma_min <= 0:
        raise Assumption1Violated("innovation covariance is not positive definite")
    report = unit_disk_spectrum(model.pencil, margin)
    at_one = [z for z in report.points if abs(z - 1) <= CLUSTER_TOL]
    others = [z for z in report.points if abs(z - 1) > CLUSTER_TOL]
    if not at_one:
        raise Assumption1Violated("no singularity at 1: Phi(1) is invertible", others)
    if others:
        raise Assumption1Violated(
            f"Phi(z) is singular inside the closed unit disk at {others}", others)
    return Assumption1Report(sigma_min=sigma_min, spectrum_in_disk=report.points,
                             singular_at_one=True, notes=[COMPACTNESS_NOTE])


def _taylor_radius(P: MatrixPencil) -> float:
    """Midway between the unit circle and the nearest non-unit spectrum point."""
    pts = [z for z in unit_disk_spectrum(P, margin=np.inf).all_points if abs(z - 1) > CLUSTER_TOL]
    if not pts:
        return 2.0
    R = min(abs(z) for z in pts)
    if R <= 1:
        raise Assumption1Violated("spectrum point inside the unit disk", [z for z in pts if abs(z) <= 1])
    return min(0.5 * (1 + R), 4.0)


def holomorphic_taylor(P: MatrixPencil, principal: dict[int, np.ndarray],
                       tail_tol: float = TAIL_TOL, max_K: int = MAX_TRUNCATION):
    """Taylor coefficients about zero of ``P(z)^{-1}`` minus its principal part at one.

    The coefficients are contour integrals on ``|z| = r`` with ``r`` chosen
    between one and the next spectrum point, evaluated by the trapezoidal
    rule and certified by node doubling. Returns ``(coeffs, K, r)`` where
    ``K`` is the first index from which every resolved coefficient has norm
    at most ``tail_tol``.
    """
    r = _taylor_radius(P)
    n = P.dim
    eye = np.eye(n, dtype=np.complex128)
    M = 256
    while True:
        theta = 2 * np.pi * np.arange(2 * M) / (2 * M)
        zs = r * np.exp(1j * theta)
        A = evaluate(P, zs)
        F = np.linalg.solve(A, np.broadcast_to(eye, A.shape))
        for k, Nk in principal.items():
            F = F - Nk[None] * ((zs - 1) ** k)[:, None, None]
        fine = np.fft.fft(F, axis=0)[: M // 2] / (2 * M)
        coarse = np.fft.fft(F[::2], axis=0)[: M // 2] / M
        scale_r = r ** -np.arange(M // 2)
        fine = fine * scale_r[:, None, None]
        coarse = coarse * scale_r[:, None, None]
        norms = np.linalg.norm(fine, ord=2, axis=(1, 2))
        change = np.max(np.linalg.norm(fine - coarse, ord=2, axis=(1, 2)))
        big = np.nonzero(norms > tail_tol)[0]
        K = int(big[-1]) + 1 if big.size else 0
        if change <= tail_tol * max(1.0, norms.max()) and K < M // 4:
            break
        if K > max_K or M >= 8192:
            raise InconsistencyError(
                f"holomorphic part did not decay below {tail_tol} within {max_K} terms")
        M *= 2
    if K > max_K:
        raise InconsistencyError(f"truncation index {K} exceeds cap {max_K}")
    return fine[: K + 1].copy(), K, r


def _order_at_one(model: ARModel, tol) -> object:
    return classify_pole(model.pencil, 1.0, tol)


def i1_decomposition(model: ARModel, tol: float | None = None) -> Decomposition:
    """``Psi(1)`` and the holomorphic-part coefficients of an I(1) model."""
    check_assumption1(model)
    order = _order_at_one(model, tol)
    if order != 1:
        raise NotI1(f"pole of Phi(z)^-1 at one has order {order}, not 1")
    P = model.pencil
    N1 = residue_simple(P, 1.0, tol)
    coeffs, K, r = holomorphic_taylor(P, {-1: N1})
    return Decomposition(kind="I1", psi1=-N1, psitilde=coeffs, truncation_K=K,
                         tail_norm=opnorm(coeffs[K]), taylor_radius=r)


def i2_decomposition(model: ARModel, tol: float | None = None) -> Decomposition:
    """``(Upsilon_-2, Upsilon_-1)`` and the holomorphic-part coefficients of an I(2) model.

    The closed-form coefficients are cross-checked against the contour oracle.
    """
    check_assumption1(model)
    order = _order_at_one(model, tol)
    if order != 2:
        raise NotI2(f"pole of Phi(z)^-1 at one has order {order}, not 2")
    P = model.pencil
    N2, N1 = laurent_principal_second(P, 1.0, tol)
    oracle = laurent_oracle(P, 1.0, k_min=-2, k_max=-1)
    for k, mine in ((-2, N2), (-1, N1)):
        ref = oracle[k]
        err = opnorm(mine - ref) / max(opnorm(ref), 1e-300)
        if err > ORACLE_REL_TOL:
            raise InconsistencyError(f"N_{k} formula and contour oracle differ by {err:.3e}")
    coeffs, K, r = holomorphic_taylor(P, {-2: N2, -1: N1})
    return Decomposition(kind="I2", upsilon2=N2, upsilon1=N1, psitilde=coeffs,
                         truncation_K=K, tail_norm=opnorm(coeffs[K]), taylor_radius=r)


def decompose(model: ARModel, kind: str = "auto", tol: float | None = None) -> Decomposition:
    if kind == "i1":
        return i1_decomposition(model, tol)
    if kind == "i2":
        return i2_decomposition(model, tol)
    if kind != "auto":
        raise InvalidInput(f"kind must be auto, i1 or i2, got {kind!r}")
    order = _order_at_one(model, tol)
    if order == 1:
        return i1_decomposition(model, tol)
    if order == 2:
        return i2_decomposition(model, tol)
    raise NotI2(f"pole at one has order {order}; only I(1) and I(2) are supported")


def _subspaces(M, rel: float = 1e-8):
    return fundamental_subspaces(M, rel * max(1.0, opnorm(M)))


def cointegration_spaces(model: ARModel, decomp: Decomposition) -> CointegrationReport:
    """Cointegrating and attractor subspaces, read off ``Phi(1)`` or the principal part."""
    if decomp.dim != model.dim:
        raise InvalidInput("decomposition and model dimensions differ")
    if decomp.kind == "I1":
        fs = _subspaces(evaluate(model.pencil, 1.0))
        return CointegrationReport("I1", {"cointegrating": fs.coran, "attractor": fs.ker})
    if decomp.kind != "I2":
        raise InvalidInput(f"unknown decomposition kind {decomp.kind!r}")
    u2 = _subspaces(decomp.upsilon2)
    u1 = _subspaces(decomp.upsilon1)
    return CointegrationReport("I2", {
        "tier1_coker_U2": u2.coker,
        "tier2_coker_U2_cap_coker_U1": intersection(u2.coker, u1.coker),
        "trend2_ran_U2": u2.ran,
        "trend1_ran_U1": u1.ran,
        "coker_U1": u1.coker,
    })


def p1_subspace_formulas(phi1, tol: float | None = None) -> CointegrationReport:
    """Ranges and cokernels of ``Upsilon_-2``, ``Upsilon_-1`` for an AR(1) I(2) model.

    Built only from ``Phi(1) = I - Phi_1``, its Moore-Penrose inverse and
    sums/intersections of subspaces.
    """
    phi1 = as_matrix(phi1, square=True, name="Phi_1")
    n = phi1.shape[0]
    P = from_ar([phi1])
    ops = structured_operators(P, 1.0, tol)
    if ops.B1_bijective or not ops.B2_bijective:
        raise NotSecondOrder("Phi(z)^-1 does not have a second-order pole at one")
    F1 = np.eye(n) - phi1
    fs = _subspaces(F1)
    F1_pinv = moore_penrose(F1, fs.tol_used)
    cap = intersection(fs.ran, fs.ker)
    W = image(F1_pinv, cap)
    ran_u2 = cap
    ran_u1 = subspace_sum(fs.ker, W)
    coker_u2 = subspace_sum(fs.coker, fs.coran)
    coker_u1 = intersection(fs.coran, orthogonal_complement(W))
    return CointegrationReport("I2", {
        "tier1_coker_U2": coker_u2,
        "tier2_coker_U2_cap_coker_U1": intersection(coker_u2, coker_u1),
        "trend2_ran_U2": ran_u2,
        "trend1_ran_U1": ran_u1,
        "coker_U1": coker_u1,
    })


def algebraic_geometric_multiplicity(phi1) -> tuple[int, int]:
    """Algebraic and geometric multiplicity of the unit eigenvalue of ``Phi_1``.

    The algebraic multiplicity is the rank of the Riesz projection; the
    ordering of the two is checked against the pole order at one.
    """
    phi1 = as_matrix(phi1, square=True, name="Phi_1")
    n = phi1.shape[0]
    geometric = _subspaces(np.eye(n) - phi1).ker.dim
    if geometric == 0:
        raise InvalidInput("1 is not an eigenvalue of Phi_1")
    proj = riesz_projection(phi1, 1.0)
    # nonzero singular values of a projection are >= 1
    algebraic = int(np.sum(np.linalg.svd(proj, compute_uv=False) > 0.5))
    order = pole_order(from_ar([phi1]), 1.0, cap=n)
    if (algebraic > geometric) != (order != 1):
        raise InconsistencyError(
            f"multiplicities ({algebraic}, {geometric}) disagree with pole order {order}")
    return algebraic, geometric
