"""Fixture operators and JSON (de)serialization of pencils and AR models.

Complex numbers are written as ``[re, im]`` pairs and matrices as row-major
nested lists of such pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InvalidInput
from .pencil import MatrixPencil, from_ar
from .representation import ARModel

DEFAULT_N = 16
EXAMPLE_IDS = (1, 2, 3, 4)
# pole order of (I - zK)^{-1} at z = 1 for each example, cap 2
EXPECTED_ORDERS = {1: 1, 2: 1, 3: 2, 4: "exceeds_cap"}

JORDAN = np.array([[1.0, 1.0], [0.0, 1.0]], dtype=np.complex128)


@dataclass
class ExampleSpec:
    """One of the four linear fixture pencils ``I - zK`` truncated to ``N``.

    ``lambdas[j - 1]`` is the diagonal weight of ``e_j``; only the indices an
    example uses are read (``j >= 2`` for examples 1-2, ``j >= 4`` for 3-4).
    Defaults are ``2**-j``, except example 1 which uses ``2**(1 - j)`` so that
    ``K = diag(1, 1/2, 1/4, ...)``.
    """

    id: int
    N: int = DEFAULT_N
    lambdas: Sequence[float] | None = None

    def __post_init__(self):
        if self.id not in EXAMPLE_IDS:
            raise InvalidInput(f"example id must be one of {EXAMPLE_IDS}, got {self.id}")
        if self.N < 4:
            raise InvalidInput("truncation dimension N must be at least 4")
        lam = self.resolved_lambdas()
        used = lam[self.first_free - 1:]
        if np.any(used <= 0) or np.any(used >= 1):
            raise InvalidInput("lambdas must lie strictly inside (0, 1)")
        if np.any(np.diff(used) >= 0):
            raise InvalidInput("lambdas must be strictly decreasing")

    @property
    def first_free(self) -> int:
        return 2 if self.id in (1, 2) else 4

    def resolved_lambdas(self) -> np.ndarray:
        if self.lambdas is not None:
            lam = np.asarray(self.lambdas, dtype=float)
            if lam.shape != (self.N,):
                raise InvalidInput(f"lambdas must have length N={self.N}")
            return lam
        j = np.arange(1, self.N + 1)
        return 2.0 ** (1 - j) if self.id == 1 else 2.0 ** (-j)

    def describe(self) -> dict:
        lam = self.resolved_lambdas()
        return {"id": self.id, "N": self.N,
                "lambdas": {int(j): float(lam[j - 1]) for j in range(self.first_free, self.N + 1)}}


def example_operator(spec: ExampleSpec) -> np.ndarray:
    """Matrix of ``K`` in the standard basis; column ``j`` is ``K e_j``."""
    N = spec.N
    lam = spec.resolved_lambdas()
    K = np.zeros((N, N), dtype=np.complex128)
    for j in range(spec.first_free, N + 1):
        K[j - 1, j - 1] = lam[j - 1]
    if spec.id == 1:
        K[0, 0] = 1.0
    elif spec.id == 2:
        K[0, 0] = K[1, 0] = 1.0
    elif spec.id == 3:
        K[0:3, 0] = 1.0
        K[1, 1] = 1.0
        K[2, 2] = 1.0
    else:
        K[0:3, 0] = 1.0
        K[1:3, 1] = 1.0
        K[2, 2] = 1.0
    return K


def example_pencil(spec: ExampleSpec) -> MatrixPencil:
    return from_ar([example_operator(spec)])


def example_model(spec: ExampleSpec) -> ARModel:
    """AR(1) model with autoregressive operator ``K`` and identity innovation covariance."""
    return ARModel([example_operator(spec)], np.eye(spec.N))


def jordan_model(stationary: Sequence[float] = ()) -> ARModel:
    """AR(1) model with the 2x2 unit Jordan block, optionally padded by stable diagonal entries."""
    n = 2 + len(stationary)
    phi = np.zeros((n, n), dtype=np.complex128)
    phi[:2, :2] = JORDAN
    for i, v in enumerate(stationary):
        phi[2 + i, 2 + i] = v
    return ARModel([phi], np.eye(n))


JORDAN_PATTERNS = ((1,), (1, 1), (2,), (2, 1), (3,))


def random_unit_root_pencil(rng: np.random.Generator, blocks: Sequence[int] = (1,),
                            stable: int = 3, quadratic: bool = False):
    """Random pencil with a unit root of known pole order.

    ``K = S J S^{-1}`` where ``J`` stacks unit Jordan blocks of the given
    sizes over a diagonal of ``stable`` eigenvalues with modulus below 0.8,
    and ``S = I + 0.3 G / sqrt(n)`` is a well-conditioned complex
    perturbation. The pole of ``(I - zK)^{-1}`` at one has order
    ``max(blocks)``. With ``quadratic=True`` the pencil is
    ``(I - zK)(I - zK2)`` with ``||K2|| = 0.1``, which keeps that order.

    Returns ``(pencil, order)`` with ``order`` capped as in the classifiers.
    """
    n = sum(blocks) + stable
    J = np.zeros((n, n), dtype=np.complex128)
    i = 0
    for b in blocks:
        J[i:i + b, i:i + b] = np.eye(b) + np.eye(b, k=1)
        i += b
    lam = rng.uniform(0, 0.8, stable) * np.exp(2j * np.pi * rng.uniform(size=stable))
    J[i:, i:] = np.diag(lam)
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    S = np.eye(n) + 0.3 * G / np.linalg.norm(G, 2)
    K = S @ J @ np.linalg.inv(S)
    order = max(blocks) if max(blocks) <= 2 else "exceeds_cap"
    if not quadratic:
        return from_ar([K]), order
    K2 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    K2 *= 0.1 / np.linalg.norm(K2, 2)
    eye = np.eye(n)
    return MatrixPencil([eye, -(K + K2), K @ K2]), order


# ---------------------------------------------------------------------------
# serialization


def matrix_to_json(M) -> list:
    M = np.asarray(M, dtype=np.complex128)
    return [[[float(v.real), float(v.imag)] for v in row] for row in M]


def matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise InvalidInput("matrix must be a nested list of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def vector_to_json(v) -> list:
    return [[float(x.real), float(x.imag)] for x in np.asarray(v, dtype=np.complex128)]


def vector_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidInput("vector must be a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def pencil_to_dict(P: MatrixPencil) -> dict:
    return {"type": "pencil", "dim": P.dim, "coeffs": [matrix_to_json(c) for c in P.coeffs]}


def model_to_dict(model: ARModel) -> dict:
    return {"type": "ar_model", "dim": model.dim, "phis": [matrix_to_json(p) for p in model.phis],
            "sigma_factor": matrix_to_json(model.sigma_factor)}


def pencil_from_dict(d: dict) -> MatrixPencil:
    if d.get("type", "pencil") != "pencil":
        raise InvalidInput(f"expected a pencil document, got type {d.get('type')!r}")
    P = MatrixPencil([matrix_from_json(c) for c in d["coeffs"]])
    if "dim" in d and d["dim"] != P.dim:
        raise InvalidInput("declared dim does not match coefficients")
    return P


def model_from_dict(d: dict) -> ARModel:
    if d.get("type", "ar_model") != "ar_model":
        raise InvalidInput(f"expected an ar_model document, got type {d.get('type')!r}")
    phis = [matrix_from_json(p) for p in d["phis"]]
    n = phis[0].shape[0]
    L = matrix_from_json(d["sigma_factor"]) if "sigma_factor" in d else np.eye(n)
    model = ARModel(phis, L)
    if "dim" in d and d["dim"] != model.dim:
        raise InvalidInput("declared dim does not match coefficients")
    return model


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=None, separators=(",", ":"), sort_keys=True) + "\n"


def serialize_pencil(P: MatrixPencil) -> str:
    return dumps(pencil_to_dict(P))


def serialize_model(model: ARModel) -> str:
    return dumps(model_to_dict(model))


def parse_pencil(text: str) -> MatrixPencil:
    return pencil_from_dict(json.loads(text))


def parse_model(text: str) -> ARModel:
    return model_from_dict(json.loads(text))


def _parse_example_ref(ref: str, N: int | None) -> tuple[str, int]:
    # example:<id>[:<N>] or example:jordan
    parts = ref.split(":")
    if len(parts) not in (2, 3) or parts[0] != "example":
        raise InvalidInput(f"bad example reference {ref!r}; use example:<id>[:<N>] or example:jordan")
    size = int(parts[2]) if len(parts) == 3 else (N or DEFAULT_N)
    return parts[1], size


def load_pencil(source: str, N: int | None = None) -> tuple[MatrixPencil, dict]:
    """Pencil from a JSON file path or an ``example:<id>[:<N>]`` reference."""
    if source.startswith("example:"):
        name, size = _parse_example_ref(source, N)
        if name == "jordan":
            return from_ar([JORDAN]), {"example": "jordan"}
        spec = ExampleSpec(int(name), size)
        return example_pencil(spec), {"example": spec.describe()}
    doc = json.loads(Path(source).read_text())
    if doc.get("type") == "ar_model":
        return model_from_dict(doc).pencil, {"file": source}
    return pencil_from_dict(doc), {"file": source}


def load_model(source: str, N: int | None = None) -> tuple[ARModel, dict]:
    """AR model from a JSON file path, ``example:<id>[:<N>]`` or ``example:jordan``."""
    if source.startswith("example:"):
        name, size = _parse_example_ref(source, N)
        if name == "jordan":
            return jordan_model(), {"example": "jordan"}
        spec = ExampleSpec(int(name), size)
        return example_model(spec), {"example": spec.describe()}
    return model_from_dict(json.loads(Path(source).read_text())), {"file": source}
