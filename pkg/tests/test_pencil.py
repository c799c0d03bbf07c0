import numpy as np
import pytest

from pencilrep.corpus import ExampleSpec, JORDAN, example_pencil
from pencilrep.errors import IdenticallySingular, InvalidInput, SingularError
from pencilrep.pencil import (
    MatrixPencil,
    derivative,
    evaluate,
    from_ar,
    inverse_at,
    spectrum,
    unit_disk_spectrum,
)

from conftest import random_complex


def test_from_ar_structure(rng):
    phis = [random_complex(rng, 3, 3) for _ in range(2)]
    P = from_ar(phis)
    assert P.degree == 2 and P.dim == 3
    z = 0.3 - 0.2j
    assert np.allclose(P(z), np.eye(3) - z * phis[0] - z ** 2 * phis[1])
    with pytest.raises(InvalidInput):
        from_ar([])


def test_pencil_validation():
    with pytest.raises(InvalidInput):
        MatrixPencil([np.eye(2), np.eye(3)])
    with pytest.raises(InvalidInput):
        MatrixPencil([])


def test_evaluate_batched_matches_scalar(rng):
    P = MatrixPencil([random_complex(rng, 3, 3) for _ in range(4)])
    zs = np.array([0.1, -0.5j, 1 + 1j])
    batch = evaluate(P, zs)
    assert batch.shape == (3, 3, 3)
    for z, A in zip(zs, batch):
        assert np.allclose(A, sum(z ** k * C for k, C in enumerate(P.coeffs)))


def test_derivative_exact(rng):
    C = [random_complex(rng, 2, 2) for _ in range(4)]
    P = MatrixPencil(C)
    z = 0.7 + 0.1j
    d1 = C[1] + 2 * z * C[2] + 3 * z ** 2 * C[3]
    d2 = 2 * C[2] + 6 * z * C[3]
    assert np.allclose(derivative(P, 1, z), d1)
    assert np.allclose(derivative(P, 2, z), d2)
    assert np.allclose(derivative(P, 3, z), 6 * C[3])
    assert np.allclose(derivative(P, 4, z), 0)


def test_inverse_at():
    P = from_ar([JORDAN])
    with pytest.raises(SingularError):
        inverse_at(P, 1.0)
    z = 0.5
    assert np.allclose(inverse_at(P, z) @ P(z), np.eye(2))


def test_spectrum_diagonal_and_jordan():
    pts = spectrum(from_ar([np.diag([1.0, 2.0])]))
    assert np.allclose(sorted(pts, key=abs), [0.5, 1.0])
    pts = spectrum(from_ar([JORDAN]))
    assert len(pts) == 1 and abs(pts[0] - 1) < 1e-6


def test_spectrum_quadratic_scalar():
    # 2 - 3z + z^2 = (1 - z)(2 - z)
    P = MatrixPencil([[[2.0]], [[-3.0]], [[1.0]]])
    assert np.allclose(sorted(spectrum(P), key=abs), [1.0, 2.0])


def test_spectrum_drops_infinite_points():
    # I - z diag(1, 0): the second coordinate never becomes singular
    assert np.allclose(spectrum(from_ar([np.diag([1.0, 0.0])])), [1.0])


def test_identically_singular_rejected():
    with pytest.raises(IdenticallySingular):
        spectrum(MatrixPencil([np.diag([1.0, 0.0]), np.diag([1.0, 0.0])]))


def test_unit_disk_spectrum_example2():
    rep = unit_disk_spectrum(example_pencil(ExampleSpec(2, 16)))
    assert rep.unit_disk_clean_except == 1
    assert len(rep.points) == 1
    # other points sit at 1 / lambda_j = 2**j
    assert min(abs(z) for z in rep.all_points if abs(z - 1) > 1e-3) == pytest.approx(4.0)


def test_evaluate_simple_cases():
    P = from_ar([np.eye(3)])
    assert np.allclose(evaluate(P, 1.0), 0)
    assert np.allclose(evaluate(P, 0.0), np.eye(3))
    A = evaluate(example_pencil(ExampleSpec(3, 6)), 1.0)
    assert np.allclose(A @ np.eye(6)[:, 0], -np.eye(6)[:, 1] - np.eye(6)[:, 2])
