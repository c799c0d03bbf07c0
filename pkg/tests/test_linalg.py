import numpy as np
import pytest

from pencilrep.errors import DirectSumError, InvalidInput
from pencilrep.linalg import (
    SubspaceBasis,
    as_matrix,
    contains,
    direct_sum_check,
    fundamental_subspaces,
    image,
    intersection,
    moore_penrose,
    oblique_projector,
    orthogonal_complement,
    orthogonal_projector,
    penrose_residuals,
    principal_angles,
    span,
    subspace_sum,
    subspaces_equal,
)

from conftest import random_complex


def e(n, *idx):
    return SubspaceBasis.span_of(np.eye(n)[:, list(idx)])


def test_as_matrix_rejects_bad_input():
    with pytest.raises(InvalidInput):
        as_matrix([1.0, 2.0])
    with pytest.raises(InvalidInput):
        as_matrix([[np.nan]])
    with pytest.raises(InvalidInput):
        as_matrix(np.ones((2, 3)), square=True)


def test_subspace_basis_requires_orthonormal_columns():
    with pytest.raises(InvalidInput):
        SubspaceBasis(np.array([[1.0], [1.0]]))
    assert SubspaceBasis.zero(3).dim == 0
    assert SubspaceBasis.full(3).dim == 3


def test_fundamental_subspaces_of_rank_deficient(rng):
    A = random_complex(rng, 6, 6, rank=4)
    fs = fundamental_subspaces(A, tol=1e-10)
    assert fs.rank == 4 and fs.ker.dim == 2 and fs.coker.dim == 2
    assert np.linalg.norm(A @ fs.ker.basis) < 1e-10
    assert np.linalg.norm(A.conj().T @ fs.coker.basis) < 1e-10
    # ran and coker are orthocomplements, as are coran and ker
    assert direct_sum_check([fs.ran, fs.coker]).is_direct_sum
    assert direct_sum_check([fs.coran, fs.ker]).is_direct_sum


def test_fundamental_subspaces_jordan():
    fs = fundamental_subspaces(np.array([[0, -1], [0, 0]]), tol=1e-12)
    assert subspaces_equal(fs.ker, e(2, 0))
    assert subspaces_equal(fs.ran, e(2, 0))
    assert subspaces_equal(fs.coker, e(2, 1))
    assert subspaces_equal(fs.coran, e(2, 1))


@pytest.mark.parametrize("shape,rank", [((5, 5), 5), ((5, 5), 2), ((4, 7), 3), ((7, 4), 1), ((3, 3), 0)])
def test_moore_penrose_equations(rng, shape, rank):
    A = random_complex(rng, *shape, rank=rank) if rank else np.zeros(shape)
    X = moore_penrose(A, tol=1e-10)
    assert max(penrose_residuals(A, X)) < 1e-10
    assert np.allclose(X, np.linalg.pinv(A, rcond=1e-10), atol=1e-10)


def test_orthogonal_projector_properties(rng):
    V = span(random_complex(rng, 5, 2))
    P = orthogonal_projector(V)
    assert np.allclose(P @ P, P) and np.allclose(P, P.conj().T)


def test_span_drops_dependent_columns(rng):
    v = random_complex(rng, 4, 1)
    assert span(np.hstack([v, 2 * v, 0 * v])).dim == 1
    assert span(np.zeros((4, 0))).dim == 0


def test_sum_intersection_complement():
    n = 4
    U, W = e(n, 0, 1), e(n, 1, 2)
    assert subspaces_equal(intersection(U, W), e(n, 1))
    assert subspaces_equal(intersection(W, U), e(n, 1))
    assert subspace_sum(U, W).dim == 3
    assert subspaces_equal(orthogonal_complement(U), e(n, 2, 3))
    assert intersection(e(n, 0), e(n, 3)).dim == 0
    assert contains(U, e(n, 1)) and not contains(U, e(n, 2))


def test_image_of_subspace():
    M = np.array([[0, 1], [0, 0]])
    assert subspaces_equal(image(M, e(2, 1)), e(2, 0))
    assert image(M, e(2, 0)).dim == 0


def test_direct_sum_check_cases(rng):
    n = 3
    assert direct_sum_check([e(n, 0), e(n, 1, 2)]).is_direct_sum
    v = direct_sum_check([e(n, 0, 1), e(n, 1, 2)])
    assert v.spans_ambient and not v.trivial_intersections and v.min_gap < 1e-12
    v = direct_sum_check([e(n, 0), e(n, 1)])
    assert not v.spans_ambient and v.trivial_intersections
    # oblique but complementary
    v = direct_sum_check([span(np.array([1.0, 1.0, 0.0])), e(n, 0, 2)])
    assert v.is_direct_sum and v.min_gap > 0.1


def test_oblique_projector(rng):
    onto = span(random_complex(rng, 5, 2))
    along = span(random_complex(rng, 5, 3))
    P = oblique_projector(onto, along)
    assert np.linalg.norm(P @ P - P) < 1e-10
    assert np.linalg.norm(P @ along.basis) < 1e-10
    assert np.linalg.norm(P @ onto.basis - onto.basis) < 1e-10
    with pytest.raises(DirectSumError):
        oblique_projector(onto, onto)


def test_principal_angles_known_values():
    for theta in (0.0, 1e-9, 0.3, np.pi / 4, 1.2, np.pi / 2):
        u = span(np.array([1.0, 0.0, 0.0]))
        v = span(np.array([np.cos(theta), np.sin(theta), 0.0]))
        ang = principal_angles(u, v)
        assert ang.shape == (1,)
        assert abs(ang[0] - theta) < 1e-14 + 1e-12 * theta


def test_principal_angles_ascending_and_shared_direction():
    U = e(4, 0, 1)
    V = span(np.array([[0, 1], [1, 0], [0, 1], [0, 0]], dtype=float))
    ang = principal_angles(U, V)
    assert ang[0] < 1e-12 and abs(ang[1] - np.pi / 4) < 1e-12
    assert np.all(np.diff(ang) >= 0)


def test_ambient_mismatch_rejected():
    with pytest.raises(InvalidInput):
        intersection(e(3, 0), e(4, 0))
