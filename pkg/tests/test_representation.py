import numpy as np
import pytest

from pencilrep.corpus import JORDAN, ExampleSpec, example_model, jordan_model, random_unit_root_pencil
from pencilrep.errors import Assumption1Violated, InconsistencyError, InvalidInput, NotI1, NotI2, NotSecondOrder
from pencilrep.linalg import SubspaceBasis, contains, principal_angles, span, subspaces_equal
from pencilrep.pencil import evaluate, inverse_at
from pencilrep.representation import (
    ARModel,
    algebraic_geometric_multiplicity,
    check_assumption1,
    cointegration_spaces,
    decompose,
    i1_decomposition,
    i2_decomposition,
    p1_subspace_formulas,
)

CIRCLE = 0.9 * np.exp(2j * np.pi * np.arange(20) / 20)


def reconstruction_error(model, d):
    power = 1 if d.kind == "I1" else 2
    return max(np.linalg.norm(d.psi_at(z) - (1 - z) ** power * inverse_at(model.pencil, z), 2)
               for z in CIRCLE)


def ar2_model(seed, blocks):
    P, order = random_unit_root_pencil(np.random.default_rng(seed), blocks, quadratic=True)
    return ARModel([-P.coeffs[1], -P.coeffs[2]], np.eye(P.dim)), order


def test_armodel_validation():
    with pytest.raises(InvalidInput):
        ARModel([np.eye(2)], np.diag([1.0, 0.0]))
    with pytest.raises(InvalidInput):
        ARModel([np.eye(2), np.eye(3)], np.eye(2))
    m = ARModel([np.eye(2), 0.1 * np.eye(2)], 2 * np.eye(2))
    assert m.p == 2 and m.dim == 2 and np.allclose(m.sigma, 4 * np.eye(2))


def test_assumption1_cases():
    with pytest.raises(Assumption1Violated, match="no singularity at 1"):
        check_assumption1(ARModel([0.5 * np.eye(2)], np.eye(2)))
    with pytest.raises(Assumption1Violated) as exc:
        check_assumption1(ARModel([np.diag([1.0, 2.0])], np.eye(2)))
    assert np.allclose(exc.value.points, [0.5])
    rep = check_assumption1(example_model(ExampleSpec(2, 6)))
    assert rep.singular_at_one and any("compact" in n for n in rep.notes)


def test_random_walk():
    d = i1_decomposition(ARModel([[[1.0]]], [[1.0]]))
    assert np.allclose(d.psi1, [[1.0]])
    assert np.abs(d.psitilde).max() < 1e-12


def test_example1_diagonal():
    d = i1_decomposition(ARModel([np.diag([1.0, 0.5, 0.25])], np.eye(3)))
    assert np.allclose(d.psi1, np.diag([1.0, 0, 0]), atol=1e-12)
    # stable coordinates contribute 1 / (1 - a z), so Psitilde_k = diag(0, 0.5^k, 0.25^k)
    for k in range(4):
        assert np.allclose(d.psitilde[k], np.diag([0.0, 0.5 ** k, 0.25 ** k]), atol=1e-12)


def test_example2_i1(example2_model):
    d = i1_decomposition(example2_model)
    ker = span(np.linalg.svd(evaluate(example2_model.pencil, 1.0))[2].conj().T[:, -1:])
    assert subspaces_equal(span(d.psi1), ker, tol=1e-7)
    assert d.tail_norm <= 1e-12 and d.truncation_K <= 512
    assert reconstruction_error(example2_model, d) <= 1e-8
    with pytest.raises(NotI2):
        i2_decomposition(example2_model)


def test_i1_range_and_cokernel(example2_model):
    d = i1_decomposition(example2_model)
    rep = cointegration_spaces(example2_model, d)
    U, s, Vh = np.linalg.svd(d.psi1)
    r = int(np.sum(s > 1e-8 * s[0]))
    assert r == rep["attractor"].dim == 1
    assert principal_angles(SubspaceBasis(U[:, :r]), rep["attractor"]).max() <= 1e-7
    assert principal_angles(SubspaceBasis(U[:, r:]), rep["cointegrating"]).max() <= 1e-7
    assert rep["cointegrating"].dim == 15


def test_jordan_i2(jordan):
    d = i2_decomposition(jordan)
    assert np.allclose(d.upsilon2, [[0, 1], [0, 0]], atol=1e-10)
    assert np.allclose(d.upsilon1, [[-1, 1], [0, -1]], atol=1e-10)
    assert reconstruction_error(jordan, d) <= 1e-8
    with pytest.raises(NotI1):
        i1_decomposition(jordan)


def test_example3_i2(example3_model):
    d = i2_decomposition(example3_model)
    v = np.zeros(16)
    v[1] = v[2] = 1
    assert subspaces_equal(span(d.upsilon2), span(v), tol=1e-7)
    assert reconstruction_error(example3_model, d) <= 1e-8


@pytest.mark.parametrize("seed,blocks", [(1, (1,)), (2, (1, 1)), (3, (2,)), (4, (2, 1))])
def test_ar2_reconstruction(seed, blocks):
    model, order = ar2_model(seed, blocks)
    d = decompose(model)
    assert d.kind == ("I1" if order == 1 else "I2")
    assert reconstruction_error(model, d) <= 1e-8


def test_decompose_rejects_higher_order():
    with pytest.raises(NotI2):
        decompose(example_model(ExampleSpec(4, 8)))


def test_cointegration_trivial_random_walk():
    m = ARModel([[[1.0]]], [[1.0]])
    rep = cointegration_spaces(m, i1_decomposition(m))
    assert rep["cointegrating"].dim == 0 and rep["attractor"].dim == 1


def test_jordan_spaces(jordan):
    rep = cointegration_spaces(jordan, i2_decomposition(jordan))
    e2 = SubspaceBasis(np.array([[0.0], [1.0]]))
    assert subspaces_equal(rep["tier1_coker_U2"], e2)
    assert rep["tier2_coker_U2_cap_coker_U1"].dim == 0


@pytest.mark.parametrize("name", ["jordan", "example3", "jordan_padded"])
def test_tier_properties(name, jordan, example3_model):
    model = {"jordan": jordan, "example3": example3_model, "jordan_padded": jordan_model([0.5, -0.3])}[name]
    rep = cointegration_spaces(model, i2_decomposition(model))
    assert contains(rep["tier1_coker_U2"], rep["tier2_coker_U2_cap_coker_U1"])
    assert rep["trend2_ran_U2"].dim + rep["tier1_coker_U2"].dim == model.dim


@pytest.mark.parametrize("name", ["jordan", "example3", "jordan_padded"])
def test_p1_formulas_match_decomposition(name, jordan, example3_model):
    model = {"jordan": jordan, "example3": example3_model, "jordan_padded": jordan_model([0.5])}[name]
    oracle = cointegration_spaces(model, i2_decomposition(model))
    formula = p1_subspace_formulas(model.phis[0])
    for key, V in oracle.spaces.items():
        W = formula[key]
        assert V.dim == W.dim, key
        assert principal_angles(V, W).max(initial=0.0) <= 1e-6, key


def test_p1_formulas_jordan_ranges():
    rep = p1_subspace_formulas(JORDAN)
    assert subspaces_equal(rep["trend2_ran_U2"], SubspaceBasis(np.array([[1.0], [0.0]])))
    assert rep["trend1_ran_U1"].dim == 2


def test_p1_formulas_reject_simple_pole():
    with pytest.raises(NotSecondOrder):
        p1_subspace_formulas(example_model(ExampleSpec(2, 8)).phis[0])


def test_multiplicities():
    assert algebraic_geometric_multiplicity(np.eye(2)) == (2, 2)
    assert algebraic_geometric_multiplicity(JORDAN) == (2, 1)
    assert algebraic_geometric_multiplicity(example_model(ExampleSpec(2, 16)).phis[0]) == (1, 1)
    with pytest.raises(InvalidInput):
        algebraic_geometric_multiplicity(0.5 * np.eye(2))
