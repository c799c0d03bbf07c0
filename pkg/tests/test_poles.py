import numpy as np
import pytest

from pencilrep.corpus import (
    JORDAN,
    JORDAN_PATTERNS,
    EXPECTED_ORDERS,
    ExampleSpec,
    example_operator,
    example_pencil,
    random_unit_root_pencil,
)
from pencilrep.errors import ContourError, InvalidInput, NotSecondOrder, NotSingular
from pencilrep.linalg import opnorm
from pencilrep.pencil import MatrixPencil, from_ar, inverse_at
from pencilrep.poles import (
    EXCEEDS_CAP,
    classify_pole,
    classify_second_order,
    classify_simple_pole,
    laurent_oracle,
    laurent_principal_second,
    linear_residue_via_projection,
    pole_order,
    residue_simple,
    riesz_projection,
    structured_operators,
)

JORDAN_N2 = np.array([[0, 1], [0, 0]])
JORDAN_N1 = np.array([[-1, 1], [0, -1]])


def rel(a, b):
    return opnorm(a - b) / max(opnorm(b), 1e-300)


def test_jordan_inverse_by_hand():
    # (I - zJ)^{-1} = [[1/(1-z), z/(1-z)^2], [0, 1/(1-z)]]; with w = z - 1,
    # z/(1-z)^2 = 1/w^2 + 1/w, 1/(1-z) = -1/w
    P = from_ar([JORDAN])
    z = 1.05 + 0.02j
    w = z - 1
    assert np.allclose(inverse_at(P, z), JORDAN_N2 / w ** 2 + JORDAN_N1 / w)


def test_jordan_closed_form():
    N2, N1 = laurent_principal_second(from_ar([JORDAN]), 1.0)
    assert opnorm(N2 - JORDAN_N2) <= 1e-10
    assert opnorm(N1 - JORDAN_N1) <= 1e-10


def test_jordan_oracle():
    exp = laurent_oracle(from_ar([JORDAN]), 1.0, k_min=-3, k_max=1)
    assert exp.min_order == 2
    assert opnorm(exp[-2] - JORDAN_N2) < 1e-12
    assert opnorm(exp[-1] - JORDAN_N1) < 1e-12
    assert opnorm(exp[-3]) < 1e-12
    assert exp.doubling_change <= 1e-8


@pytest.mark.parametrize("example_id", [1, 2, 3, 4])
def test_example_orders(example_id):
    assert classify_pole(example_pencil(ExampleSpec(example_id, 16)), 1.0) == EXPECTED_ORDERS[example_id]


def test_example4_true_order_is_three():
    assert pole_order(example_pencil(ExampleSpec(4, 8)), 1.0) == 3
    assert pole_order(example_pencil(ExampleSpec(4, 8)), 1.0, cap=2) == EXCEEDS_CAP


@pytest.mark.parametrize("example_id", [1, 2])
def test_residue_matches_oracle(example_id):
    P = example_pencil(ExampleSpec(example_id, 16))
    N1 = residue_simple(P, 1.0)
    assert rel(N1, laurent_oracle(P, 1.0, k_min=-2, k_max=0)[-1]) <= 1e-7
    assert rel(N1, linear_residue_via_projection(P, 1.0)) <= 1e-7


def test_example2_residue_range_is_kernel():
    spec = ExampleSpec(2, 16)
    N1 = residue_simple(example_pencil(spec), 1.0)
    lam2 = spec.resolved_lambdas()[1]
    v = np.zeros(16)
    v[0], v[1] = 1 - lam2, 1
    # rank one with range spanned by v
    s = np.linalg.svd(N1, compute_uv=False)
    assert s[1] < 1e-10 * s[0]
    u = np.linalg.svd(N1)[0][:, 0]
    assert abs(abs(np.vdot(u, v / np.linalg.norm(v))) - 1) < 1e-10


def test_second_order_matches_oracle():
    P = example_pencil(ExampleSpec(3, 16))
    N2, N1 = laurent_principal_second(P, 1.0)
    exp = laurent_oracle(P, 1.0, k_min=-3, k_max=0)
    assert rel(N2, exp[-2]) <= 1e-7 and rel(N1, exp[-1]) <= 1e-7


def test_example3_pinv_identity():
    ops = structured_operators(example_pencil(ExampleSpec(3, 16)), 1.0)
    v = np.zeros(16)
    v[1] = v[2] = 1
    target = np.zeros(16)
    target[0] = -1
    assert np.linalg.norm(ops.A0_pinv @ v - target) <= 1e-10


def test_simple_verdict_flags_on_examples():
    v = classify_simple_pole(example_pencil(ExampleSpec(2, 16)), 1.0)
    assert v.holds and set(v.condition_flags) >= {"1", "2", "3", "4", "lin_2", "lin_3", "lin_4"}
    v = classify_simple_pole(example_pencil(ExampleSpec(3, 16)), 1.0)
    assert not v.holds and not any(v.condition_flags.values())


def test_second_order_refuses_simple_pole():
    with pytest.raises(NotSecondOrder):
        classify_second_order(example_pencil(ExampleSpec(2, 16)), 1.0)


def test_nonsingular_point():
    with pytest.raises(NotSingular):
        pole_order(example_pencil(ExampleSpec(2, 16)), 0.5)


def test_oracle_rejects_bad_radius_and_nodes():
    P = example_pencil(ExampleSpec(2, 16))
    with pytest.raises(ContourError):
        laurent_oracle(P, 1.0, radius=5.0)
    with pytest.raises(InvalidInput):
        laurent_oracle(P, 1.0, k_min=-10, nodes=16)


def test_oracle_quadratic_pencil_partial_sum():
    # scalar (1 - z)(2 - z): N_{-1} = -1
    P = MatrixPencil([[[2.0]], [[-3.0]], [[1.0]]])
    exp = laurent_oracle(P, 1.0, k_min=-1, k_max=3)
    assert exp.min_order == 1
    assert abs(exp[-1][0, 0] + 1) < 1e-12
    z = 1.02
    assert abs(exp.partial_sum(z)[0, 0] - 1 / ((1 - z) * (2 - z))) < 1e-6


@pytest.mark.parametrize("i", range(10))
def test_random_engineered_pencils_unanimous(i):
    rng = np.random.default_rng(100 + i)
    P, order = random_unit_root_pencil(rng, JORDAN_PATTERNS[i % 5], quadratic=i % 2 == 1)
    assert classify_pole(P, 1.0) == order


def test_riesz_projection_properties():
    K = example_operator(ExampleSpec(2, 16))
    Pr = riesz_projection(K, 1.0)
    assert opnorm(Pr @ Pr - Pr) <= 1e-8
    # projection onto ker(I - K) along ran(I - K) equals -N_{-1} at z0 = 1
    assert rel(Pr, -residue_simple(from_ar([K]), 1.0)) <= 1e-7
    Pj = riesz_projection(JORDAN, 1.0)
    assert np.linalg.matrix_rank(Pj, tol=0.5) == 2
    with pytest.raises(ContourError):
        riesz_projection(np.diag([0.5, 0.2]), 1.0)
