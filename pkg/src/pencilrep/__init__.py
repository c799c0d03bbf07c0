"""Operator pencils, Laurent poles and I(1)/I(2) representations of AR processes."""

from .errors import (
    Assumption1Violated,
    ConditionDisagreement,
    ContourError,
    DirectSumError,
    IdenticallySingular,
    InconsistencyError,
    InvalidInput,
    NotI1,
    NotI2,
    NotSecondOrder,
    NotSimplePole,
    NotSingular,
    PencilError,
    QuadratureError,
    SingularError,
)
from .linalg import (
    SubspaceBasis,
    direct_sum_check,
    fundamental_subspaces,
    intersection,
    moore_penrose,
    oblique_projector,
    principal_angles,
)
from .pencil import MatrixPencil, derivative, evaluate, from_ar, inverse_at, spectrum, unit_disk_spectrum
from .poles import (
    classify_pole,
    classify_second_order,
    classify_simple_pole,
    laurent_oracle,
    laurent_principal_second,
    pole_order,
    residue_simple,
    riesz_projection,
)
from .representation import (
    ARModel,
    Decomposition,
    algebraic_geometric_multiplicity,
    check_assumption1,
    cointegration_spaces,
    decompose,
    i1_decomposition,
    i2_decomposition,
    p1_subspace_formulas,
)
from .simulation import (
    Trajectory,
    build_representation_path,
    sample_innovations,
    simulate_ar,
    stationarity_probe,
)

__version__ = "0.1.0"
