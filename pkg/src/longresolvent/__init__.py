"""Conversions between the three faces of one object: positive-kernel
decompositions, Givone-Roesser / Herglotz transfer-function realizations,
and long-resolvent linear pencils, with sampled numerical verification of
the identities tying them together."""

from ._backend import BACKEND
from .aglerkit import KneseWitness, compress_sos, inner_check, verify_knese
from .bessmertnyi import (
    LongResolventPencil,
    PencilDecomposition,
    herglotz_to_pencil,
    homogeneous_structure_check,
    normalize_homogeneous,
    pencil_decomposition,
    realify_decomposition,
    theta_from_phi,
)
from .cayley import (
    TupleOfMatrices,
    disk_to_halfplane,
    double_cayley,
    halfplane_to_disk,
    operator_cayley_tuple,
    value_cayley,
)
from .errors import LongResolventError
from .herglotz import (
    HerglotzRealization,
    reduce_to_plus,
    schur_to_herglotz,
    split_at_zero,
    xi_functions,
)
from .numerics import (
    DEFAULT_TOL,
    Tolerances,
    eigenspace_of_unitary,
    hermitian_eig,
    psd_sqrt,
    rank_factor_psd,
    unitary_completion,
)
from .pipeline import (
    SynthesisResult,
    knese_realization,
    pencil_roundtrip,
    pencil_to_herglotz,
    realize_disk_function,
    schur_agler_realization,
    xi_handles_from_halfplane_factors,
)
from .polyalg import FunctionHandle, MatrixPolynomial
from .realization import (
    GivoneRoesserRealization,
    defect_functions,
    lurking_isometry,
    verify_realization,
)
from .sampling import SamplePlan, SampleReport

__version__ = "0.1.0"
