"""Schauder spectra of structured operators on l2.

A lazy algebra of column/row-finite operators, exact Schauder-spectrum
computation for supported classes, and the deflation constructions that
turn a Schauder operator into one with empty Schauder spectrum, backed
by machine-checkable eigenvalue-exclusion certificates.
"""

__version__ = "0.1.0"

from .errors import (
    ConvergenceFailureError,
    EmptyInputError,
    NotCompactError,
    NotSummableError,
    PreconditionViolatedError,
    SchauderSpecError,
    SpecFormatError,
    StepCapExceededError,
    UnsupportedClassError,
)
from .index_maps import (
    INFINITE,
    MultiplicityList,
    Permutation,
    SpreadSpec,
    decompose_into_spreads,
    deinterleave,
    expand_multiplicities,
    identity_permutation,
    interleave_z,
    one_line_permutation,
    sigma_bilateral,
    z_translation_permutation,
)
from .op_algebra import (
    Adjoint,
    BlockDirectSum,
    Diagonal,
    FinVector,
    LambdaShift,
    OperatorExpr,
    PermutationUnitary,
    Product,
    Scale,
    ShiftForm,
    ShiftRecognition,
    Spread,
    Sum,
    adjoint_shift_form,
    apply,
    backward_unilateral_shift,
    bilateral_backward_unitary,
    cibws,
    cibws_from_z_definition,
    cibws_weight_rule,
    entry,
    forward_unilateral_shift,
    recognize_shift_form,
    truncate,
    truncate_complex,
)
from .schauder import (
    DeflationResult,
    EmptySetMembers,
    FiniteSetMembers,
    SchauderSpectrumReport,
    SchauderVerdict,
    SelfAdjointIntervalModel,
    VanishingSequenceMembers,
    audit_deflation,
    classify_compact,
    deflate,
    deflate_basic,
    deflate_block_continuous,
    deflate_discrete,
    deflate_finite_spectrum,
    is_compact_structural,
    is_schauder,
    schauder_spectrum,
)
from .sequences import (
    AffineRule,
    ArithmeticSequence,
    CallableRule,
    ClosedFormSequence,
    ConstantRule,
    ExplicitPrefixSequence,
    ExplicitThenRule,
    GeometricRule,
    IndexSequence,
    MergedAbsDecreasingRule,
    OffsetRule,
    PowerLawRule,
    RepeatedRule,
    ScalarRule,
    ScaledRule,
    evens,
    naturals,
    odds,
)
from .spectral import (
    BoundedCertified,
    BoundedNumerically,
    CertificateGridConfig,
    EigenExclusionCertificate,
    KernelRangeVerdict,
    ProductEstimate,
    UnboundedWitness,
    adjoint_exclusion,
    block_norm_blowup,
    check_single_orbit,
    claim1_find_N,
    dense_eigs,
    grid_certificates,
    infinite_product,
    is_bounded_verdict,
    kernel_trivial,
    lambda_grid,
    orbit_similarity_diagonal,
    replay_block_certificate,
    replay_shift_certificate,
    shields_similar,
    shift_eigen_exclude,
    similarity_diagonal,
)
