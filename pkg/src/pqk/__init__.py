"""pqk: finite reduced quantum systems glued by partial-trace projections.

The library builds finite-dimensional reduced systems (frames of
configurational d.o.f. paired with momentum operators), verifies the
structural assumptions a directed family of such systems must satisfy,
projects Gaussian density operators between systems by closed-form partial
traces, and checks the coherence that makes the family a consistent whole.
A combinatorial holonomy/flux model (DPG) provides generated example
families, and an exact almost-periodic vector layer rides along on the same
frame machinery.
"""

from .errors import (
    DegeneratePairingError,
    DimensionMismatchError,
    DivergentError,
    DocumentError,
    ExtentTooSmallError,
    FrameMismatchError,
    IncompatibleOverlapError,
    MissingActionError,
    NotARightInverseError,
    NotPositiveDefiniteError,
    NotResolvableError,
    OrderViolationError,
    PqkError,
    RankDeficientError,
    WitnessInvalidError,
)
from .frames import (
    DofId,
    KernelDecomposition,
    ProjectionMatrix,
    ReducedFrame,
    build_projection,
    compose_projections,
    identity_projection,
    kernel_decomposition,
)
from .systems import (
    AssumptionReport,
    MomentumOperator,
    OpProbe,
    OrderEdge,
    OrderWitness,
    Probes,
    SpanProbe,
    SystemLabel,
    check_assumptions,
    combine_operators,
    compose_witnesses,
    embedding_matrix,
    identity_witness,
    operator_point,
    pairing_matrix,
    projection_from_witness,
    refines,
    select_independent_dofs,
)
from .gaussian import (
    CoherentFamily,
    GaussianKernel,
    GaussianMixtureState,
    chain_consistency,
    check_coherent_family,
    hs_distance,
    hs_inner,
    kernel_matrix,
    min_eigenvalue,
    mix,
    oracle_report,
    project_state,
    project_with,
    pure_state,
    purity,
    quadrature_partial_trace,
    trace,
)
from .dpg import (
    AtomicEdge,
    DpgLabel,
    EdgeWord,
    Face,
    Graph,
    TestConnection,
    decompose_edges,
    dof_id,
    dual_flux_basis,
    flux_operator,
    graph_join,
    graph_refines,
    holonomy,
    incidence_number,
    materialize,
    random_system,
    system_join,
    witness_connection,
    word,
)
from .almost_periodic import (
    APVector,
    Frequency,
    QC,
    ap_vector,
    basis_vector,
    inner_product,
    limit_equal,
    promote,
)

__version__ = "0.1.0"
