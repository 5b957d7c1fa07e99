"""Signal processing for partially observed graph signals.

Fits a shift operator on an observed vertex subset jointly with a
mixture-of-local-shifts filter on the ambient graph, then runs Fourier
analysis, compression, anomaly detection, denoising and filter learning
in the fitted operator's eigenbasis.
"""

__version__ = "0.1.0"

from .embedding import (
    Embedding,
    SubsetTuple,
    build_cvd,
    extend_by_zero,
    family_dimension,
    is_essential,
    is_refinement,
    project,
    refine_default,
)
from .filters import SemiFilter, apply_local, assemble, main_spectral_set, spectral_profile
from .graphs import (
    Graph,
    Spectrum,
    connected_components,
    eigendecompose,
    generate,
    graph_from_edges,
    hop_distances,
    induced_subgraph,
    shift_matrix,
)
from .operators import SubgraphOperator, eigenbasis_magnitude_ordered, from_params, kron_reduce
from .solvers import (
    FitResult,
    OmegaSet,
    SolverOptions,
    build_omega,
    lower_bound,
    operator_difference_norm,
    solve_filter_learning,
    solve_least_squares,
    solve_operator_difference,
)
from .sparsify import (
    SparsifyConfig,
    alternating_sparse_fit,
    effective_resistance,
    eps_approx_check,
    randomized_sparsify,
    sparsify_operator,
)
from .tasks import (
    GftCoefficients,
    TaskConfig,
    add_noise_snr,
    anomaly_score,
    bandlimited,
    compress,
    denoise,
    detect,
    error_ratio,
    gft,
    igft,
    perturb_one,
    si_timestamps,
)
