"""Sign retrieval of real spectra with compactly supported transforms, and the
phase retrieval problems that reduce to it."""

from ._validation import InconsistentMeasurementsError, InvalidLayoutError
from .applications import (
    AUTO,
    VprInput,
    separated_objects_recover,
    split_correlation_terms,
    vpr3_recover,
    vpr_solve,
)
from .estimators import SignRetriever, SupportEstimator
from .oracle import brute_force_sign_solutions, check_instance, count_constrained_solutions
from .segmentation import (
    Segmentation,
    WeightedSegmentation,
    guaranteed_segmentation,
    heuristic_segmentation,
    merge_segmentations,
    threshold,
)
from .simulation import (
    GLOBAL_PHASE,
    GLOBAL_PHASE_REFLECTION,
    SIGN,
    Layout,
    MonteCarloConfig,
    NoiseConfig,
    TrialReport,
    apply_noise,
    gen_complex_signal,
    gen_real_spectrum_signal,
    gen_separated_pair,
    monte_carlo,
    mse,
)
from .solver import assemble, boundary_rows, compact_support_rows, expand_and_project, retrieve_sign, solve_pinned
from .spectral import (
    count_sign_changes,
    cs_index_set,
    dft,
    idft,
    out_of_support_energy,
    sign_of_real_spectrum,
)
from .support import estimate_support

__version__ = "0.1.0"
