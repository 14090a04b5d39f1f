"""Schauder-expansion toolkit for rough paths on refining partitions.

Construct nested partition sequences, expand sampled paths in the
generalized Faber-Schauder system, estimate Hölder regularity and
p-th variation from the coefficients, and generate "fake" (fractional)
Brownian ensembles whose coefficient moments match the Gaussian ones.
"""

__version__ = "0.1.0"

from .partition import (
    PartitionLevel,
    PartitionSequence,
    PartitionDiagnostics,
    PartitionStructureError,
    build_dyadic,
    build_shifted_binary,
    from_levels,
    refinement_map,
    validate,
    to_json,
    from_json,
    save_json,
    load_json,
)
from .basis import (
    BasisIndex,
    SupportTriple,
    SchauderBasis,
    CoefficientField,
    enumerate_supports,
    eval_schauder,
    eval_haar,
    decompose,
    reconstruct,
    reconstruct_on_grid,
    basis_matrix,
    check_continuity_condition,
    coeffs_to_csv,
    coeffs_from_csv,
)
from .roughness import (
    HolderEstimate,
    VariationResult,
    UnsupportedPartitionError,
    holder_seminorm_grid,
    holder_exponent_estimate,
    ciesielski_bounds,
    pth_variation,
    pth_variation_curve,
    qv_from_coeffs_dyadic,
    variation_index_estimate,
    scaled_qv,
)
from .fbm import (
    HurstIndex,
    XiTerms,
    CoeffCovariance,
    NumericalError,
    fbm_kernel,
    bridge_kernel,
    xi_terms,
    coeff_variance,
    dyadic_coeff_variance,
    coeff_covariance,
    dyadic_coeff_covariance,
    endpoint_covariance,
    assemble_covariance,
    reconstruct_kernel,
    cholesky_psd,
    covariance_to_binary,
    covariance_from_binary,
)
from .sampler import (
    MarginalSpec,
    PathConfig,
    PathEnsemble,
    LAW_NAMES,
    sample_law,
    law_ppf,
    draw_iid_coeffs,
    draw_correlated_coeffs,
    fake_bm_paths,
    fake_fbm_paths,
    sample_path_values,
    deterministic_example_a,
    deterministic_example_b,
    apply_bernoulli_mask,
    build_sequence,
    basis_for_config,
)
from .stats import (
    TestReport,
    MomentTable,
    DegenerateSampleError,
    jarque_bera,
    ks_normal,
    kolmogorov_p_value,
    empirical_moments,
    pth_variation_in_mean,
    gaussian_abs_moment,
    marginal_std,
)
