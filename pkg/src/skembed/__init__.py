"""Planar Skorokhod embedding toolkit.

Given a zero-mean target law (as a quantile function), build the analytic
disc map whose boundary real part is the folded quantile, test the
solvability conditions (L^p membership, L log L, conjugate integrability),
materialize the image domain, and verify the embedding by exact boundary
sampling against independent Brownian-path simulation.
"""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DomainError,
    MissingArtifactError,
    NonIntegrableError,
    NonSimpleCurveError,
    OutsideDomainError,
    SkembedError,
    SpecValidationError,
    StepBudgetError,
    TableFormatError,
)
from .quantile import (
    BoundaryFunction,
    QuantileSpec,
    ValidationResult,
    atom_spec,
    fold_to_boundary,
    heavy_tail_spec,
    koebe_boundary,
    koebe_exit_cdf,
    load_table_csv,
    quantile_eval,
    table_spec,
    two_point_spec,
    uniform_spec,
    validate,
)
from .harmonic import (
    DiscPoint,
    TrigSeries,
    analyze,
    boundary_value,
    conjugate_values,
    fejer_smoothed,
    hilbert_pv,
    hilbert_series,
    schwarz_eval,
    schwarz_eval_kernel,
    series_values,
)
from .solvability import (
    DIVERGING,
    SolvabilityReport,
    Verdict,
    classify,
    hilbert_l1,
    lp_norm,
    zygmund_functional,
)
from .geometry import (
    BoundaryCurve,
    DomainModel,
    DistanceResult,
    SimplicityResult,
    build_curve,
    circle_curve,
    distance_to_boundary,
    is_inside,
    is_simple,
    load_curve_csv,
    render_svg,
    winding_number,
    write_curve_csv,
    write_svg,
)
from .montecarlo import (
    ExitSample,
    ExitSamples,
    Method,
    MomentEstimate,
    RngStream,
    euler_exit_sample,
    euler_exit_samples,
    exact_exit_sample,
    exact_exit_samples,
    expected_tau_series,
    wos_position_sample,
    raw_boundary_samples,
    read_samples_binary,
    run_streams,
    tau_moment,
    wos_position_samples,
    write_samples_binary,
    write_samples_csv,
)
from .stats import (
    EcdfView,
    KsResult,
    MomentResult,
    empirical_moment,
    ks_one_sample,
    ks_two_sample,
    moment_unstable,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__all__.append("SkorokhodEmbedding")


def __getattr__(name):
    # lazy: pulling in sklearn only when the estimator facade is requested
    if name == "SkorokhodEmbedding":
        from .embedding import SkorokhodEmbedding

        return SkorokhodEmbedding
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
