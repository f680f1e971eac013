"""Scikit-learn style front door for the embedding pipeline.

``SkorokhodEmbedding`` is a generative estimator in the mold of the sklearn
density models: construction parameters live in ``__init__`` (so
``get_params``/``set_params``/``clone`` work), ``fit`` builds the analytic
map and the domain geometry for a target law, and ``sample`` draws exit
observations from reproducible streams.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import NonIntegrableError, NonSimpleCurveError
from .geometry import DomainModel, build_curve, is_simple
from .harmonic import analyze, fejer_smoothed
from .montecarlo import (
    ExitSamples,
    RngStream,
    euler_exit_samples,
    exact_exit_samples,
    expected_tau_series,
    wos_position_samples,
)
from .quantile import BoundaryFunction, QuantileSpec, fold_to_boundary
from .solvability import SolvabilityReport, Verdict, classify


class SkorokhodEmbedding(BaseEstimator):
    """Construct a planar domain whose Brownian exit real part has a target law.

    Parameters
    ----------
    n_coeffs : int
        Trigonometric series length N.
    grid_size : int
        Analysis grid (must be >= 4 * n_coeffs).
    boundary_resolution : int
        Vertices of the boundary polyline.
    truncation_radius : float or None
        Clip radius for unbounded targets; None picks the radius that keeps
        the excluded harmonic measure below ``harmonic_measure_tail``.
    step_size : float
        Euler discretization step for exit-time simulation.
    shell_eps : float or None
        Walk-on-spheres absorption shell; None means 1e-6 of the bounding-box
        diagonal.
    step_budget : int
        Total Euler step allowance per sampling call.
    solvability_check : bool
        Run the classification battery during fit; NON_INTEGRABLE targets are
        always refused (there is nothing to build).
    force : bool
        Proceed past a non-simple reference polyline instead of raising.
    seed : int
        Base seed for the sampling streams.

    Attributes (after fit)
    ----------------------
    boundary_ : BoundaryFunction       folded boundary data
    series_ : TrigSeries               analytic map coefficients
    solvability_ : SolvabilityReport   or None when the check is disabled
    curve_ : BoundaryCurve             raw boundary polyline
    simple_ : bool                     simplicity of the Fejer reference curve
    domain_ : DomainModel or None      membership model (None if not simple)
    expected_tau_ : float or None      coefficient-energy mean exit time
    """

    def __init__(
        self,
        n_coeffs: int = 2048,
        grid_size: int = 65536,
        boundary_resolution: int = 16384,
        truncation_radius: float | None = None,
        harmonic_measure_tail: float = 1e-3,
        step_size: float = 1e-4,
        shell_eps: float | None = None,
        step_budget: int = 10**8,
        solvability_check: bool = True,
        force: bool = False,
        seed: int = 0,
    ):
        self.n_coeffs = n_coeffs
        self.grid_size = grid_size
        self.boundary_resolution = boundary_resolution
        self.truncation_radius = truncation_radius
        self.harmonic_measure_tail = harmonic_measure_tail
        self.step_size = step_size
        self.shell_eps = shell_eps
        self.step_budget = step_budget
        self.solvability_check = solvability_check
        self.force = force
        self.seed = seed

    def fit(self, target: QuantileSpec | BoundaryFunction, y=None) -> "SkorokhodEmbedding":
        """Validate the target, analyze it, and materialize the domain."""
        if isinstance(target, QuantileSpec):
            target.require_valid()
            phi = fold_to_boundary(target)
        elif isinstance(target, BoundaryFunction):
            phi = target
        else:
            raise TypeError("fit expects a QuantileSpec or a BoundaryFunction")
        self.boundary_ = phi

        self.solvability_: SolvabilityReport | None = None
        if self.solvability_check:
            self.solvability_ = classify(phi, n_coeffs=self.n_coeffs, grid_size=self.grid_size)
            if self.solvability_.verdict == Verdict.NON_INTEGRABLE:
                raise NonIntegrableError(
                    f"target {phi.label or 'phi'} classified NON_INTEGRABLE; no embedding domain"
                )

        self.series_ = analyze(phi, n_coeffs=self.n_coeffs, grid_size=self.grid_size)
        self.curve_ = build_curve(
            self.series_,
            boundary_resolution=self.boundary_resolution,
            phi=phi,
            truncation_radius=self.truncation_radius,
            harmonic_measure_tail=self.harmonic_measure_tail,
        )
        # Gibbs ringing near atoms can fake crossings; the simplicity verdict
        # therefore reads the Fejer-smoothed reference, never the raw curve
        reference = build_curve(
            fejer_smoothed(self.series_),
            boundary_resolution=self.boundary_resolution,
            phi=phi,
            truncation_radius=self.truncation_radius,
            harmonic_measure_tail=self.harmonic_measure_tail,
        )
        check = is_simple(reference)
        self.simple_ = check.simple
        if not check.simple and not self.force:
            raise NonSimpleCurveError(
                f"boundary reference curve self-intersects at {check.crossing}", crossing=check.crossing
            )
        self.domain_: DomainModel | None = None
        raw_check = is_simple(self.curve_)
        if raw_check.simple:
            self.domain_ = DomainModel.from_curve(self.curve_, require_simple=False)
        self.expected_tau_ = expected_tau_series(self.series_)
        return self

    def _require_fitted(self) -> None:
        if not hasattr(self, "series_"):
            raise NotFittedError("this SkorokhodEmbedding instance is not fitted yet")

    def sample(self, n_samples: int = 1, method: str = "exact", stream_id: int = 0) -> ExitSamples:
        """Draw exit observations; method is "exact", "euler", or "wos"."""
        self._require_fitted()
        stream = RngStream(self.seed, stream_id)
        if method == "exact":
            return exact_exit_samples(self.series_, n_samples, stream)
        if self.domain_ is None:
            raise NonSimpleCurveError("path sampling needs a simple boundary polyline")
        if method == "euler":
            return euler_exit_samples(
                self.domain_, self.step_size, n_samples, stream, step_budget=self.step_budget
            )
        if method == "wos":
            return wos_position_samples(self.domain_, n_samples, stream, shell_eps=self.shell_eps)
        raise ValueError(f"unknown sampling method {method!r}")

    def sample_real(self, n_samples: int, stream_id: int = 0) -> np.ndarray:
        """Real parts of exact exit samples: draws from the target law itself."""
        return self.sample(n_samples, method="exact", stream_id=stream_id).re
