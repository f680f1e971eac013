"""Fourier analysis of boundary functions and the analytic disc extension.

Conventions.  A real 2pi-periodic function phi is represented by the finite
trigonometric series

    phi_N(theta) = c0 + sum_{n=1..N} c_n cos(n theta) + s_n sin(n theta),

and its analytic completion on the closed unit disc is the power series

    P(z) = c0 + sum_{n=1..N} (c_n - i s_n) z^n,

so that Re P(e^{i theta}) = phi_N(theta) and Im P(e^{i theta}) is the
conjugate function (the periodic Hilbert transform of phi_N).  P is exactly
the truncated Schwarz (Cauchy-Poisson) integral of phi: the analytic map
whose boundary real part is phi.

Coefficients come from an FFT on a midpoint grid.  When phi blows up at a
fold endpoint (theta = 0 or pi) the midpoint rule is locally replaced by
graded Gauss-Legendre panels plus an exact tail hook below the grading
floor, so integrable singularities do not poison the low-order coefficients.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ._quadrature import (
    geometric_edges,
    panel_nodes,
    refine_boundary_integral,
    split_oscillatory,
)
from .errors import ConvergenceError, DomainError, NonIntegrableError
from .quantile import ENDPOINT_EPS, BoundaryFunction


@dataclass(frozen=True, eq=False)
class TrigSeries:
    """Finite cosine/sine series; the computational form of the disc map."""

    c0: float
    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray
    grid_size: int
    tail_estimate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "cos_coeffs", np.asarray(self.cos_coeffs, dtype=float))
        object.__setattr__(self, "sin_coeffs", np.asarray(self.sin_coeffs, dtype=float))
        if self.cos_coeffs.shape != self.sin_coeffs.shape:
            raise DomainError("cosine and sine coefficient vectors must match in length")

    @property
    def n(self) -> int:
        return len(self.cos_coeffs)

    @property
    def power_coeffs(self) -> np.ndarray:
        """Ascending complex coefficients of P(z), constant term first."""
        return np.concatenate(([self.c0], self.cos_coeffs - 1j * self.sin_coeffs))

    def truncated(self, n: int) -> "TrigSeries":
        if n > self.n:
            raise DomainError("cannot extend a series by truncation")
        return TrigSeries(self.c0, self.cos_coeffs[:n], self.sin_coeffs[:n], self.grid_size, self.tail_estimate)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "c0": self.c0,
            "cos": self.cos_coeffs.tolist(),
            "sin": self.sin_coeffs.tolist(),
            "grid_size": self.grid_size,
            "tail_estimate": self.tail_estimate,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @staticmethod
    def from_json_dict(data: dict) -> "TrigSeries":
        series = TrigSeries(
            c0=float(data["c0"]),
            cos_coeffs=np.asarray(data["cos"], dtype=float),
            sin_coeffs=np.asarray(data["sin"], dtype=float),
            grid_size=int(data["grid_size"]),
            tail_estimate=float(data["tail_estimate"]),
        )
        if series.n != int(data["n"]):
            raise DomainError("series JSON length field disagrees with coefficient arrays")
        return series

    @staticmethod
    def from_json(text: str) -> "TrigSeries":
        return TrigSeries.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class DiscPoint:
    """Interior point r e^{i theta} of the unit disc."""

    r: float
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.r < 1.0:
            raise DomainError("DiscPoint requires 0 <= r < 1")

    @property
    def z(self) -> complex:
        return self.r * complex(math.cos(self.theta), math.sin(self.theta))


# -- analysis -----------------------------------------------------------------


def _midpoint_grid(grid_size: int) -> np.ndarray:
    return -np.pi + 2.0 * np.pi * (np.arange(grid_size) + 0.5) / grid_size


def _check_integrable(phi: BoundaryFunction) -> None:
    classification, _, trace = refine_boundary_integral(
        lambda t: np.abs(phi(t)), phi.singular_at_zero, phi.singular_at_pi
    )
    if classification == "diverging":
        raise NonIntegrableError(
            f"|phi| quadrature grows without bound under refinement for {phi.label or 'phi'}",
            trace=trace,
        )


def _endpoint_patch(
    phi: BoundaryFunction,
    at_pi: bool,
    delta: float,
    floor: float,
    n_coeffs: int,
) -> np.ndarray:
    """Accurate integral of phi e^{-in theta} over the arc within delta of the endpoint.

    Valid for even phi.  Returns the complex contribution to F_n for
    n = 0..n_coeffs, including the exact sub-floor tail when available.
    """
    edges = geometric_edges(floor, delta)
    edges = split_oscillatory(edges, np.pi / max(n_coeffs, 1))
    x, w = panel_nodes(edges)
    vals = phi(np.pi - x) if at_pi else phi(x)
    n = np.arange(n_coeffs + 1)
    cosnx = np.cos(np.outer(n, x))
    contrib = 2.0 * (cosnx @ (w * vals))
    endpoint = math.pi if at_pi else 0.0
    contrib += 2.0 * phi.endpoint_tail(endpoint, floor)
    if at_pi:
        contrib *= (-1.0) ** n
    return contrib.astype(complex)


def analyze(phi: BoundaryFunction, n_coeffs: int = 2048, grid_size: int = 65536) -> TrigSeries:
    """Trigonometric coefficients of phi from a midpoint FFT with singular patches.

    Requires ``grid_size >= 4 * n_coeffs``.  Boundary functions flagged
    singular are first screened for integrability; a diverging refinement
    trace raises :class:`NonIntegrableError`.
    """
    if grid_size < 4 * n_coeffs:
        raise DomainError("analysis grid must satisfy grid_size >= 4 * n_coeffs")
    if (phi.singular_at_zero or phi.singular_at_pi) and not phi.even_symmetric:
        raise DomainError("singular-endpoint analysis is implemented for even phi only")
    if phi.singular_endpoints:
        _check_integrable(phi)

    theta = _midpoint_grid(grid_size)
    vals = phi(theta)
    h = 2.0 * np.pi / grid_size
    spec = np.fft.rfft(vals)[: n_coeffs + 1]
    n = np.arange(len(spec))
    # midpoint grid starts at -pi + h/2, not 0: undo the phase
    fn = h * spec * np.exp(1j * np.pi * n * (grid_size - 1) / grid_size)

    floor = np.pi * ENDPOINT_EPS
    for at_pi in (False, True):
        singular = phi.singular_at_pi if at_pi else phi.singular_at_zero
        if not singular:
            continue
        k_cells = max(32, grid_size // 1024)
        delta = k_cells * h
        center = np.pi if at_pi else 0.0
        dist = np.abs(np.abs(theta) - center) if at_pi else np.abs(theta)
        window = dist < delta - 1e-12 * delta
        crude = h * (np.exp(-1j * np.outer(n, theta[window])) @ vals[window])
        fn = fn - crude + _endpoint_patch(phi, at_pi, delta, floor, n_coeffs)

    c0 = float(fn[0].real) / (2.0 * np.pi)
    cos_coeffs = fn[1:].real / np.pi
    sin_coeffs = -fn[1:].imag / np.pi
    if phi.even_symmetric:
        sin_coeffs = np.zeros_like(sin_coeffs)
    base = TrigSeries(c0, cos_coeffs, sin_coeffs, grid_size)
    return TrigSeries(c0, cos_coeffs, sin_coeffs, grid_size, tail_l1_estimate(base))


def coefficient_decay_exponent(series: TrigSeries) -> float | None:
    """Power-law exponent fitted to |coefficients| over the last decade.

    Returns None when the tail is numerically zero (finite trig polynomial).
    """
    amp = np.hypot(series.cos_coeffs, series.sin_coeffs)
    n_hi = series.n
    n_lo = max(2, n_hi // 10)
    idx = np.arange(n_lo, n_hi + 1) - 1
    a = amp[idx]
    scale = float(np.max(amp)) if series.n else 0.0
    mask = a > max(scale, 1.0) * 1e-13
    if np.count_nonzero(mask) < 8:
        return None
    logn = np.log(idx[mask] + 1.0)
    loga = np.log(a[mask])
    slope = np.polyfit(logn, loga, 1)[0]
    return float(-slope)


def tail_l1_estimate(series: TrigSeries) -> float:
    """Estimated l1 mass of the dropped coefficients, from the decay fit."""
    alpha = coefficient_decay_exponent(series)
    if alpha is None:
        return 0.0
    if alpha <= 1.02:
        return math.inf
    amp = np.hypot(series.cos_coeffs, series.sin_coeffs)
    n_hi = series.n
    n_lo = max(2, n_hi // 10)
    idx = np.arange(n_lo, n_hi + 1) - 1
    a = amp[idx]
    mask = a > max(float(np.max(amp)), 1.0) * 1e-13
    level = math.exp(float(np.mean(np.log(a[mask]) + alpha * np.log(idx[mask] + 1.0))))
    frac = np.count_nonzero(mask) / len(a)  # e.g. only odd harmonics alive
    return frac * level * n_hi ** (1.0 - alpha) / (alpha - 1.0)


# -- conjugate series and principal values ------------------------------------


def hilbert_series(series: TrigSeries) -> TrigSeries:
    """Conjugate series: cos(n t) -> sin(n t), sin(n t) -> -cos(n t), mean -> 0."""
    return TrigSeries(
        c0=0.0,
        cos_coeffs=-series.sin_coeffs.copy(),
        sin_coeffs=series.cos_coeffs.copy(),
        grid_size=series.grid_size,
        tail_estimate=series.tail_estimate,
    )


DEFAULT_ETA_SCHEDULE = tuple(np.pi * 2.0 ** -k for k in range(6, 15))


def _pv_panel_edges(phi: BoundaryFunction, x: float, schedule: tuple[float, ...]) -> np.ndarray:
    """Panel edges on [eta_min, pi] honoring the eta schedule and phi's features."""
    eta_min = schedule[-1]
    edges = set(schedule) | {np.pi}
    # refine each dyadic annulus and the bulk
    sorted_etas = sorted(schedule)
    for lo, hi in zip(sorted_etas, sorted_etas[1:]):
        edges.add(0.5 * (lo + hi))
    bulk = np.linspace(sorted_etas[-1], np.pi, 25)
    edges.update(bulk.tolist())
    # integrand kinks where x -+ t crosses a feature of phi
    features = set(phi.singular_endpoints) | set(phi.jump_thetas) | {0.0, np.pi}
    for p in features:
        for t in (x - p, p - x, x + p, -x - p):
            tt = abs((t + np.pi) % (2.0 * np.pi) - np.pi)
            if eta_min < tt < np.pi:
                edges.add(float(tt))
    return np.array(sorted(e for e in edges if e >= eta_min - 1e-300))


def hilbert_pv(
    phi: BoundaryFunction,
    x: float,
    eta_schedule: tuple[float, ...] = DEFAULT_ETA_SCHEDULE,
    rtol: float = 1e-6,
    atol: float = 1e-9,
) -> float:
    """Principal-value Hilbert transform at x by symmetric-excision quadrature.

    Computes I(eta) = (1/2pi) * integral over eta <= |t| <= pi of
    phi(x - t) cot(t/2) dt in the odd-symmetrized form, then Richardson
    extrapolates the linearly-converging I(eta_k) along the halving schedule;
    accepted when successive extrapolants agree to ``rtol``.  Divergence (for
    example at a jump of phi) raises :class:`ConvergenceError` carrying the
    oscillation magnitude instead of returning a value.
    """
    schedule = tuple(sorted(eta_schedule, reverse=True))
    for s in phi.singular_endpoints:
        if abs((x - s + np.pi) % (2.0 * np.pi) - np.pi) < schedule[-1]:
            raise DomainError("principal value requested at a singular point of phi")

    edges = _pv_panel_edges(phi, x, schedule)
    nodes, weights = panel_nodes(edges, order=8)
    integrand = (phi(x - nodes) - phi(x + nodes)) / np.tan(0.5 * nodes)
    panel_sums = (weights * integrand).reshape(-1, 8).sum(axis=1)
    panel_lo = edges[:-1]

    raw = []
    for eta in schedule:
        mask = panel_lo >= eta - 1e-15
        raw.append(float(panel_sums[mask].sum()) / (2.0 * np.pi))

    extrapolated = [2.0 * b - a for a, b in zip(raw, raw[1:])]
    for prev, curr in zip(extrapolated, extrapolated[1:]):
        if abs(curr - prev) <= rtol * abs(curr) + atol:
            return curr
    oscillation = abs(extrapolated[-1] - extrapolated[-2])
    raise ConvergenceError(
        f"principal value did not converge at x={x:.6g} (oscillation {oscillation:.3e})",
        oscillation=oscillation,
        trace=extrapolated,
    )


# -- evaluation ----------------------------------------------------------------


def _power_eval(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Horner evaluation of an ascending-coefficient polynomial, vectorized."""
    acc = np.full_like(z, coeffs[-1], dtype=complex)
    for c in coeffs[-2::-1]:
        acc *= z
        acc += c
    return acc


def boundary_value(series: TrigSeries, theta) -> np.ndarray | complex:
    """phi_N(theta) + i * conjugate(theta): the series on the unit circle."""
    arr = np.asarray(theta, dtype=float)
    out = _power_eval(series.power_coeffs, np.exp(1j * arr))
    return complex(out) if np.isscalar(theta) else out


def series_values(series: TrigSeries, theta) -> np.ndarray | float:
    """Real part only: the truncated series of phi itself."""
    return boundary_value(series, theta).real


def conjugate_values(series: TrigSeries, theta) -> np.ndarray | float:
    """Imaginary boundary part: the truncated conjugate function."""
    return boundary_value(series, theta).imag


def schwarz_eval(series: TrigSeries, z) -> np.ndarray | complex:
    """The disc map P(z) = c0 + sum (c_n - i s_n) z^n strictly inside the disc."""
    if isinstance(z, DiscPoint):
        z = z.z
    arr = np.asarray(z, dtype=complex)
    if np.any(np.abs(arr) >= 1.0):
        raise DomainError("schwarz_eval requires |z| < 1; use boundary_value on the circle")
    out = _power_eval(series.power_coeffs, arr)
    return complex(out) if np.isscalar(z) or isinstance(z, complex) else out


def schwarz_eval_kernel(phi: BoundaryFunction, z, n_nodes: int = 65536) -> complex:
    """Direct midpoint quadrature of the Schwarz integral (debug oracle).

    (1/2pi) * integral of (e^{it} + z)/(e^{it} - z) phi(t) dt.  Ill-conditioned
    as |z| -> 1; intended for cross-checking :func:`schwarz_eval`, not for
    production evaluation.
    """
    if isinstance(z, DiscPoint):
        z = z.z
    z = complex(z)
    if abs(z) >= 1.0:
        raise DomainError("kernel quadrature requires |z| < 1")
    t = _midpoint_grid(n_nodes)
    e = np.exp(1j * t)
    kernel = (e + z) / (e - z)
    return complex(np.mean(kernel * phi(t)))


def grid_values(series: TrigSeries, grid_size: int) -> tuple[np.ndarray, np.ndarray]:
    """(theta_j, P(e^{i theta_j})) on the uniform grid theta_j = 2 pi j / M via FFT."""
    if grid_size < 2 * series.n + 2:
        raise DomainError("synthesis grid must resolve the series (grid_size > 2n)")
    half = np.zeros(grid_size // 2 + 1, dtype=complex)
    half[0] = series.c0 * grid_size
    half[1 : series.n + 1] = 0.5 * grid_size * (series.cos_coeffs - 1j * series.sin_coeffs)
    real = np.fft.irfft(half, grid_size)
    # the conjugate part comes from the same spectrum rotated by -i
    half[0] = 0.0
    half[1 : series.n + 1] *= -1j
    imag = np.fft.irfft(half, grid_size)
    theta = 2.0 * np.pi * np.arange(grid_size) / grid_size
    return theta, real + 1j * imag


def series_power(series: TrigSeries) -> float:
    """Mean of |P|^2 on the circle: c0^2 + sum (c_n^2 + s_n^2)."""
    return float(series.c0**2 + np.sum(series.cos_coeffs**2 + series.sin_coeffs**2))


def fejer_smoothed(series: TrigSeries) -> TrigSeries:
    """Fejer (Cesaro) damped series: coefficient n scaled by 1 - n/(N+1)."""
    n = np.arange(1, series.n + 1)
    damp = 1.0 - n / (series.n + 1.0)
    return TrigSeries(
        c0=series.c0,
        cos_coeffs=series.cos_coeffs * damp,
        sin_coeffs=series.sin_coeffs * damp,
        grid_size=series.grid_size,
        tail_estimate=series.tail_estimate,
    )
