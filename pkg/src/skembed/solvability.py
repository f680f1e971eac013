"""Numerical solvability classification for a target law.

Three graded tests, in decreasing strength:

  1. L^p membership of the quantile for some p > 1 (strong conjugate-function
     inequality applies),
  2. the L log L functional |phi| log+ |phi| (Zygmund's theorem then puts the
     conjugate function in L^1),
  3. direct L^1 estimation of the truncated conjugate series.

Every "diverging" answer is a classification with an explicit refinement
trace, never a proof; the report always carries the evidence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._quadrature import classify_levels, refine_boundary_integral
from .errors import NonIntegrableError
from .harmonic import TrigSeries, analyze, grid_values
from .quantile import BoundaryFunction, QuantileSpec, fold_to_boundary

DIVERGING = "diverging"

DEFAULT_P_GRID = (0.5, 1.0, 1.1, 1.5, 2.0, 3.0)


class Verdict(str, Enum):
    P_GT_1 = "P_GT_1"
    ZYGMUND_SUFFICIENT = "ZYGMUND_SUFFICIENT"
    HILBERT_L1_DIRECT = "HILBERT_L1_DIRECT"
    NOT_ESTABLISHED = "NOT_ESTABLISHED"
    NON_INTEGRABLE = "NON_INTEGRABLE"


@dataclass(frozen=True)
class SolvabilityReport:
    """Verdict plus every norm estimate and the traces behind them."""

    lp_norms: dict[float, float | str]
    zygmund_value: float | str
    hilbert_l1: float | str
    verdict: Verdict
    refinement_trace: tuple[dict, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "lp_norms": {f"{p:g}": v for p, v in self.lp_norms.items()},
            "zygmund_value": self.zygmund_value,
            "hilbert_l1": self.hilbert_l1,
            "verdict": self.verdict.value,
            "refinement_trace": list(self.refinement_trace),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2)


def _trace_records(test: str, trace: list[tuple[float, float]]) -> list[dict]:
    return [{"test": test, "grid": g, "value": v} for g, v in trace]


def lp_norm(phi: BoundaryFunction, p: float, refinement_levels: int = 12):
    """Normalized L^p norm of phi, or the string "diverging".

    ((1/2pi) * integral |phi|^p)^(1/p) on graded meshes whose floor shrinks
    by four decades per level; classified diverging when the norm still grows
    by more than 5% across both of the finest level pairs.

    Returns ``(value_or_diverging, trace)``.
    """
    if p <= 0:
        raise ValueError("lp_norm requires p > 0")

    def integrand(t: np.ndarray) -> np.ndarray:
        return np.abs(phi(t)) ** p

    _, _, raw_trace = refine_boundary_integral(
        integrand, phi.singular_at_zero, phi.singular_at_pi, levels=refinement_levels
    )
    norm_trace = [(g, v ** (1.0 / p)) for g, v in raw_trace]
    values = [v for _, v in norm_trace]
    if classify_levels(values) == DIVERGING:
        return DIVERGING, norm_trace
    return values[-1], norm_trace


def zygmund_functional(phi: BoundaryFunction, refinement_levels: int = 12, log1p_variant: bool = False):
    """(1/2pi) * integral of |phi| log+ |phi|, or "diverging".

    ``log1p_variant`` swaps log+(x) for log(1 + x), an equivalent gauge for
    the same integrability class.  Returns ``(value_or_diverging, trace)``.
    """

    def integrand(t: np.ndarray) -> np.ndarray:
        a = np.abs(phi(t))
        if log1p_variant:
            return a * np.log1p(a)
        return a * np.maximum(np.log(np.maximum(a, 1e-300)), 0.0)

    classification, value, trace = refine_boundary_integral(
        integrand, phi.singular_at_zero, phi.singular_at_pi, levels=refinement_levels
    )
    if classification == DIVERGING:
        return DIVERGING, trace
    return value, trace


def hilbert_l1(series: TrigSeries, phi: BoundaryFunction | None = None):
    """Normalized L^1 grid norm of the truncated conjugate series.

    Evaluates the conjugate series at nested dyadic truncations up to N on a
    dense grid.  The last pair agreeing within 1% relative classifies the
    conjugate as integrable; so does a strictly decreasing (Cauchy-trend)
    increment sequence, in which case the reported value adds the geometric
    extrapolation of the remaining increments.  An integrable conjugate with
    a 1/(t log^2 t)-type spike converges only like 1/log N, which the flat 1%
    rule alone would never certify at practical N.  Returns
    ``(value_or_diverging, trace)``.
    """
    n = series.n
    grid_size = max(8 * n, 8192)
    trace = []
    for k in (16, 8, 4, 2, 1):
        n_k = max(1, n // k)
        _, values = grid_values(series.truncated(n_k), grid_size)
        trace.append((float(n_k), float(np.mean(np.abs(values.imag)))))
    norms = [v for _, v in trace]
    (_, prev), (_, last) = trace[-2], trace[-1]
    if abs(last - prev) <= 0.01 * max(abs(prev), 1e-300):
        return last, trace
    increments = np.diff(norms)
    decreasing = np.all(np.diff(increments[-3:]) < 0.0) and np.all(increments[-3:] > 0.0)
    if decreasing:
        ratio = increments[-1] / increments[-2]
        if ratio < 0.97:
            return last + increments[-1] * ratio / (1.0 - ratio), trace
    return DIVERGING, trace


def assemble_verdict(
    lp_results: dict[float, float | str],
    zygmund: float | str,
    hilbert: float | str,
) -> Verdict:
    """Verdict precedence: any finite p > 1 wins, then L log L, then direct L^1.

    A diverging L^1 norm of phi itself means NON_INTEGRABLE; when every test
    fails but phi is still integrable the report says NOT_ESTABLISHED, which
    deliberately does not claim the embedding fails (necessity of conjugate
    integrability is open).
    """
    if any(p > 1.0 and not isinstance(v, str) for p, v in lp_results.items()):
        return Verdict.P_GT_1
    if not isinstance(zygmund, str):
        return Verdict.ZYGMUND_SUFFICIENT
    if not isinstance(hilbert, str):
        return Verdict.HILBERT_L1_DIRECT
    if lp_results.get(1.0) == DIVERGING:
        return Verdict.NON_INTEGRABLE
    return Verdict.NOT_ESTABLISHED


def classify(
    target: QuantileSpec | BoundaryFunction,
    p_grid: tuple[float, ...] = DEFAULT_P_GRID,
    n_coeffs: int = 2048,
    grid_size: int = 65536,
    refinement_levels: int = 12,
) -> SolvabilityReport:
    """Run the full battery and assemble the verdict.

    Precedence: P_GT_1 beats ZYGMUND_SUFFICIENT beats HILBERT_L1_DIRECT;
    a diverging L^1 norm of phi itself yields NON_INTEGRABLE, otherwise
    NOT_ESTABLISHED.  NOT_ESTABLISHED deliberately does not claim the
    embedding fails; necessity of the conjugate-integrability condition is
    open.
    """
    if isinstance(target, QuantileSpec):
        target.require_valid()
        phi = fold_to_boundary(target)
    else:
        phi = target

    trace: list[dict] = []
    lp_results: dict[float, float | str] = {}
    for p in p_grid:
        value, p_trace = lp_norm(phi, p, refinement_levels)
        lp_results[p] = value
        trace.extend(_trace_records(f"lp:{p:g}", p_trace))

    zyg, z_trace = zygmund_functional(phi, refinement_levels)
    trace.extend(_trace_records("zygmund", z_trace))

    hil: float | str
    if lp_results.get(1.0) == DIVERGING:
        hil = DIVERGING
    else:
        try:
            series = analyze(phi, n_coeffs=n_coeffs, grid_size=grid_size)
        except NonIntegrableError:
            hil = DIVERGING
        else:
            hil, h_trace = hilbert_l1(series, phi)
            trace.extend(_trace_records("hilbert_l1", h_trace))

    verdict = assemble_verdict(lp_results, zyg, hil)
    return SolvabilityReport(
        lp_norms=lp_results,
        zygmund_value=zyg,
        hilbert_l1=hil,
        verdict=verdict,
        refinement_trace=tuple(trace),
    )
