"""Shared graded-mesh quadrature used by the harmonic and solvability modules.

Boundary functions produced by folding a quantile may blow up (integrably or
not) at theta = 0 or theta = +-pi.  All integrals here therefore run on
composite Gauss-Legendre panels that are uniform in the bulk of (0, pi) and
geometrically graded toward flagged endpoints, down to a floor that shrinks
with the refinement level.  Divergence is a *classification* read off the
growth of the values across levels, never a proof.
"""

from __future__ import annotations

import numpy as np

GROWTH_TOL = 0.05  # relative growth per level that flags divergence

# Floors shrink four decades per level, reaching 1e-50 at level 12.  The
# depth matters: borderline-integrable profiles (|q| log+|q| of a law with a
# 1/(u log^3 u) tail) converge only like 1/log(floor), and shallower
# schedules leave their growth rate sitting on the 5% threshold.  Deep
# floors are cheap because the mesh is geometric.
DEFAULT_LEVELS = 12

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def panel_nodes(edges: np.ndarray, order: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights for the panels defined by ``edges``."""
    x, w = _gl_rule(order)
    a = edges[:-1][:, None]
    b = edges[1:][:, None]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b) + half * x[None, :]).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


def geometric_edges(lo: float, hi: float, per_decade: int = 3) -> np.ndarray:
    """Panel edges from ``lo`` to ``hi`` spaced geometrically (lo, hi > 0)."""
    n_dec = np.log10(hi / lo)
    n_panels = max(1, int(np.ceil(n_dec * per_decade)))
    return np.geomspace(lo, hi, n_panels + 1)


def split_oscillatory(edges: np.ndarray, max_width: float) -> np.ndarray:
    """Subdivide panels wider than ``max_width`` (for oscillatory factors)."""
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        k = max(1, int(np.ceil((b - a) / max_width)))
        out.append(np.linspace(a, b, k + 1)[:-1])
    out.append(edges[-1:])
    return np.concatenate(out)


def half_period_mesh(
    singular_at_zero: bool,
    singular_at_pi: bool,
    floor: float,
    bulk_panels: int = 64,
    per_decade: int = 3,
    order: int = 8,
) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature mesh on (0, pi) graded toward flagged singular endpoints.

    ``floor`` is the smallest distance to a singular endpoint that the mesh
    resolves; mass below the floor is the caller's business (tail hooks).
    """
    delta = np.pi / bulk_panels
    pieces = []
    lo = 0.0
    if singular_at_zero:
        pieces.append(geometric_edges(floor, delta, per_decade))
        lo = delta
    hi = np.pi
    tail = None
    if singular_at_pi:
        tail = np.pi - geometric_edges(floor, delta, per_decade)[::-1]
        hi = np.pi - delta
    n_bulk = max(1, int(round((hi - lo) / delta)))
    pieces.append(np.linspace(lo, hi, n_bulk + 1))
    if tail is not None:
        pieces.append(tail)
    edges = np.unique(np.concatenate(pieces))
    return panel_nodes(edges, order)


def classify_levels(values: list[float], growth_tol: float = GROWTH_TOL) -> str:
    """'diverging' when the last two level-to-level growths both exceed tol."""
    if len(values) < 3:
        return "finite"
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        return "diverging"
    with np.errstate(divide="ignore", invalid="ignore"):
        growth = np.diff(v) / np.abs(v[:-1])
    return "diverging" if np.all(growth[-2:] > growth_tol) else "finite"


def refine_boundary_integral(
    integrand,
    singular_at_zero: bool,
    singular_at_pi: bool,
    levels: int = DEFAULT_LEVELS,
    growth_tol: float = GROWTH_TOL,
) -> tuple[str, float, list[tuple[float, float]]]:
    """Classify (1/2pi) * integral over (-pi, pi) of ``integrand``.

    ``integrand(theta_nodes)`` must accept positive theta and is evaluated on
    both half-axes (callers fold the sign in; every boundary function here is
    evaluated as integrand(t) + integrand(-t) via its own wrapping).

    Returns ``(classification, value, trace)`` where the trace pairs each
    level's floor with its value and the value is the finest level's.
    """
    singular = singular_at_zero or singular_at_pi
    trace: list[tuple[float, float]] = []
    value = np.nan
    for level in range(1, levels + 1):
        floor = np.pi * 10.0 ** -(2 + 4 * level)
        nodes, weights = half_period_mesh(singular_at_zero, singular_at_pi, floor)
        total = float(np.sum(weights * (integrand(nodes) + integrand(-nodes))))
        value = total / (2.0 * np.pi)
        trace.append((floor, value))
        if not singular and level >= 3:
            break  # bounded integrand: deeper floors change nothing
    classification = classify_levels([v for _, v in trace], growth_tol)
    return classification, value, trace
