"""The embedding domain as a boundary polyline, with the queries samplers need.

The domain is materialized by sampling the series boundary values on a
uniform angle grid.  Unbounded targets get a truncated polyline: vertices
whose true boundary magnitude exceeds a radius are dropped and the dropped
angle measure is recorded as a harmonic-measure tail bound, which downstream
simulation quotes as an explicit bias.

Membership and distance queries are exact polygon computations, accelerated
by a conservative raster grid (cells straddling the boundary fall back to
exact winding tests), so the Euler stepper can classify tens of millions of
points in bounded time.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonSimpleCurveError, OutsideDomainError
from .harmonic import TrigSeries, boundary_value
from .quantile import BoundaryFunction

OUTSIDE, INSIDE, ON_BOUNDARY = 0, 1, 2

#: boundary snap tolerance, relative to the bounding-box diagonal
SNAP_REL = 1e-9


@dataclass(frozen=True)
class TruncationInfo:
    radius: float
    arcs: tuple[tuple[float, float], ...]
    tail_mass: float

    def to_json_dict(self) -> dict:
        return {
            "radius": self.radius,
            "arcs": [list(a) for a in self.arcs],
            "tail_mass": self.tail_mass,
        }


@dataclass(frozen=True, eq=False)
class BoundaryCurve:
    """Closed polyline of boundary samples, theta-ordered."""

    theta: np.ndarray
    vertices: np.ndarray
    closed: bool
    resolution: int
    truncation: TruncationInfo | None = None

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def xy(self) -> np.ndarray:
        return np.column_stack((self.vertices.real, self.vertices.imag))

    @property
    def bounding_box(self) -> tuple[float, float, float, float]:
        x, y = self.vertices.real, self.vertices.imag
        return float(x.min()), float(y.min()), float(x.max()), float(y.max())

    @property
    def bbox_diagonal(self) -> float:
        x0, y0, x1, y1 = self.bounding_box
        return math.hypot(x1 - x0, y1 - y0)


def _auto_radius(phi: BoundaryFunction, vertices: np.ndarray, tail_target: float) -> float:
    """Smallest radius keeping the dropped angle measure under ``tail_target``.

    Both clip criteria get half the budget: the arc where the true |phi|
    exceeds the radius, and the vertices where the series magnitude (which
    includes the conjugate part) does.
    """
    u_star = max(tail_target / 2.0, 1e-12)
    candidates = [float(np.quantile(np.abs(vertices), 1.0 - tail_target / 2.0))]
    if phi.singular_at_zero:
        candidates.append(abs(phi(math.pi * u_star)))
    if phi.singular_at_pi:
        candidates.append(abs(phi(math.pi * (1.0 - u_star))))
    return max(candidates)


def _dropped_arcs(theta: np.ndarray, drop: np.ndarray) -> tuple[tuple[float, float], ...]:
    """Contiguous dropped runs on the circular grid, as (theta_lo, theta_hi)."""
    if not drop.any():
        return ()
    m = len(theta)
    step = 2.0 * np.pi / m
    idx = np.nonzero(drop)[0]
    runs = []
    start = prev = idx[0]
    for i in idx[1:]:
        if i == prev + 1:
            prev = i
            continue
        runs.append((start, prev))
        start = prev = i
    runs.append((start, prev))
    # merge a wrap-around pair
    if len(runs) > 1 and runs[0][0] == 0 and runs[-1][1] == m - 1:
        first, last = runs[0], runs.pop()
        runs[0] = (last[0], first[1] + m)
    arcs = []
    for a, b in runs:
        arcs.append((float(theta[a % m] - 0.5 * step), float(theta[a % m] + (b - a + 0.5) * step)))
    return tuple(arcs)


def build_curve(
    series: TrigSeries,
    boundary_resolution: int = 16384,
    phi: BoundaryFunction | None = None,
    truncation_radius: float | None = None,
    harmonic_measure_tail: float = 1e-3,
) -> BoundaryCurve:
    """Sample the series boundary into a polyline, clipping unbounded arcs.

    ``phi`` supplies the true boundary magnitudes used for clipping; without
    it only the series magnitude backstop applies.  Bounded targets (no
    singular flags, no explicit radius) come back closed and unclipped.
    """
    if boundary_resolution < 4:
        raise DomainError("boundary resolution must be at least 4")
    theta = -np.pi + 2.0 * np.pi * np.arange(boundary_resolution) / boundary_resolution
    verts = boundary_value(series, theta)

    singular = phi is not None and bool(phi.singular_endpoints)
    if not singular and truncation_radius is None:
        return BoundaryCurve(theta, verts, True, boundary_resolution, None)

    if truncation_radius is not None:
        radius = truncation_radius
    else:
        radius = _auto_radius(phi, verts, harmonic_measure_tail)
    drop = np.abs(verts) > radius
    if phi is not None:
        drop |= np.abs(phi(theta)) > radius
    if not drop.any():
        return BoundaryCurve(theta, verts, True, boundary_resolution, TruncationInfo(radius, (), 0.0))

    arcs = _dropped_arcs(theta, drop)
    info = TruncationInfo(radius=radius, arcs=arcs, tail_mass=float(drop.sum()) / boundary_resolution)
    return BoundaryCurve(theta[~drop], verts[~drop], False, boundary_resolution, info)


# -- simplicity ----------------------------------------------------------------


@dataclass(frozen=True)
class SimplicityResult:
    simple: bool
    crossing: tuple[int, int] | None
    degenerate_segments: tuple[int, ...]

    def __bool__(self) -> bool:
        return self.simple


def _segments(vertices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return vertices, np.roll(vertices, -1)


def _cross2(ox, oy, ax, ay, bx, by):
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def is_simple(curve: BoundaryCurve | np.ndarray) -> SimplicityResult:
    """Segment-intersection sweep over the closed polyline.

    Segments are sorted by their lower x extent; each is tested against the
    later segments whose x intervals overlap its own, which is near-linear
    for boundary-like curves.  Adjacent segments are exempt; any other
    contact, including collinear overlap (slit touching), fails.
    """
    verts = curve.vertices if isinstance(curve, BoundaryCurve) else np.asarray(curve, dtype=complex)
    n = len(verts)
    if n < 3:
        raise DomainError("simplicity test needs at least 3 vertices")
    a, b = _segments(verts)
    ax, ay, bx, by = a.real, a.imag, b.real, b.imag

    seg_len = np.hypot(bx - ax, by - ay)
    scale = float(np.max(seg_len))
    degenerate = tuple(int(i) for i in np.nonzero(seg_len <= 1e-15 * max(scale, 1.0))[0])

    xlo = np.minimum(ax, bx)
    xhi = np.maximum(ax, bx)
    order = np.argsort(xlo, kind="stable")
    xlo_sorted = xlo[order]
    eps = 1e-14 * max(scale, 1.0)

    for rank, i in enumerate(order):
        hi = np.searchsorted(xlo_sorted, xhi[i] + eps, side="right")
        cand = order[rank + 1 : hi]
        if cand.size == 0:
            continue
        gap = np.abs(cand - i)
        cand = cand[(gap > 1) & (gap < n - 1)]
        if cand.size == 0:
            continue
        # bounding-box reject in y
        ylo_i = min(ay[i], by[i]) - eps
        yhi_i = max(ay[i], by[i]) + eps
        ymin = np.minimum(ay[cand], by[cand])
        ymax = np.maximum(ay[cand], by[cand])
        cand = cand[(ymax >= ylo_i) & (ymin <= yhi_i)]
        if cand.size == 0:
            continue
        d1 = _cross2(ax[i], ay[i], bx[i], by[i], ax[cand], ay[cand])
        d2 = _cross2(ax[i], ay[i], bx[i], by[i], bx[cand], by[cand])
        d3 = _cross2(ax[cand], ay[cand], bx[cand], by[cand], ax[i], ay[i])
        d4 = _cross2(ax[cand], ay[cand], bx[cand], by[cand], bx[i], by[i])
        tol = eps * max(scale, 1.0)
        proper = ((d1 > tol) & (d2 < -tol) | (d1 < -tol) & (d2 > tol)) & (
            (d3 > tol) & (d4 < -tol) | (d3 < -tol) & (d4 > tol)
        )
        touching = (np.abs(d1) <= tol) | (np.abs(d2) <= tol) | (np.abs(d3) <= tol) | (np.abs(d4) <= tol)
        hit = proper | touching
        if hit.any():
            j = int(cand[np.nonzero(hit)[0][0]])
            return SimplicityResult(False, (int(i), j), degenerate)
    return SimplicityResult(True, None, degenerate)


# -- membership ----------------------------------------------------------------


def winding_number(vertices: np.ndarray, point: complex) -> int:
    """Integer winding of the closed polyline about ``point``."""
    a, b = _segments(vertices)
    px, py = point.real, point.imag
    upward = (a.imag <= py) & (b.imag > py)
    downward = (a.imag > py) & (b.imag <= py)
    left = _cross2(a.real, a.imag, b.real, b.imag, px, py)
    return int(np.sum(upward & (left > 0)) - np.sum(downward & (left < 0)))


def _winding_batch(vertices: np.ndarray, pts: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Winding numbers for many points at once (the Euler stepper's hot path)."""
    a, b = _segments(vertices)
    ax, ay, bx, by = a.real, a.imag, b.real, b.imag
    out = np.empty(len(pts), dtype=np.int64)
    for lo in range(0, len(pts), chunk):
        px = pts[lo : lo + chunk].real[:, None]
        py = pts[lo : lo + chunk].imag[:, None]
        upward = (ay <= py) & (by > py)
        downward = (ay > py) & (by <= py)
        left = (bx - ax) * (py - ay) - (px - ax) * (by - ay)
        out[lo : lo + chunk] = np.sum(upward & (left > 0), axis=1) - np.sum(downward & (left < 0), axis=1)
    return out


class _MembershipGrid:
    """Raster acceleration for point classification.

    Cells are INSIDE/OUTSIDE when the closed cell provably avoids the
    boundary (conservative dilation of a dense sampling of every segment);
    everything else is MIXED and falls back to exact tests.
    """

    MIXED = 3

    def __init__(self, vertices: np.ndarray, cells: int = 1024):
        self.vertices = vertices
        x, y = vertices.real, vertices.imag
        pad = 1e-9 + 1e-6 * max(np.ptp(x), np.ptp(y))
        self.x0, self.y0 = float(x.min() - pad), float(y.min() - pad)
        self.x1, self.y1 = float(x.max() + pad), float(y.max() + pad)
        self.nx = self.ny = cells
        self.hx = (self.x1 - self.x0) / self.nx
        self.hy = (self.y1 - self.y0) / self.ny
        self.state = np.empty((self.ny, self.nx), dtype=np.uint8)
        self._build()

    def _build(self):
        a, b = _segments(self.vertices)
        state = self.state
        state[:] = 255  # unresolved
        # conservative MIXED marking: arc-length sampling finer than a quarter
        # cell (so consecutive samples cannot skip a cell), dilated 3x3
        step = 0.25 * min(self.hx, self.hy)
        seg_len = np.abs(b - a)
        cum = np.concatenate(([0.0], np.cumsum(seg_len)))
        perimeter = cum[-1]
        s = np.arange(0.0, perimeter, step)
        k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(a) - 1)
        t = (s - cum[k]) / np.maximum(seg_len[k], 1e-300)
        pts = np.concatenate((a[k] + t * (b[k] - a[k]), self.vertices))
        ix = ((pts.real - self.x0) / self.hx).astype(int)
        iy = ((pts.imag - self.y0) / self.hy).astype(int)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                jx = np.clip(ix + dx, 0, self.nx - 1)
                jy = np.clip(iy + dy, 0, self.ny - 1)
                state[jy, jx] = self.MIXED
        # scanline parity fill at cell centers
        ax, ay = a.real, a.imag
        bx, by = b.real, b.imag
        cx = self.x0 + (np.arange(self.nx) + 0.5) * self.hx
        for row in range(self.ny):
            cy = self.y0 + (row + 0.5) * self.hy
            m = ((ay <= cy) & (by > cy)) | ((by <= cy) & (ay > cy))
            if m.any():
                t = (cy - ay[m]) / (by[m] - ay[m])
                xs = np.sort(ax[m] + t * (bx[m] - ax[m]))
                parity = np.searchsorted(xs, cx, side="left") % 2
            else:
                parity = np.zeros(self.nx, dtype=int)
            fill = np.where(parity == 1, INSIDE, OUTSIDE).astype(np.uint8)
            unresolved = state[row] == 255
            state[row, unresolved] = fill[unresolved]

    def cell_state(self, w: np.ndarray) -> np.ndarray:
        ix = np.floor((w.real - self.x0) / self.hx).astype(int)
        iy = np.floor((w.imag - self.y0) / self.hy).astype(int)
        out = np.full(w.shape, OUTSIDE, dtype=np.uint8)
        ok = (ix >= 0) & (ix < self.nx) & (iy >= 0) & (iy < self.ny)
        out[ok] = self.state[iy[ok], ix[ok]]
        return out


@dataclass(eq=False)
class DomainModel:
    """A simple closed boundary with the origin inside; immutable after build."""

    curve: BoundaryCurve
    origin_inside: bool
    simplicity: SimplicityResult

    def __post_init__(self):
        self._grid: _MembershipGrid | None = None
        self._snap = SNAP_REL * self.curve.bbox_diagonal

    @classmethod
    def from_curve(cls, curve: BoundaryCurve, require_simple: bool = True) -> "DomainModel":
        result = is_simple(curve)
        if require_simple and not result.simple:
            raise NonSimpleCurveError(
                f"boundary polyline self-intersects at segment pair {result.crossing}",
                crossing=result.crossing,
            )
        origin_inside = winding_number(curve.vertices, 0j) != 0
        return cls(curve=curve, origin_inside=origin_inside, simplicity=result)

    @property
    def bounding_box(self):
        return self.curve.bounding_box

    def _membership(self) -> _MembershipGrid:
        if self._grid is None:
            self._grid = _MembershipGrid(self.curve.vertices)
        return self._grid

    def locate(self, w) -> np.ndarray | int:
        """0 outside, 1 inside, 2 within snap tolerance of the boundary."""
        if not self.simplicity.simple:
            raise NonSimpleCurveError("membership queries refuse a non-simple curve")
        arr = np.atleast_1d(np.asarray(w, dtype=complex))
        state = self._membership().cell_state(arr).astype(np.int64)
        mixed = np.nonzero(state == _MembershipGrid.MIXED)[0]
        if mixed.size:
            pts = arr[mixed]
            dist = batch_distance(self, pts)
            wind = _winding_batch(self.curve.vertices, pts)
            exact = np.where(dist <= self._snap, ON_BOUNDARY, np.where(wind != 0, INSIDE, OUTSIDE))
            state[mixed] = exact
        return int(state[0]) if np.isscalar(w) or np.asarray(w).ndim == 0 else state


def is_inside(domain: DomainModel, w) -> np.ndarray | bool:
    """Strict interior membership by winding parity (boundary snaps are not inside)."""
    state = domain.locate(w)
    if isinstance(state, np.ndarray):
        return state == INSIDE
    return state == INSIDE


def _nearest_on_polyline(vertices: np.ndarray, w: complex) -> tuple[float, complex, int]:
    a, b = _segments(vertices)
    d = b - a
    L2 = (d.real**2 + d.imag**2).clip(min=1e-300)
    t = (((w - a).real * d.real) + ((w - a).imag * d.imag)) / L2
    t = np.clip(t, 0.0, 1.0)
    proj = a + t * d
    dist2 = (proj.real - w.real) ** 2 + (proj.imag - w.imag) ** 2
    k = int(np.argmin(dist2))
    return float(math.sqrt(dist2[k])), complex(proj[k]), k


@dataclass(frozen=True)
class DistanceResult:
    value: float
    nearest: complex
    segment: int
    resolution_bound: float


def distance_to_boundary(domain: DomainModel, w: complex) -> DistanceResult:
    """Exact distance from an interior point to the polyline.

    ``resolution_bound`` (half the longest chord) bounds how far the polyline
    itself can sit from the underlying smooth boundary, so the value is a
    lower bound for the true distance only up to that resolution error.
    """
    if domain.locate(w) != INSIDE:
        raise OutsideDomainError(f"distance_to_boundary requires an interior point, got {w}")
    verts = domain.curve.vertices
    dist, proj, seg = _nearest_on_polyline(verts, complex(w))
    a, b = _segments(verts)
    res = 0.5 * float(np.max(np.abs(b - a)))
    return DistanceResult(dist, proj, seg, res)


def batch_distance(domain: DomainModel, w: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Distances from many points to the polyline (no interiority check)."""
    a, b = _segments(domain.curve.vertices)
    d = b - a
    L2 = (d.real**2 + d.imag**2).clip(min=1e-300)
    out = np.empty(len(w), dtype=float)
    for lo in range(0, len(w), chunk):
        ww = w[lo : lo + chunk, None]
        t = ((ww - a).real * d.real + (ww - a).imag * d.imag) / L2
        t = np.clip(t, 0.0, 1.0)
        proj = a + t * d
        out[lo : lo + chunk] = np.sqrt(
            np.min((proj.real - ww.real) ** 2 + (proj.imag - ww.imag) ** 2, axis=1)
        )
    return out


def first_boundary_crossing(
    domain: DomainModel, starts: np.ndarray, ends: np.ndarray, chunk: int = 256
) -> np.ndarray:
    """Earliest intersection of each chord (start -> end) with the boundary.

    Falls back to the nearest boundary point of the endpoint for chords that
    miss every segment numerically (possible after a long tunneling step).
    """
    a, b = _segments(domain.curve.vertices)
    sx, sy = a.real, a.imag
    dxs, dys = (b - a).real, (b - a).imag
    out = np.empty(len(starts), dtype=complex)
    for lo in range(0, len(starts), chunk):
        p = starts[lo : lo + chunk, None]
        q = ends[lo : lo + chunk, None]
        rx, ry = (q - p).real, (q - p).imag
        qpx, qpy = sx - p.real, sy - p.imag
        denom = rx * dys - ry * dxs
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (qpx * dys - qpy * dxs) / denom
            u = (qpx * ry - qpy * rx) / denom
        valid = (np.abs(denom) > 1e-300) & (t >= 0.0) & (t <= 1.0) & (u >= -1e-12) & (u <= 1.0 + 1e-12)
        t = np.where(valid, t, np.inf)
        tmin = t.min(axis=1)
        hit = np.isfinite(tmin)
        res = np.where(hit, p[:, 0] + np.where(hit, tmin, 0.0) * (q[:, 0] - p[:, 0]), q[:, 0])
        for i in np.nonzero(~hit)[0]:
            _, proj, _ = _nearest_on_polyline(domain.curve.vertices, complex(q[i, 0]))
            res[i] = proj
        out[lo : lo + chunk] = res
    return out


# -- export --------------------------------------------------------------------


def write_curve_csv(curve: BoundaryCurve, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["theta", "re", "im"])
        for t, w in zip(curve.theta, curve.vertices):
            writer.writerow([f"{t:.17g}", f"{w.real:.17g}", f"{w.imag:.17g}"])


def load_curve_csv(path) -> BoundaryCurve:
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    data = np.atleast_2d(data)
    theta = data[:, 0]
    verts = data[:, 1] + 1j * data[:, 2]
    return BoundaryCurve(theta, verts, True, len(theta), None)


def render_svg(curve: BoundaryCurve, simple: bool | None = None) -> str:
    """Fixed 1000x1000 viewbox SVG: boundary polyline, origin marker, dashed cuts."""
    x0, y0, x1, y1 = curve.bounding_box
    x0, y0 = min(x0, -0.05), min(y0, -0.05)
    x1, y1 = max(x1, 0.05), max(y1, 0.05)
    span = max(x1 - x0, y1 - y0)
    scale = 900.0 / span
    ox = 50.0 - x0 * scale + 0.5 * (900.0 - (x1 - x0) * scale)
    oy = 950.0 + y0 * scale - 0.5 * (900.0 - (y1 - y0) * scale)

    def sx(v: float) -> float:
        return ox + v * scale

    def sy(v: float) -> float:
        return oy - v * scale

    pts = " ".join(f"{sx(w.real):.3f},{sy(w.imag):.3f}" for w in curve.vertices)
    title = f"simple={simple} vertices={len(curve)} closed={curve.closed}"
    if curve.truncation is not None:
        title += f" tail_mass={curve.truncation.tail_mass:.6g} radius={curve.truncation.radius:.6g}"
    lines = [
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 1000 1000">',
        f"<title>{title}</title>",
        '<rect width="1000" height="1000" fill="white"/>',
        f'<polygon points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>'
        if curve.closed
        else f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>',
    ]
    if not curve.closed and len(curve) > 1:
        w_last, w_first = curve.vertices[-1], curve.vertices[0]
        lines.append(
            f'<line x1="{sx(w_last.real):.3f}" y1="{sy(w_last.imag):.3f}" '
            f'x2="{sx(w_first.real):.3f}" y2="{sy(w_first.imag):.3f}" '
            'stroke="gray" stroke-width="1" stroke-dasharray="8 6"/>'
        )
    cx, cy = sx(0.0), sy(0.0)
    lines.append(
        f'<path d="M {cx - 10:.3f} {cy:.3f} H {cx + 10:.3f} M {cx:.3f} {cy - 10:.3f} V {cy + 10:.3f}" '
        'stroke="red" stroke-width="2"/>'
    )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_svg(curve: BoundaryCurve, path, simple: bool | None = None) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(render_svg(curve, simple))


def domain_to_json_dict(domain: DomainModel) -> dict:
    data = {
        "vertices": len(domain.curve),
        "closed": domain.curve.closed,
        "origin_inside": domain.origin_inside,
        "simple": domain.simplicity.simple,
        "bounding_box": list(domain.bounding_box),
        "winding_about_origin": winding_number(domain.curve.vertices, 0j),
    }
    if domain.curve.truncation is not None:
        data["truncation"] = domain.curve.truncation.to_json_dict()
    return data


def circle_curve(n: int = 256, radius: float = 1.0) -> BoundaryCurve:
    """Synthetic circle polyline (tests and the disc calibration)."""
    theta = -np.pi + 2.0 * np.pi * np.arange(n) / n
    return BoundaryCurve(theta, radius * np.exp(1j * theta), True, n, None)
