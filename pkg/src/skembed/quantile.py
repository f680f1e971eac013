"""Target distributions as quantile functions and their folded boundary data.

A target law is given by its quantile function q, the left-continuous pseudo
inverse of the CDF: q(u) = inf{x : F(x) >= u}.  Feeding q a Uniform(0,1)
variable reproduces the law, which is the only access the embedding pipeline
needs.  The boundary data for the disc construction is the even fold
phi(theta) = q(|theta|/pi) on (-pi, pi).

Specs are immutable after construction; validation results are cached on
first use, so instances are safe to share across worker threads.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Literal

import numpy as np

from .errors import DomainError, SpecValidationError, TableFormatError

LN10 = math.log(10.0)
_HEAVY_CONST = 5.0 / (LN10 + 1.0) ** 2

#: evaluation guard at exactly-singular endpoints (u = 0 or u = 1)
ENDPOINT_EPS = 1e-12

Interp = Literal["step", "linear"]


@dataclass(frozen=True, eq=False)
class QuantileSpec:
    """A zero-mean target distribution described by its quantile function.

    ``kind`` selects a built-in family ("uniform", "heavy_tail", "table") and
    ``params``/``table_u``/``table_q`` carry the family's data.  ``support``
    uses ``+-math.inf`` for unbounded tails; an infinite endpoint is what
    flags the corresponding fold angle as singular downstream.
    """

    kind: str
    params: tuple[float, ...] = ()
    support: tuple[float, float] = (-math.inf, math.inf)
    mean_declared: float = 0.0
    table_u: tuple[float, ...] | None = None
    table_q: tuple[float, ...] | None = None
    interp: Interp = "step"
    mean_tol: float = 1e-8
    label: str = ""

    def __post_init__(self):
        if self.kind == "table":
            if not self.table_u or not self.table_q:
                raise TableFormatError("table spec needs table_u and table_q")
            if len(self.table_u) != len(self.table_q):
                raise TableFormatError("table_u and table_q lengths differ")

    # -- evaluation ---------------------------------------------------------

    def _raw(self, u: np.ndarray) -> np.ndarray:
        """Evaluate q on u in (0, 1) with no domain checks."""
        if self.kind == "uniform":
            a = self.params[0]
            return a * (2.0 * u - 1.0)
        if self.kind == "heavy_tail":
            v = 1.0 + LN10 - np.log(u)
            return _HEAVY_CONST - 10.0 / (u * v**3)
        if self.kind == "table":
            uu = np.asarray(self.table_u)
            qq = np.asarray(self.table_q)
            if self.interp == "linear":
                return np.interp(u, uu, qq)
            # left-continuous step: q(u) = q_k for u in (u_{k-1}, u_k]
            idx = np.searchsorted(uu, u, side="left")
            return qq[np.minimum(idx, len(qq) - 1)]
        raise DomainError(f"unknown quantile kind {self.kind!r}")

    def quantile(self, u) -> np.ndarray | float:
        """q(u) for u strictly inside (0, 1)."""
        arr = np.asarray(u, dtype=float)
        if np.any(arr <= 0.0) or np.any(arr >= 1.0):
            raise DomainError("quantile argument must lie strictly in (0, 1)")
        out = self._raw(arr)
        return float(out) if np.isscalar(u) else out

    def quantile_guarded(self, u) -> np.ndarray:
        """q(u) with u in [0, 1]; singular endpoints snap to the guard eps.

        Only the exact endpoints are moved (to ENDPOINT_EPS away); every
        interior u, however close to 0 or 1, evaluates exactly.  This keeps
        divergence detection honest while giving grids a finite value at the
        singular points themselves.
        """
        arr = np.array(u, dtype=float, copy=True)
        lo_singular = not math.isfinite(self.support[0])
        hi_singular = not math.isfinite(self.support[1])
        arr[arr <= 0.0] = ENDPOINT_EPS if lo_singular else min(ENDPOINT_EPS, 0.5)
        arr[arr >= 1.0] = 1.0 - ENDPOINT_EPS if hi_singular else 1.0
        if not hi_singular:
            # closed-form kinds extend continuously to u = 1
            return self._raw(np.minimum(arr, 1.0))
        return self._raw(arr)

    def partial_mean(self, a: float, b: float) -> float:
        """Exact integral of q over [a, b] subset of [0, 1].

        Built-in families carry closed-form antiderivatives, so the zero-mean
        check and the singular-tail corrections do not depend on quadrature.
        """
        if not (0.0 <= a <= b <= 1.0):
            raise DomainError("partial_mean limits must satisfy 0 <= a <= b <= 1")
        if self.kind == "uniform":
            aa = self.params[0]
            return aa * ((b * b - b) - (a * a - a))
        if self.kind == "heavy_tail":
            # antiderivative of q: A*u - 5 / (1 + ln 10 - ln u)^2, limit 0 at u=0
            def anti(u: float) -> float:
                if u == 0.0:
                    return 0.0
                return _HEAVY_CONST * u - 5.0 / (1.0 + LN10 - math.log(u)) ** 2

            return anti(b) - anti(a)
        if self.kind == "table":
            uu = np.concatenate(([0.0], np.asarray(self.table_u)))
            qq = np.asarray(self.table_q)
            if self.interp == "linear":
                grid = np.unique(np.concatenate((uu[1:], [a, b])))
                grid = grid[(grid >= a) & (grid <= b)]
                vals = np.interp(grid, np.asarray(self.table_u), qq)
                return float(np.trapz(vals, grid)) if len(grid) > 1 else 0.0
            lo = np.maximum(uu[:-1], a)
            hi = np.minimum(uu[1:], b)
            return float(np.sum(qq * np.maximum(hi - lo, 0.0)))
        raise DomainError(f"unknown quantile kind {self.kind!r}")

    # -- validation ---------------------------------------------------------

    @cached_property
    def validation(self) -> "ValidationResult":
        return validate(self)

    def require_valid(self) -> None:
        if not self.validation.ok:
            raise SpecValidationError(
                f"quantile spec {self.label or self.kind!r} failed validation: "
                + "; ".join(self.validation.failures),
                result=self.validation,
            )


@dataclass(frozen=True)
class ValidationResult:
    """Structured outcome of :func:`validate`; never raises by itself."""

    ok: bool
    mean: float
    mean_tol: float
    monotone_ok: bool
    monotone_violations: tuple[int, ...]
    degenerate: bool
    grid_size: int
    failures: tuple[str, ...]


def validate(spec: QuantileSpec, grid_size: int = 1024, tol: float | None = None) -> ValidationResult:
    """Check the hypotheses on the target law: monotone q, zero mean, non-degenerate.

    Works on a midpoint grid plus the exact partial-mean hook, reports every
    failure it finds, and never aborts.
    """
    if grid_size < 64:
        raise DomainError("validation grid must have at least 64 points")
    tol = spec.mean_tol if tol is None else tol

    u = (np.arange(grid_size) + 0.5) / grid_size
    q = spec._raw(u)

    diffs = np.diff(q)
    bad = np.nonzero(diffs < -1e-12 * max(1.0, float(np.max(np.abs(q)))))[0]
    monotone_ok = bad.size == 0

    mean = spec.partial_mean(0.0, 1.0)
    degenerate = float(np.max(q) - np.min(q)) <= 1e-12

    failures = []
    if not monotone_ok:
        failures.append(f"quantile decreases at {bad.size} grid points (first at u={u[bad[0]]:.6g})")
    if abs(mean - spec.mean_declared) > tol:
        failures.append(f"numerical mean {mean:.3e} differs from declared {spec.mean_declared:g} by more than {tol:g}")
    if degenerate:
        failures.append("quantile is constant on the grid (degenerate law)")

    return ValidationResult(
        ok=not failures,
        mean=mean,
        mean_tol=tol,
        monotone_ok=monotone_ok,
        monotone_violations=tuple(int(i) for i in bad[:16]),
        degenerate=degenerate,
        grid_size=grid_size,
        failures=tuple(failures),
    )


def quantile_eval(spec: QuantileSpec, u):
    """Spec-validated quantile evaluation on (0, 1)."""
    spec.require_valid()
    return spec.quantile(u)


# -- folded boundary function ------------------------------------------------


@dataclass(frozen=True, eq=False)
class BoundaryFunction:
    """Even 2pi-periodic boundary data phi for the disc construction.

    ``singular_endpoints`` lists the fold angles (0 and/or pi) where phi is
    unbounded.  ``jump_thetas`` marks interior discontinuities (atoms of the
    target law); geometry uses them to mask Gibbs neighborhoods.
    """

    func: Callable[[np.ndarray], np.ndarray]
    even_symmetric: bool = True
    singular_endpoints: tuple[float, ...] = ()
    source: QuantileSpec | None = None
    jump_thetas: tuple[float, ...] = ()
    label: str = ""

    def __call__(self, theta):
        arr = np.asarray(theta, dtype=float)
        # wrap only values outside (-pi, pi]: the naive mod would round tiny
        # theta through the ulp of pi and destroy singular-endpoint precision
        outside = (arr > np.pi) | (arr <= -np.pi)
        if np.any(outside):
            arr = arr.copy()
            arr[outside] = np.mod(arr[outside] + np.pi, 2.0 * np.pi) - np.pi
        out = self.func(arr)
        return float(out) if np.isscalar(theta) else out

    @property
    def singular_at_zero(self) -> bool:
        return any(abs(t) < 1e-15 for t in self.singular_endpoints)

    @property
    def singular_at_pi(self) -> bool:
        return any(abs(abs(t) - np.pi) < 1e-12 for t in self.singular_endpoints)

    def endpoint_tail(self, endpoint: float, theta_cut: float) -> float:
        """Integral of phi over the arc within theta_cut of a singular endpoint.

        Exact for quantile-derived functions (one side only; the caller
        doubles for the symmetric pair).  Returns 0.0 when no source spec is
        attached, which is safe for bounded phi and documented as a bias for
        everything else.
        """
        if self.source is None:
            return 0.0
        u_cut = theta_cut / np.pi
        if abs(endpoint) < 1e-15:
            return np.pi * self.source.partial_mean(0.0, u_cut)
        return np.pi * self.source.partial_mean(1.0 - u_cut, 1.0)


def fold_to_boundary(spec: QuantileSpec) -> BoundaryFunction:
    """phi(theta) = q(|theta|/pi), flagged where the support is unbounded."""
    spec.require_valid()

    def func(theta: np.ndarray) -> np.ndarray:
        return spec.quantile_guarded(np.abs(theta) / np.pi)

    singular = []
    if not math.isfinite(spec.support[0]):
        singular.append(0.0)
    if not math.isfinite(spec.support[1]):
        singular.append(math.pi)
    jumps: tuple[float, ...] = ()
    if spec.kind == "table" and spec.interp == "step":
        jumps = tuple(float(np.pi * u) for u in spec.table_u[:-1])
    return BoundaryFunction(
        func=func,
        even_symmetric=True,
        singular_endpoints=tuple(singular),
        source=spec,
        jump_thetas=jumps,
        label=spec.label or spec.kind,
    )


# -- built-in families --------------------------------------------------------


def uniform_spec(a: float = 1.0) -> QuantileSpec:
    """Uniform law on [-a, a]: q(u) = a(2u - 1)."""
    if a <= 0:
        raise DomainError("uniform half-width must be positive")
    return QuantileSpec(
        kind="uniform", params=(float(a),), support=(-a, a), label=f"uniform[-{a:g},{a:g}]"
    )


def table_spec(u, q, interp: Interp = "step", label: str = "table", mean_tol: float = 1e-4) -> QuantileSpec:
    """Tabulated quantile with strictly increasing u in (0, 1], last u = 1.

    Step interpolation keeps atoms atoms (left-continuous, matching the
    infimum definition); ``interp="linear"`` is the explicit smoothing opt-in.
    """
    uu = tuple(float(x) for x in u)
    qq = tuple(float(x) for x in q)
    if len(uu) < 1:
        raise TableFormatError("empty quantile table")
    if any(b <= a for a, b in zip(uu, uu[1:])):
        raise TableFormatError("table u values must be strictly increasing")
    if uu[0] <= 0.0 or uu[-1] > 1.0 + 1e-12:
        raise TableFormatError("table u values must lie in (0, 1]")
    if abs(uu[-1] - 1.0) > 1e-12:
        raise TableFormatError("last table u must equal 1 (total mass)")
    return QuantileSpec(
        kind="table",
        support=(min(qq), max(qq)),
        table_u=uu,
        table_q=qq,
        interp=interp,
        mean_tol=mean_tol,
        label=label,
    )


def two_point_spec(a: float = 1.0) -> QuantileSpec:
    """Centered two-point law: atoms at -a and +a with probability 1/2 each."""
    if a <= 0:
        raise DomainError("two-point half-spacing must be positive")
    return table_spec((0.5, 1.0), (-a, a), label=f"two-point(+-{a:g})")


def atom_spec(values, probs, label: str = "atoms") -> QuantileSpec:
    """Finite-atom law from locations and probabilities (must sum to 1)."""
    v = np.asarray(values, dtype=float)
    p = np.asarray(probs, dtype=float)
    if v.shape != p.shape or v.ndim != 1:
        raise TableFormatError("values and probs must be 1-D and equal length")
    if np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-10:
        raise TableFormatError("probabilities must be positive and sum to 1")
    order = np.argsort(v, kind="stable")
    return table_spec(np.cumsum(p[order]), v[order], label=label)


def heavy_tail_spec() -> QuantileSpec:
    """Built-in law with a first moment only.

    q(u) = 5/(ln 10 + 1)^2 - 10 / (u (1 - ln(u/10))^3): integrable with
    |q| log+ |q| integrable, but q is not in L^p for any p > 1.  The left
    support endpoint is -infinity, so the fold is singular at theta = 0.
    """
    top = _HEAVY_CONST - 10.0 / (1.0 + LN10) ** 3
    return QuantileSpec(kind="heavy_tail", support=(-math.inf, top), label="heavy-tail")


def koebe_boundary() -> BoundaryFunction:
    """Boundary function of the slit plane C minus (-inf, -1/4].

    phi(t) = -1 / (4 sin^2(t/2)) is the real boundary value of z/(1-z)^2.
    It is *not* integrable (phi ~ -1/t^2 at 0), so it participates only in
    negative tests; the matching exit law is :func:`koebe_exit_cdf`.
    """

    def func(theta: np.ndarray) -> np.ndarray:
        # clip keeps sin^2 above the float underflow at theta = 0 exactly
        s = np.sin(np.clip(np.abs(theta), 1e-150, None) / 2.0)
        return -1.0 / (4.0 * s * s)

    return BoundaryFunction(
        func=func,
        even_symmetric=True,
        singular_endpoints=(0.0,),
        source=None,
        label="koebe",
    )


def koebe_exit_cdf(w) -> np.ndarray | float:
    """Exit-position CDF on the Koebe slit: F(w) = 1 - (2/pi) arctan(sqrt(-1-4w))."""
    arr = np.asarray(w, dtype=float)
    inner = np.maximum(-1.0 - 4.0 * arr, 0.0)
    out = 1.0 - (2.0 / np.pi) * np.arctan(np.sqrt(inner))
    return float(out) if np.isscalar(w) else out


BUILTIN_SPECS: dict[str, Callable[..., QuantileSpec]] = {
    "uniform": uniform_spec,
    "two-point": two_point_spec,
    "heavy-tail": heavy_tail_spec,
}


def load_table_csv(path) -> QuantileSpec:
    """Read a `u,q` CSV (header required, '.' decimal point) into a table spec."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise TableFormatError(f"{path}: empty file") from None
        if [h.strip().lower() for h in header] != ["u", "q"]:
            raise TableFormatError(f"{path}: header must be exactly 'u,q'")
        u, q = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise TableFormatError(f"{path}:{lineno}: expected two columns")
            try:
                u.append(float(row[0]))
                q.append(float(row[1]))
            except ValueError as exc:
                raise TableFormatError(f"{path}:{lineno}: {exc}") from None
    return table_spec(u, q, label=str(path))
