"""Goodness-of-fit and moment diagnostics for exit samples.

Kolmogorov-Smirnov tests use the fixed 99% asymptotic bands (1.63/sqrt(n)
one-sample, 1.63*sqrt((na+nb)/(na*nb)) two-sample); every acceptance run has
n >= 1e3 so the asymptotic form is conservative enough to pin in tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .montecarlo import RngStream, as_stream, bootstrap_means

KS_BAND_99 = 1.63


@dataclass(frozen=True, eq=False)
class EcdfView:
    """Sorted sample vector with right-continuous step evaluation."""

    samples: np.ndarray
    n: int

    @staticmethod
    def from_samples(x) -> "EcdfView":
        arr = np.asarray(x, dtype=float).ravel()
        if arr.size == 0:
            raise DomainError("empty sample")
        if np.any(np.isnan(arr)):
            raise DomainError("NaN in sample")
        return EcdfView(np.sort(arr), arr.size)

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if np.any(np.isnan(arr)):
            raise DomainError("NaN in sample")
        if np.any(np.diff(arr) < 0):
            raise DomainError("EcdfView requires sorted samples")
        object.__setattr__(self, "samples", arr)

    def __call__(self, x) -> np.ndarray | float:
        idx = np.searchsorted(self.samples, np.asarray(x, dtype=float), side="right")
        out = idx / self.n
        return float(out) if np.isscalar(x) else out


@dataclass(frozen=True)
class KsResult:
    statistic: float
    band: float
    passed: bool
    n: int

    def to_json_dict(self, test: str) -> dict:
        return {
            "test": test,
            "statistic": self.statistic,
            "band": self.band,
            "pass": self.passed,
            "n": self.n,
        }

    def to_json(self, test: str) -> str:
        return json.dumps(self.to_json_dict(test), sort_keys=True)


def ks_one_sample(samples, cdf, band_const: float = KS_BAND_99) -> KsResult:
    """Sup deviation of the ECDF from ``cdf``, against the 99% asymptotic band."""
    view = samples if isinstance(samples, EcdfView) else EcdfView.from_samples(samples)
    if view.n < 10:
        raise DomainError("one-sample KS needs n >= 10")
    f = np.asarray(cdf(view.samples), dtype=float)
    if np.any(np.isnan(f)):
        raise DomainError("cdf produced NaN on the sample")
    i = np.arange(1, view.n + 1)
    d_plus = np.max(i / view.n - f)
    d_minus = np.max(f - (i - 1) / view.n)
    stat = float(max(d_plus, d_minus))
    band = float(band_const / np.sqrt(view.n))
    return KsResult(stat, band, bool(stat < band), view.n)


def ks_two_sample(a, b, band_const: float = KS_BAND_99) -> KsResult:
    """Two-sample sup ECDF deviation with band 1.63*sqrt((na+nb)/(na*nb))."""
    va = a if isinstance(a, EcdfView) else EcdfView.from_samples(a)
    vb = b if isinstance(b, EcdfView) else EcdfView.from_samples(b)
    if va.n < 10 or vb.n < 10:
        raise DomainError("two-sample KS needs n >= 10 on both sides")
    pooled = np.concatenate((va.samples, vb.samples))
    stat = float(np.max(np.abs(va(pooled) - vb(pooled))))
    band = float(band_const * np.sqrt((va.n + vb.n) / (va.n * vb.n)))
    return KsResult(stat, band, bool(stat < band), va.n + vb.n)


@dataclass(frozen=True)
class MomentResult:
    value: float
    ci_low: float
    ci_high: float
    n: int
    order: float
    signed: bool
    unstable: bool | None = None

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "n": self.n,
            "order": self.order,
            "signed": self.signed,
            "unstable": self.unstable,
        }


def empirical_moment(
    samples,
    k: float,
    n_boot: int = 1000,
    rng: RngStream | int | None = None,
    stability_check: bool = False,
) -> MomentResult:
    """Mean of |x|^k (signed mean for k = 1) with a 95% bootstrap interval.

    With ``stability_check`` the estimate on the first tenth of the sample is
    compared against the full estimate; a doubling flags the moment as
    unstable, the numerical footprint of a missing population moment.
    """
    if k <= 0:
        raise DomainError("moment order must be positive")
    arr = np.asarray(samples, dtype=float).ravel()
    if arr.size == 0:
        raise DomainError("empty sample")
    signed = k == 1
    vals = arr if signed else np.abs(arr) ** k

    gen = as_stream(rng).generator()
    means = bootstrap_means(vals, n_boot, gen)
    lo, hi = np.quantile(means, [0.025, 0.975])

    unstable = None
    if stability_check:
        unstable = moment_unstable(arr, k)
    return MomentResult(float(vals.mean()), float(lo), float(hi), arr.size, k, signed, unstable)


def moment_unstable(samples, k: float) -> bool:
    """True when the |x|^k mean doubles from the first tenth to the full sample."""
    arr = np.asarray(samples, dtype=float).ravel()
    if arr.size < 100:
        raise DomainError("stability check needs at least 100 samples")
    vals = np.abs(arr) ** k
    tenth = float(vals[: arr.size // 10].mean())
    full = float(vals.mean())
    return full >= 2.0 * tenth or tenth >= 2.0 * full
