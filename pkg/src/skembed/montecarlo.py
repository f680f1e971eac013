"""Exit-position and exit-time sampling for planar Brownian motion.

Three samplers, one exact and two independent of it:

  * exact: the boundary-correspondence sampler.  A uniform angle pushed
    through the boundary series *is* the exit distribution, so the real part
    of each sample carries the target law directly.  No exit time exists for
    this sampler.
  * euler: fixed-step Gaussian increments from the origin until the path
    leaves the domain; the exit time is step-count times step-size and the
    exit position is the chord's first boundary crossing.  Carries the
    documented O(sqrt(h)) first-passage bias.
  * wos (walk on spheres): jumps to uniform points on maximal inscribed
    circles; samples the exit position (harmonic measure) only.

Streams are partitioned by (seed, stream_id); identical pairs reproduce
sample sequences bit for bit, and aggregation across streams is
order-independent.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import DomainError, StepBudgetError
from .geometry import (
    INSIDE,
    DomainModel,
    _nearest_on_polyline,
    batch_distance,
    first_boundary_crossing,
)
from .harmonic import TrigSeries, boundary_value, coefficient_decay_exponent, series_power
from .quantile import BoundaryFunction


class Method(IntEnum):
    EXACT = 0
    EULER = 1
    WOS_HYBRID = 2


@dataclass(frozen=True)
class RngStream:
    """Reproducible stream handle: (seed, stream_id) fixes the sequence."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.default_rng(seq)


def as_stream(rng: "RngStream | int | None") -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    if rng is None:
        return RngStream(0, 0)
    return RngStream(int(rng), 0)


@dataclass(frozen=True)
class ExitSample:
    """One exit observation; tau is present iff the method simulates time."""

    position: complex
    tau: float | None
    method: Method
    bias_notes: tuple[str, ...] = ()


@dataclass(frozen=True, eq=False)
class ExitSamples:
    """A batch of exit observations from one stream."""

    method: Method
    positions: np.ndarray
    tau: np.ndarray | None
    stream: RngStream
    bias_notes: tuple[str, ...] = ()

    def __post_init__(self):
        # only the path discretization simulates time; exact and WoS are
        # position-only samplers
        if (self.tau is not None) != (self.method == Method.EULER):
            raise DomainError("tau must be present exactly when the method simulates time")

    def __len__(self) -> int:
        return len(self.positions)

    def __iter__(self):
        for k in range(len(self)):
            yield ExitSample(
                complex(self.positions[k]),
                None if self.tau is None else float(self.tau[k]),
                self.method,
                self.bias_notes,
            )

    @property
    def re(self) -> np.ndarray:
        return self.positions.real


def _truncation_notes(domain: DomainModel | None) -> tuple[str, ...]:
    if domain is None or domain.curve.truncation is None:
        return ()
    t = domain.curve.truncation
    if t.tail_mass == 0.0:
        return ()
    return (f"truncated domain: harmonic-measure tail bound {t.tail_mass:.3e} adds to every statistic",)


# -- exact sampler ---------------------------------------------------------------


def exact_exit_samples(series: TrigSeries, n: int, rng: RngStream | int | None = None) -> ExitSamples:
    """n boundary samples: theta ~ Uniform(-pi, pi) pushed through the series."""
    stream = as_stream(rng)
    gen = stream.generator()
    theta = gen.uniform(-np.pi, np.pi, size=n)
    return ExitSamples(Method.EXACT, boundary_value(series, theta), None, stream)


def exact_exit_sample(series: TrigSeries, rng: RngStream | int | None = None) -> ExitSample:
    batch = exact_exit_samples(series, 1, rng)
    return next(iter(batch))


def raw_boundary_samples(phi: BoundaryFunction, n: int, rng: RngStream | int | None = None) -> np.ndarray:
    """phi(theta) for uniform theta: the exit law of the true boundary function.

    Used where no integrable series exists (the slit-plane negative test).
    """
    stream = as_stream(rng)
    gen = stream.generator()
    return phi(gen.uniform(-np.pi, np.pi, size=n))


# -- Euler sampler ---------------------------------------------------------------


def euler_exit_samples(
    domain: DomainModel,
    step: float,
    n: int,
    rng: RngStream | int | None = None,
    step_budget: int = 10**8,
) -> ExitSamples:
    """Discretized paths from the origin; tau = step * steps-taken.

    Exit positions are the first boundary crossing of the exiting chord.
    Exhausting ``step_budget`` total steps raises :class:`StepBudgetError`
    carrying whatever paths finished.
    """
    if step <= 0:
        raise DomainError("Euler step size must be positive")
    if not domain.origin_inside:
        raise DomainError("Euler simulation requires the origin inside the domain")
    stream = as_stream(rng)
    gen = stream.generator()
    sigma = math.sqrt(step)

    pos = np.zeros(n, dtype=complex)
    idx = np.arange(n)
    steps = np.zeros(n, dtype=np.int64)
    out_pos = np.empty(n, dtype=complex)
    out_tau = np.empty(n, dtype=float)
    done = np.zeros(n, dtype=bool)
    total = 0

    notes = ("first-passage overshoot: exit times carry O(sqrt(h)) positive bias",)
    notes += _truncation_notes(domain)

    while idx.size:
        total += idx.size
        if total > step_budget:
            partial = ExitSamples(
                Method.EULER, out_pos[done], out_tau[done], stream, notes + ("step budget exhausted",)
            )
            raise StepBudgetError(
                f"step budget {step_budget} exhausted with {idx.size} paths alive", partial=partial
            )
        inc = gen.standard_normal((idx.size, 2))
        new = pos + sigma * (inc[:, 0] + 1j * inc[:, 1])
        steps[idx] += 1
        exited = domain.locate(new) != INSIDE
        if exited.any():
            leave = idx[exited]
            out_pos[leave] = first_boundary_crossing(domain, pos[exited], new[exited])
            out_tau[leave] = steps[leave] * step
            done[leave] = True
        pos = new[~exited]
        idx = idx[~exited]
    return ExitSamples(Method.EULER, out_pos, out_tau, stream, notes)


# -- walk on spheres -------------------------------------------------------------


def wos_position_samples(
    domain: DomainModel,
    n: int,
    rng: RngStream | int | None = None,
    shell_eps: float | None = None,
    max_hops: int = 10**4,
) -> ExitSamples:
    """Exit positions by walk on spheres; no exit time is produced.

    Walkers jump to a uniform point on the largest centered circle inside the
    polygon until within ``shell_eps`` of the boundary (default 1e-6 of the
    bounding-box diagonal), then land on the nearest boundary point.
    """
    if not domain.origin_inside:
        raise DomainError("walk on spheres requires the origin inside the domain")
    stream = as_stream(rng)
    gen = stream.generator()
    if shell_eps is None:
        shell_eps = 1e-6 * domain.curve.bbox_diagonal

    pos = np.zeros(n, dtype=complex)
    idx = np.arange(n)
    out = np.empty(n, dtype=complex)
    hops = 0
    while idx.size:
        hops += 1
        if hops > max_hops:
            raise StepBudgetError(f"walk on spheres exceeded {max_hops} hops with {idx.size} walkers alive")
        radius = batch_distance(domain, pos)
        settled = radius <= shell_eps
        if settled.any():
            for k in np.nonzero(settled)[0]:
                _, proj, _ = _nearest_on_polyline(domain.curve.vertices, complex(pos[k]))
                out[idx[k]] = proj
        keep = ~settled
        pos, idx, radius = pos[keep], idx[keep], radius[keep]
        if idx.size:
            angle = gen.uniform(0.0, 2.0 * np.pi, size=idx.size)
            pos = pos + radius * np.exp(1j * angle)
    notes = ("position-only sampler (harmonic measure); no exit time",) + _truncation_notes(domain)
    return ExitSamples(Method.WOS_HYBRID, out, None, stream, notes)


def euler_exit_sample(
    domain: DomainModel, step: float, rng: RngStream | int | None = None, step_budget: int = 10**8
) -> ExitSample:
    return next(iter(euler_exit_samples(domain, step, 1, rng, step_budget=step_budget)))


def wos_position_sample(
    domain: DomainModel, rng: RngStream | int | None = None, shell_eps: float | None = None
) -> ExitSample:
    return next(iter(wos_position_samples(domain, 1, rng, shell_eps=shell_eps)))


# -- exit-time statistics ---------------------------------------------------------


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    ci_low: float
    ci_high: float
    n: int
    power: float

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "n": self.n,
            "power": self.power,
        }


def bootstrap_means(values: np.ndarray, n_boot: int, gen: np.random.Generator) -> np.ndarray:
    """Means of ``n_boot`` resamples, chunked to bound memory at ~1e7 draws."""
    n = len(values)
    rows = max(1, min(n_boot, 10_000_000 // max(n, 1)))
    means = np.empty(n_boot, dtype=float)
    for lo in range(0, n_boot, rows):
        k = min(rows, n_boot - lo)
        idx = gen.integers(0, n, size=(k, n))
        means[lo : lo + k] = values[idx].mean(axis=1)
    return means


def tau_moment(
    samples: ExitSamples | np.ndarray,
    p: float,
    n_boot: int = 1000,
    rng: RngStream | int | None = None,
) -> MomentEstimate:
    """Sample mean of tau^(p/2) with a bootstrap 95% interval."""
    tau = samples.tau if isinstance(samples, ExitSamples) else np.asarray(samples, dtype=float)
    if tau is None or len(tau) == 0:
        raise DomainError("tau_moment needs samples that carry exit times")
    powered = tau ** (p / 2.0)
    gen = as_stream(rng).generator()
    means = bootstrap_means(powered, n_boot, gen)
    lo, hi = np.quantile(means, [0.025, 0.975])
    return MomentEstimate(float(powered.mean()), float(lo), float(hi), len(powered), p)


def expected_tau_series(series: TrigSeries) -> float | None:
    """Mean exit time from the coefficient energy: E tau = sum(c_n^2 + s_n^2)/2.

    The identity needs a finite second-power boundary norm; when the
    coefficient tail shows no decay (fitted exponent <= 0.55, so the energy
    sum is numerically divergent) the estimate is declared unavailable and
    None is returned.
    """
    alpha = coefficient_decay_exponent(series)
    if alpha is not None and alpha <= 0.55:
        return None
    return 0.5 * (series_power(series) - series.c0**2)


# -- sample files -----------------------------------------------------------------

_MAGIC = b"SKEXITS1"
_RECORD = struct.Struct("<dddI")


def write_samples_csv(batches: list[ExitSamples], path) -> None:
    """CSV rows: method,stream,index,re,im,tau (tau empty for exact/wos)."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("method,stream,index,re,im,tau\n")
        for batch in batches:
            name = batch.method.name
            sid = batch.stream.stream_id
            for k in range(len(batch)):
                tau = "" if batch.tau is None else f"{batch.tau[k]:.17g}"
                handle.write(
                    f"{name},{sid},{k},{batch.positions[k].real:.17g},{batch.positions[k].imag:.17g},{tau}\n"
                )


def write_samples_binary(batches: list[ExitSamples], path) -> None:
    """Fixed-width little-endian records (f64 re, f64 im, f64 tau, u32 method).

    Exact and walk-on-spheres records store NaN in the tau slot.  The header
    is 16 bytes: 8-byte magic, u32 version, u32 record count.
    """
    dtype = np.dtype([("re", "<f8"), ("im", "<f8"), ("tau", "<f8"), ("method", "<u4")])
    total = sum(len(b) for b in batches)
    with open(path, "wb") as handle:
        handle.write(_MAGIC)
        handle.write(struct.pack("<II", 1, total))
        for batch in batches:
            records = np.empty(len(batch), dtype=dtype)
            records["re"] = batch.positions.real
            records["im"] = batch.positions.imag
            records["tau"] = batch.tau if batch.tau is not None else np.nan
            records["method"] = int(batch.method)
            handle.write(records.tobytes())


def read_samples_binary(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read back (re, im, tau) arrays plus method codes folded into a record array."""
    with open(path, "rb") as handle:
        magic = handle.read(8)
        if magic != _MAGIC:
            raise DomainError(f"{path}: not a sample file (bad magic)")
        _, count = struct.unpack("<II", handle.read(8))
        raw = handle.read(_RECORD.size * count)
    dtype = np.dtype([("re", "<f8"), ("im", "<f8"), ("tau", "<f8"), ("method", "<u4")])
    records = np.frombuffer(raw, dtype=dtype, count=count)
    return records["re"].copy(), records["im"].copy(), records["tau"].copy()


def run_streams(sampler, n: int, seed: int, n_streams: int = 1, threads: int = 1) -> list[ExitSamples]:
    """Partition ``n`` samples over ``n_streams`` reproducible streams.

    ``sampler(count, stream)`` must return an :class:`ExitSamples`.  The
    result list is ordered by stream_id regardless of completion order, so
    aggregation is deterministic.
    """
    counts = [n // n_streams + (1 if k < n % n_streams else 0) for k in range(n_streams)]
    jobs = [(RngStream(seed, k), c) for k, c in enumerate(counts) if c > 0]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda job: sampler(job[1], job[0]), jobs))
    else:
        results = [sampler(c, s) for s, c in jobs]
    return sorted(results, key=lambda b: b.stream.stream_id)
