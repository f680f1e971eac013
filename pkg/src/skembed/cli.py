"""Command-line pipeline: check, build, sample, simulate, report, plot.

Every run is driven by a RunConfig that mirrors the flags one to one and
round-trips losslessly through a flat key=value file (flags override the
file).  Reports are JSON with sorted keys; anything time-dependent lives in
a separate "meta" object so payloads are byte-identical across reruns with
the same config and seed.

Exit codes: 0 solvable/ok, 2 NOT_ESTABLISHED, 3 NON_INTEGRABLE, 4 non-simple
curve, 5 step budget exhausted, 6 missing report fragments, 64 bad usage or
unparseable input.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    DomainError,
    MissingArtifactError,
    NonIntegrableError,
    NonSimpleCurveError,
    SkembedError,
    SpecValidationError,
    StepBudgetError,
    TableFormatError,
)
from .geometry import (
    BoundaryCurve,
    DomainModel,
    build_curve,
    domain_to_json_dict,
    is_simple,
    load_curve_csv,
    write_curve_csv,
    write_svg,
)
from .harmonic import TrigSeries, analyze, fejer_smoothed
from .montecarlo import (
    ExitSamples,
    Method,
    RngStream,
    euler_exit_samples,
    exact_exit_samples,
    expected_tau_series,
    raw_boundary_samples,
    run_streams,
    tau_moment,
    wos_position_samples,
    write_samples_binary,
    write_samples_csv,
)
from .quantile import (
    BoundaryFunction,
    QuantileSpec,
    fold_to_boundary,
    heavy_tail_spec,
    koebe_boundary,
    koebe_exit_cdf,
    load_table_csv,
    two_point_spec,
    uniform_spec,
)
from .solvability import Verdict, classify
from .stats import empirical_moment, ks_one_sample, ks_two_sample

EX_OK = 0
EX_NOT_ESTABLISHED = 2
EX_NON_INTEGRABLE = 3
EX_NON_SIMPLE = 4
EX_STEP_BUDGET = 5
EX_MISSING = 6
EX_USAGE = 64

DIST_CHOICES = ("uniform", "two-point", "heavy-tail", "koebe", "table")


@dataclass
class RunConfig:
    dist: str = "uniform"
    a: float = 1.0
    table: str = ""
    n_coeffs: int = 2048
    grid_size: int = 65536
    boundary_resolution: int = 16384
    radius: float = 0.0  # 0 = automatic truncation radius
    step_size: float = 1e-4
    shell_eps: float = 0.0  # 0 = automatic shell
    n_samples: int = 10000
    seed: int = 0
    streams: int = 1
    threads: int = 1
    out_dir: str = "."
    binary: bool = False
    force: bool = False

    def validate(self) -> None:
        positive = ("n_coeffs", "grid_size", "boundary_resolution", "step_size", "n_samples", "streams", "threads")
        for name in positive:
            if getattr(self, name) <= 0:
                raise DomainError(f"config field {name} must be positive")
        if self.radius < 0 or self.shell_eps < 0:
            raise DomainError("radius and shell_eps must be non-negative")
        if self.dist not in DIST_CHOICES:
            raise DomainError(f"unknown distribution {self.dist!r}")
        if self.dist == "table" and not self.table:
            raise DomainError("dist=table requires a table path")

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{f.name}={value}")
        return "\n".join(lines) + "\n"

    def to_file(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @staticmethod
    def from_file(path) -> "RunConfig":
        fields = {f.name: f for f in dataclasses.fields(RunConfig)}
        data = {}
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise TableFormatError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in fields:
                raise TableFormatError(f"{path}:{lineno}: unknown config key {key!r}")
            ftype = fields[key].type
            if ftype in ("bool", bool):
                data[key] = value.strip().lower() in ("1", "true", "yes")
            elif ftype in ("int", int):
                data[key] = int(value.strip())
            elif ftype in ("float", float):
                data[key] = float(value.strip())
            else:
                data[key] = value.strip()
        return RunConfig(**data)


def resolve_target(config: RunConfig) -> QuantileSpec | BoundaryFunction:
    if config.dist == "uniform":
        return uniform_spec(config.a)
    if config.dist == "two-point":
        return two_point_spec(config.a)
    if config.dist == "heavy-tail":
        return heavy_tail_spec()
    if config.dist == "koebe":
        return koebe_boundary()
    return load_table_csv(config.table)


def reference_cdf(config: RunConfig):
    """Closed-form exit CDF of the real part, where one exists."""
    if config.dist == "uniform":
        a = config.a
        return lambda x: np.clip((np.asarray(x) + a) / (2.0 * a), 0.0, 1.0)
    if config.dist == "koebe":
        return koebe_exit_cdf
    return None


# -- artifact helpers -----------------------------------------------------------


def _out_dir(config: RunConfig) -> Path:
    path = Path(config.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _meta() -> dict:
    return {
        "tool": f"skembed {__version__}",
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }


def write_report(path: Path, payload: dict) -> None:
    doc = {"meta": _meta(), "result": payload}
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def read_report(path: Path) -> dict:
    return json.loads(path.read_text(encoding="utf-8"))["result"]


def _config_payload(config: RunConfig) -> dict:
    return dataclasses.asdict(config)


# -- subcommands ------------------------------------------------------------------


def cmd_check(config: RunConfig) -> int:
    target = resolve_target(config)
    if isinstance(target, QuantileSpec):
        target.require_valid()
    report = classify(target, n_coeffs=config.n_coeffs, grid_size=config.grid_size)

    print(f"solvability of {config.dist}:")
    print(f"  {'test':<18}{'value':>16}")
    for p, v in sorted(report.lp_norms.items()):
        shown = v if isinstance(v, str) else f"{v:.6f}"
        print(f"  {'L^' + format(p, 'g') + ' norm':<18}{shown:>16}")
    zy = report.zygmund_value if isinstance(report.zygmund_value, str) else f"{report.zygmund_value:.6f}"
    hi = report.hilbert_l1 if isinstance(report.hilbert_l1, str) else f"{report.hilbert_l1:.6f}"
    print(f"  {'L log L':<18}{zy:>16}")
    print(f"  {'conjugate L1':<18}{hi:>16}")
    print(f"  verdict: {report.verdict.value}")

    payload = {"config": _config_payload(config), "solvability": report.to_json_dict()}
    write_report(_out_dir(config) / "solvability.json", payload)

    if report.verdict == Verdict.NON_INTEGRABLE:
        return EX_NON_INTEGRABLE
    if report.verdict == Verdict.NOT_ESTABLISHED:
        return EX_NOT_ESTABLISHED
    return EX_OK


def _build_artifacts(config: RunConfig) -> tuple[TrigSeries, BoundaryCurve, DomainModel | None, dict]:
    target = resolve_target(config)
    if isinstance(target, QuantileSpec):
        target.require_valid()
        phi = fold_to_boundary(target)
    else:
        phi = target

    series = analyze(phi, n_coeffs=config.n_coeffs, grid_size=config.grid_size)
    radius = config.radius if config.radius > 0 else None
    curve = build_curve(
        series,
        boundary_resolution=config.boundary_resolution,
        phi=phi,
        truncation_radius=radius,
    )
    reference = build_curve(
        fejer_smoothed(series),
        boundary_resolution=config.boundary_resolution,
        phi=phi,
        truncation_radius=radius,
    )
    check = is_simple(reference)
    domain = None
    raw_check = is_simple(curve)
    if raw_check.simple:
        domain = DomainModel.from_curve(curve, require_simple=False)

    geometry = {
        "simple_reference": check.simple,
        "crossing": list(check.crossing) if check.crossing else None,
        "simple_raw": raw_check.simple,
        "truncation": curve.truncation.to_json_dict() if curve.truncation else None,
    }
    if domain is not None:
        geometry.update(domain_to_json_dict(domain))
    return series, curve, domain, {"check": check, "geometry": geometry, "phi": phi}


def cmd_build(config: RunConfig) -> int:
    out = _out_dir(config)
    try:
        series, curve, domain, info = _build_artifacts(config)
    except NonIntegrableError as exc:
        print(f"build refused: {exc}", file=sys.stderr)
        return EX_NON_INTEGRABLE

    (out / "series.json").write_text(
        json.dumps(series.to_json_dict(), sort_keys=True) + "\n", encoding="utf-8"
    )
    write_curve_csv(curve, out / "curve.csv")
    write_svg(curve, out / "domain.svg", simple=info["check"].simple)
    payload = {"config": _config_payload(config), "geometry": info["geometry"]}
    write_report(out / "geometry.json", payload)

    check = info["check"]
    print(f"built {len(curve)}-vertex boundary; simple={check.simple}")
    if not check.simple and not config.force:
        print(f"crossing segments: {check.crossing}", file=sys.stderr)
        return EX_NON_SIMPLE
    return EX_OK


def _sample_paths(config: RunConfig, method: str) -> list[Path]:
    out = _out_dir(config)
    names = [out / f"samples_{method}.csv"]
    if config.binary:
        names.append(out / f"samples_{method}.bin")
    return names


def _write_sample_files(batches, paths: list[Path]) -> list[str]:
    write_samples_csv(batches, paths[0])
    if len(paths) > 1:
        write_samples_binary(batches, paths[1])
    return [p.name for p in paths]


def cmd_sample(config: RunConfig, method: str = "exact") -> int:
    out = _out_dir(config)
    target = resolve_target(config)

    ks_fragments = []
    moments = {}
    bias_notes: list[str] = []

    if config.dist == "koebe":
        # no integrable series exists; sample the raw boundary function
        stream = RngStream(config.seed, 0)
        values = raw_boundary_samples(koebe_boundary(), config.n_samples, stream)
        batch = ExitSamples(Method.EXACT, values.astype(complex), None, stream)
        files = _write_sample_files([batch], _sample_paths(config, "exact"))
        re_samples = values
        bias_notes.append("raw boundary sampling (non-integrable target, no series)")
    else:
        series, curve, domain, info = _build_artifacts(config)
        if method == "exact":
            sampler = lambda n, s: exact_exit_samples(series, n, s)
        elif method == "wos":
            if domain is None:
                return EX_NON_SIMPLE
            shell = config.shell_eps if config.shell_eps > 0 else None
            sampler = lambda n, s: wos_position_samples(domain, n, s, shell_eps=shell)
        else:
            raise DomainError(f"unknown sampling method {method!r}")
        batches = run_streams(sampler, config.n_samples, config.seed, config.streams, config.threads)
        files = _write_sample_files(batches, _sample_paths(config, method))
        re_samples = np.concatenate([b.re for b in batches])
        for b in batches:
            for note in b.bias_notes:
                if note not in bias_notes:
                    bias_notes.append(note)
        trunc = curve.truncation
        if trunc is not None and trunc.tail_mass > 0.0:
            bias_notes.append(
                f"truncated unbounded domain: harmonic-measure tail bound {trunc.tail_mass:.3e} "
                "adds to every statistic"
            )

    cdf = reference_cdf(config)
    if cdf is not None:
        ks = ks_one_sample(np.sort(re_samples), cdf)
        ks_fragments.append(ks.to_json_dict(f"one_sample_re_vs_cdf[{config.dist}]"))
    for k in (1, 2):
        moments[str(k)] = empirical_moment(
            re_samples, k, rng=RngStream(config.seed, 9000 + k), stability_check=len(re_samples) >= 100
        ).to_json_dict()

    payload = {
        "config": _config_payload(config),
        "method": method,
        "n_samples": int(len(re_samples)),
        "sample_files": files,
        "ks": ks_fragments,
        "moments": moments,
        "tau_moments": {},
        "expected_tau_series": None,
        "bias_notes": bias_notes,
    }
    write_report(out / "simulation.json", payload)
    for frag in ks_fragments:
        print(f"KS {frag['test']}: statistic={frag['statistic']:.5f} band={frag['band']:.5f} pass={frag['pass']}")
    print(f"wrote {', '.join(files)}")
    return EX_OK


def cmd_simulate(config: RunConfig) -> int:
    out = _out_dir(config)
    try:
        series, curve, domain, info = _build_artifacts(config)
    except NonIntegrableError as exc:
        print(f"simulate refused: {exc}", file=sys.stderr)
        return EX_NON_INTEGRABLE
    if domain is None:
        print("simulate refused: boundary polyline is not simple", file=sys.stderr)
        return EX_NON_SIMPLE

    exact_batches = run_streams(
        lambda n, s: exact_exit_samples(series, n, s), config.n_samples, config.seed, config.streams, config.threads
    )
    exact_files = _write_sample_files(exact_batches, _sample_paths(config, "exact"))

    partial_exit = EX_OK
    try:
        euler_batches = run_streams(
            lambda n, s: euler_exit_samples(domain, config.step_size, n, s),
            config.n_samples,
            config.seed + 1,
            config.streams,
            config.threads,
        )
    except StepBudgetError as exc:
        print(f"step budget exhausted: {exc}", file=sys.stderr)
        euler_batches = [exc.partial] if exc.partial is not None and len(exc.partial) else []
        partial_exit = EX_STEP_BUDGET
    euler_files = _write_sample_files(euler_batches, _sample_paths(config, "euler")) if euler_batches else []

    exact_re = np.concatenate([b.re for b in exact_batches])
    ks_fragments = []
    cdf = reference_cdf(config)
    if cdf is not None:
        ks = ks_one_sample(np.sort(exact_re), cdf)
        ks_fragments.append(ks.to_json_dict(f"one_sample_re_vs_cdf[{config.dist}]"))

    tau_moments = {}
    ito = None
    bias_notes: list[str] = []
    if euler_batches:
        euler_re = np.concatenate([b.re for b in euler_batches])
        ks2 = ks_two_sample(exact_re, euler_re)
        ks_fragments.append(ks2.to_json_dict("two_sample_re_exact_vs_euler"))
        taus = np.concatenate([b.tau for b in euler_batches])
        for p in (1, 2):
            tau_moments[str(p)] = tau_moment(taus, p, rng=RngStream(config.seed, 9100 + p)).to_json_dict()
        series_tau = expected_tau_series(series)
        if series_tau is not None:
            mean_tau = tau_moments["2"]["value"]
            ito = {
                "euler_mean_tau": float(mean_tau),
                "series_value": float(series_tau),
                "relative_error": float(abs(mean_tau - series_tau) / series_tau),
                "pass": bool(abs(mean_tau - series_tau) <= 0.05 * series_tau),
            }
        for b in euler_batches:
            for note in b.bias_notes:
                if note not in bias_notes:
                    bias_notes.append(note)

    payload = {
        "config": _config_payload(config),
        "method": "euler+exact",
        "n_samples": config.n_samples,
        "sample_files": exact_files + euler_files,
        "ks": ks_fragments,
        "moments": {},
        "tau_moments": tau_moments,
        "expected_tau_series": expected_tau_series(series),
        "ito_consistency": ito,
        "bias_notes": bias_notes,
    }
    write_report(out / "simulation.json", payload)

    for frag in ks_fragments:
        print(f"KS {frag['test']}: statistic={frag['statistic']:.5f} band={frag['band']:.5f} pass={frag['pass']}")
    if ito is not None:
        print(
            f"exit-time cross-check: euler={ito['euler_mean_tau']:.5f} series={ito['series_value']:.5f} "
            f"rel.err={ito['relative_error']:.3%} pass={ito['pass']}"
        )
    return partial_exit


FRAGMENTS = ("solvability.json", "geometry.json", "simulation.json")


def cmd_report(config: RunConfig) -> int:
    out = _out_dir(config)
    merged = {}
    missing = []
    for name in FRAGMENTS:
        path = out / name
        if path.exists():
            merged[name.removesuffix(".json")] = read_report(path)
        else:
            missing.append(name)
    payload = {"fragments": merged, "missing": missing}
    write_report(out / "report.json", payload)

    print(f"report fragments: {len(merged)} present, {len(missing)} missing")
    if "solvability" in merged:
        print(f"  verdict: {merged['solvability']['solvability']['verdict']}")
    if "geometry" in merged:
        geo = merged["geometry"]["geometry"]
        print(f"  boundary simple: {geo.get('simple_reference')}")
        trunc = geo.get("truncation")
        if trunc:
            print(f"  truncated domain, tail mass {trunc['tail_mass']:.3e}")
    if "simulation" in merged:
        sim = merged["simulation"]
        for frag in sim.get("ks", []):
            print(f"  KS {frag['test']}: pass={frag['pass']}")
        for note in sim.get("bias_notes", []):
            print(f"  note: {note}")
    if missing:
        print("missing fragments: " + ", ".join(missing), file=sys.stderr)
        return EX_MISSING
    return EX_OK


def cmd_plot(config: RunConfig) -> int:
    out = _out_dir(config)
    curve_path = out / "curve.csv"
    if not curve_path.exists():
        print(f"missing {curve_path}; run build first", file=sys.stderr)
        return EX_MISSING
    curve = load_curve_csv(curve_path)
    simple = None
    geo_path = out / "geometry.json"
    if geo_path.exists():
        simple = read_report(geo_path)["geometry"].get("simple_reference")
    write_svg(curve, out / "domain.svg", simple=simple)
    print(f"wrote {out / 'domain.svg'}")
    return EX_OK


# -- argument parsing --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skembed",
        description="Planar Skorokhod embedding: solvability checks, domain construction, exit sampling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("check", "classify solvability of the target law"),
        ("build", "construct the series, boundary curve, and SVG"),
        ("sample", "draw exit positions (exact or walk-on-spheres)"),
        ("simulate", "Euler exit paths plus the exact-sampler cross-checks"),
        ("report", "merge prior fragments into one report"),
        ("plot", "re-render the domain SVG from curve.csv"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key=value config file (flags override)")
        p.add_argument("--dist", choices=DIST_CHOICES)
        p.add_argument("--a", type=float, help="family parameter (uniform/two-point half-width)")
        p.add_argument("--table", help="quantile table CSV (u,q header)")
        p.add_argument("--n-coeffs", type=int, dest="n_coeffs")
        p.add_argument("--grid-size", type=int, dest="grid_size")
        p.add_argument("--boundary-resolution", type=int, dest="boundary_resolution")
        p.add_argument("--radius", type=float, help="truncation radius (0 = auto)")
        p.add_argument("--step-size", type=float, dest="step_size")
        p.add_argument("--shell-eps", type=float, dest="shell_eps")
        p.add_argument("--n-samples", type=int, dest="n_samples")
        p.add_argument("--seed", type=int)
        p.add_argument("--streams", type=int)
        p.add_argument("--threads", type=int)
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--binary", action="store_true", default=None)
        p.add_argument("--force", action="store_true", default=None)
        if name == "sample":
            p.add_argument("--method", choices=("exact", "wos"), default="exact")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    if args.config:
        config = RunConfig.from_file(args.config)
    else:
        config = RunConfig()
    if config.out_dir == "." and os.environ.get("SKEMBED_OUT"):
        config = dataclasses.replace(config, out_dir=os.environ["SKEMBED_OUT"])
    overrides = {}
    for f in dataclasses.fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            overrides[f.name] = value
    config = dataclasses.replace(config, **overrides)
    config.validate()
    return config


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
    except (TableFormatError, DomainError, OSError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EX_USAGE

    try:
        if args.command == "check":
            return cmd_check(config)
        if args.command == "build":
            return cmd_build(config)
        if args.command == "sample":
            return cmd_sample(config, method=args.method)
        if args.command == "simulate":
            return cmd_simulate(config)
        if args.command == "report":
            return cmd_report(config)
        if args.command == "plot":
            return cmd_plot(config)
    except (TableFormatError, SpecValidationError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EX_USAGE
    except NonIntegrableError as exc:
        print(f"non-integrable target: {exc}", file=sys.stderr)
        return EX_NON_INTEGRABLE
    except NonSimpleCurveError as exc:
        print(f"non-simple boundary: {exc}", file=sys.stderr)
        return EX_NON_SIMPLE
    except StepBudgetError as exc:
        print(f"step budget exhausted: {exc}", file=sys.stderr)
        return EX_STEP_BUDGET
    except MissingArtifactError as exc:
        print(f"missing artifacts: {exc}", file=sys.stderr)
        return EX_MISSING
    except SkembedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return EX_OK


if __name__ == "__main__":
    sys.exit(main())
