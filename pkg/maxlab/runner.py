import argparse
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from maxlab.config import get_settings, load_settings
from maxlab.counterexamples import (
    build_ball_family,
    build_cube_family,
    certify_prism,
    counterexample_ratio,
    diamond_certificates,
    diamond_weak_functional,
    diamond_witness,
)
from maxlab.errors import CapabilityError, DomainError, InputError
from maxlab.experiments import FAMILIES, SweepSpec, centered_contrast, lp_scan, weak11_scan
from maxlab.geometry import Ball, NormKind
from maxlab.maximal import (
    CandidatePolicy,
    centered_max_op_grid,
    load_grid,
    max_op_grid,
    norms_and_weak,
    save_grid,
    strong_max_upper,
    weak_type_report,
)
from maxlab.measure import asymptotic_prediction, doubling_sweep, envelope_sweep, measure_ball
from maxlab.oracle import (
    cover_sweep,
    cross_section_checks,
    rectangle_sweep,
    root_sweep,
    slicing_fit,
    sophi_sweep,
    summarize,
)
from maxlab.oracle.roots import KIND_DIMS
from maxlab.report import SummaryTemplate, write_artifact
from maxlab.store import ResultStore

logger = logging.getLogger("maxlab")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
EXTENSIONS = {"json": "json", "jsonl": "jsonl", "csv": "csv"}
VERIFY_TARGETS = ("sophi", "fcl-cover", "parallelep-cover", "rectangle-lemma", "roots", "slicing")
SCANS = ("weak11", "lp", "contrast")
DEFAULT_SCAN_FAMILY = {"weak11": "cube", "lp": "bumps", "contrast": "grid-cube"}
WEAK_THRESHOLDS = {
    "cube": "cube_growth",
    "ball": "ball_growth",
    "diamond": "diamond_growth",
    "grid-cube": "noncentered_growth",
    "grid-ball": "noncentered_growth",
}


@dataclass
class Check:
    name: str
    value: Optional[float]
    limit: float
    ok: bool
    binding: bool = True

    def as_line(self) -> tuple:
        name = self.name if self.binding else f"{self.name} (info)"
        return name, self.value, self.limit, self.ok


@dataclass
class CommandResult:
    """Records of one command plus what decides its exit code."""

    label: str
    store_kind: str
    records: List[dict]
    total: int
    passed: int
    checks: List[Check] = field(default_factory=list)

    @property
    def failed(self) -> int:
        return self.total - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0 and all(c.ok for c in self.checks if c.binding)


def _floats(text: str) -> Tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def _norm_kind(text: str) -> NormKind:
    try:
        return NormKind.parse(text)
    except InputError as e:
        raise argparse.ArgumentTypeError(str(e))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="base seed (default: [run] seed)")
    common.add_argument("--out", help="artifact path (default: <command>-<target>.<format>)")
    common.add_argument("--format", choices=tuple(EXTENSIONS), default="json")
    common.add_argument("--threads", type=int, help="worker threads (default: [run] threads)")
    common.add_argument("--config", help="ini file to read instead of config.ini")
    common.add_argument("--verbose", action="store_true", help="log at DEBUG level")

    parser = argparse.ArgumentParser(prog="maxlab", description="Maximal operators for the exponential measure on the positive orthant")
    sub = parser.add_subparsers(dest="command", required=True)

    measure = sub.add_parser("measure", parents=[common], help="measure of one ball, or an envelope/doubling sweep")
    measure.add_argument("--kind", type=_norm_kind, required=True)
    measure.add_argument("--center", type=_floats)
    measure.add_argument("--radius", type=float)
    measure.add_argument("--method", choices=("best", "exact", "quadrature", "montecarlo"), default="best")
    measure.add_argument("--alpha", type=_floats)
    measure.add_argument("--samples", type=int)
    measure.add_argument("--sweep", choices=("envelope", "doubling"))
    measure.add_argument("--dim", type=int, default=2)
    measure.add_argument("--configs", type=int, default=100)
    measure.add_argument("--radius-cap", type=float, default=1.0)

    maxop = sub.add_parser("maxop", parents=[common], help="maximal function of a saved grid")
    maxop.add_argument("--input", required=True, help="grid stem (<stem>.csv and <stem>.json)")
    maxop.add_argument("--kind", type=_norm_kind, default=NormKind.LINF)
    maxop.add_argument("--operator", choices=("noncentered", "centered", "strong-upper"), default="noncentered")
    maxop.add_argument("--p", type=float)
    maxop.add_argument("--stride", type=int)
    maxop.add_argument("--ladder-ratio", type=float)
    maxop.add_argument("--extra-radii", type=_floats, default=())

    counter = sub.add_parser("counterexample", parents=[common], help="weak-type counterexample ratios over a ladder")
    counter.add_argument("family", choices=("cube", "ball", "diamond"))
    counter.add_argument("--dim", type=int, default=2)
    counter.add_argument("--s", type=_floats, required=True, help="ladder of s (N for the diamond)")
    counter.add_argument("--method", choices=("exact", "montecarlo", "quadrature"))
    counter.add_argument("--samples", type=int)
    counter.add_argument("--condensed", action="store_true")
    counter.add_argument("--alpha", type=_floats, help="Laguerre exponents, one per coordinate")
    counter.add_argument("--certify", type=int, default=0, help="prism points or diamond certificates per rung")

    verify = sub.add_parser("verify", parents=[common], help="geometric certificates")
    verify.add_argument("target", choices=VERIFY_TARGETS)
    verify.add_argument("--configs", type=int, help="random configurations (default: [oracle] instances)")
    verify.add_argument("--dim", type=int)
    verify.add_argument("--case", choices=("vertex", "side", "edge"))
    verify.add_argument("--samples", type=int)
    verify.add_argument("--steps", type=int, default=20)
    verify.add_argument("--root-kind", choices=tuple(KIND_DIMS))
    verify.add_argument("--norm", type=_norm_kind)
    verify.add_argument("--p", type=float, default=2.0)
    verify.add_argument("--i0", type=int, default=7)
    verify.add_argument("--max-gap", type=int, default=6)

    scan = sub.add_parser("scan", parents=[common], help="growth of weak-type or L^p functionals over a size ladder")
    scan.add_argument("scan", choices=SCANS)
    scan.add_argument("--family", choices=FAMILIES)
    scan.add_argument("--ladder", type=_floats, required=True)
    scan.add_argument("--dim", type=int, default=2)
    scan.add_argument("--norm", type=_norm_kind, default=NormKind.LINF)
    scan.add_argument("--p", type=float)
    scan.add_argument("--spacing", type=float, default=0.5)
    scan.add_argument("--method", choices=("exact", "montecarlo"), default="exact")
    scan.add_argument("--samples", type=int)
    scan.add_argument("--stride", type=int)
    scan.add_argument("--ladder-ratio", type=float)
    return parser


def _target(args) -> str:
    if args.command == "measure":
        return args.sweep or args.kind.value
    names = {"maxop": "operator", "counterexample": "family", "verify": "target", "scan": "scan"}
    return getattr(args, names[args.command])


def resolved_spec(args, settings) -> dict:
    """Every flag that shapes the result, with defaults filled in."""
    spec = {k: v for k, v in vars(args).items() if k not in ("out", "verbose", "config")}
    spec["seed"] = settings.seed if args.seed is None else args.seed
    spec["threads"] = settings.threads if args.threads is None else args.threads
    return spec


def _policy(args, settings) -> CandidatePolicy:
    overrides = {}
    if getattr(args, "stride", None) is not None:
        overrides["stride"] = args.stride
    if getattr(args, "ladder_ratio", None) is not None:
        overrides["ladder_ratio"] = args.ladder_ratio
    if getattr(args, "extra_radii", None):
        overrides["extra_radii"] = args.extra_radii
    return CandidatePolicy.from_settings(settings, **overrides)


def _growth_factors(logs: Sequence[float]) -> List[Optional[float]]:
    return [math.exp(b - a) if math.isfinite(a) and math.isfinite(b) else None for a, b in zip(logs, logs[1:])]


def _growth_check(name: str, logs: Sequence[float], limit: float, at_least: bool = True, binding: bool = True) -> Optional[Check]:
    if len(logs) < 2:
        return None
    factors = _growth_factors(logs)
    if None in factors:
        return Check(name, None, limit, False, binding)
    if at_least:
        value = min(factors)
        return Check(name, value, limit, value >= limit, binding)
    value = max(factors)
    return Check(name, value, limit, value < limit, binding)


def run_measure(args, spec, settings) -> CommandResult:
    seed, threads = spec["seed"], spec["threads"]
    if args.sweep == "envelope":
        report = envelope_sweep(args.kind, args.dim, configs=args.configs, seed=seed, method=args.method, n=args.samples, threads=threads)
        limit = settings.thresholds.envelope_spread
        check = Check(f"envelope spread {args.kind.value} d={args.dim}", report.spread, limit, report.spread <= limit)
        return CommandResult("measure envelope", "measure", [report.to_dict()], 1, 1, [check])
    if args.sweep == "doubling":
        report = doubling_sweep(args.kind, args.dim, radius_cap=args.radius_cap, method=args.method, n=args.samples, seed=seed, threads=threads)
        return CommandResult("measure doubling", "measure", [report.to_dict()], 1, 1)

    if args.center is None or args.radius is None:
        raise InputError("measure needs --center and --radius unless --sweep is given")
    ball = Ball.of(args.kind, args.center, args.radius)
    estimate = measure_ball(ball, method=args.method, alpha=args.alpha, n=args.samples, seed=seed, threads=threads)
    record = {
        "kind": args.kind.value,
        "center": list(args.center),
        "radius": args.radius,
        "alpha": list(args.alpha) if args.alpha else None,
        **estimate.to_dict(),
    }
    if 1 <= args.radius <= min(args.center):
        record["prediction_log"] = asymptotic_prediction(ball, args.alpha)
    return CommandResult("measure", "measure", [record], 1, 0 if estimate.zero_hits else 1)


def run_maxop(args, spec, settings) -> CommandResult:
    f = load_grid(args.input)
    policy = _policy(args, settings)
    if args.operator == "noncentered":
        Mf = max_op_grid(f, args.kind, policy)
    elif args.operator == "centered":
        Mf = centered_max_op_grid(f, args.kind, policy)
    else:
        Mf = strong_max_upper(f)

    record = {"operator": args.operator, "kind": args.kind.value, "policy": policy.key(), **weak_type_report(f, Mf).to_dict()}
    if args.p is not None:
        if not args.p > 1:
            raise DomainError(f"--p must exceed 1, got {args.p}")
        record["log_lp_ratio"] = norms_and_weak(f, Mf, args.p).log_lp_ratio
    stem = Path(args.out).with_suffix("") if args.out else Path(f"maxop-{args.operator}")
    csv_path, _ = save_grid(Mf, stem.with_name(stem.name + "-grid"))
    record["grid"] = str(csv_path)
    return CommandResult("maxop", "scan", [{"scan": "maxop", **record}], 1, 1)


def run_counterexample(args, spec, settings) -> CommandResult:
    seed, threads = spec["seed"], spec["threads"]
    records, failures = [], 0

    if args.family == "diamond":
        method = args.method or "quadrature"
        for N in args.s:
            w = diamond_witness(N, args.dim)
            estimate = diamond_weak_functional(w, method=method, n=args.samples, seed=seed, threads=threads)
            record = {"scan": "counterexample", "family": "diamond", "d": args.dim, "s_or_N": N, **estimate.to_dict()}
            if args.certify:
                certificates = diamond_certificates(w, samples=args.certify, seed=seed)
                misses = sum(1 for c in certificates if not c.contains_support)
                record["certificate_misses"] = misses
                record["certificate_min_ratio"] = min(c.ratio for c in certificates)
                failures += int(misses > 0)
            failures += int(estimate.zero_hits)
            records.append(record)
    else:
        method = args.method or ("exact" if args.dim == 2 and not args.condensed and not args.alpha else "montecarlo")
        for s in args.s:
            if args.family == "cube":
                family = build_cube_family(s, args.dim, condensed=args.condensed)
            else:
                family = build_ball_family(s, args.dim)
            row = counterexample_ratio(family, method=method, n=args.samples, seed=seed, threads=threads, alpha=args.alpha)
            record = {"scan": "counterexample", **row.to_dict()}
            if args.certify:
                misses = certify_prism(family, n=args.certify, seed=seed)
                record["prism_misses"] = misses
                failures += int(misses > 0)
            failures += int(row.union.zero_hits)
            records.append(record)

    logs = [r.get("log_ratio", r.get("log_value")) for r in records]
    for record, growth in zip(records, [None] + _growth_factors(logs)):
        record["growth"] = growth
    checks = []
    limit = getattr(settings.thresholds, WEAK_THRESHOLDS[args.family])
    check = _growth_check(f"{args.family} growth", logs, limit)
    if check:
        checks.append(check)
    return CommandResult(f"counterexample {args.family}", "scan", records, len(records), len(records) - failures, checks)


def _verify_reports(args, spec, settings):
    seed, threads = spec["seed"], spec["threads"]
    configs = settings.oracle.instances if args.configs is None else args.configs
    if args.target == "sophi":
        dims = [args.dim] if args.dim else [2, 3]
        return [r for d in dims for r in sophi_sweep(d, configs, seed, args.samples, threads)]
    if args.target == "fcl-cover":
        return cover_sweep(3, args.case, configs, seed, args.samples, args.steps, threads)
    if args.target == "parallelep-cover":
        return [cross_section_checks()] + cover_sweep(4, args.case, configs, seed, args.samples, args.steps, threads)
    if args.target == "rectangle-lemma":
        dims = (args.dim,) if args.dim else (2, 3)
        return rectangle_sweep(configs, seed, dims, threads)
    if args.target == "roots":
        kinds = [args.root_kind] if args.root_kind else list(KIND_DIMS)
        return [r for kind in kinds for r in root_sweep(kind, configs, seed, threads)]
    kinds = [args.norm] if args.norm else [NormKind.L1, NormKind.L2]
    samples = 20 if args.samples is None else args.samples
    return [slicing_fit(args.p, kind, args.i0, args.max_gap, samples, seed).to_report() for kind in kinds]


def run_verify(args, spec, settings) -> CommandResult:
    reports = _verify_reports(args, spec, settings)
    for report in reports:
        logger.info("%s %s violations=%d residual=%.3g", "PASS" if report.passed else "FAIL", report.lemma, report.violations, report.residual_max)

    checks = []
    if args.target == "roots":
        for lemma in sorted({r.lemma for r in reports}):
            summary = summarize(lemma, [r for r in reports if r.lemma == lemma])
            spread, limit = summary.envelope_spread, settings.oracle.envelope_spread
            checks.append(Check(f"{lemma} envelope spread", spread, limit, spread is None or spread <= limit))
    passed = sum(1 for r in reports if r.passed)
    return CommandResult(f"verify {args.target}", "oracle", [r.to_dict() for r in reports], len(reports), passed, checks)


def run_scan(args, spec, settings) -> CommandResult:
    family = args.family or DEFAULT_SCAN_FAMILY[args.scan]
    sweep = SweepSpec(
        family,
        args.ladder,
        d=args.dim,
        kind=args.norm,
        p=args.p,
        spacing=args.spacing,
        policy=_policy(args, settings),
        method=args.method,
        samples=args.samples,
        seed=spec["seed"],
    )
    thresholds = settings.thresholds
    checks = []
    if args.scan == "weak11":
        table = weak11_scan(sweep, spec["threads"])
        if family in WEAK_THRESHOLDS:
            checks.append(_growth_check(f"{family} weak-type growth", [r.log_value for r in table.rows], getattr(thresholds, WEAK_THRESHOLDS[family])))
    elif args.scan == "lp":
        table = lp_scan(sweep, spec["threads"])
        checks.append(_growth_check(f"L^{args.p:g} growth", [r.log_value for r in table.rows], thresholds.lp_growth, at_least=False))
    else:
        table = centered_contrast(sweep, spec["threads"])
        checks.append(_growth_check("non-centered growth", [r.log_value for r in table.rows], thresholds.noncentered_growth))
        checks.append(_growth_check("centered growth", [r.extra["centered_log"] for r in table.rows], thresholds.centered_growth, at_least=False))
    rows = table.to_rows()
    passed = sum(1 for r in rows if r.get("dominated", True))
    return CommandResult(f"scan {args.scan}", "scan", rows, len(rows), passed, [c for c in checks if c])


COMMANDS = {
    "measure": run_measure,
    "maxop": run_maxop,
    "counterexample": run_counterexample,
    "verify": run_verify,
    "scan": run_scan,
}


def configure_logging(verbose: bool = False):
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger().setLevel(level)


def _record_store(result: CommandResult, spec: dict, code: int, path: str):
    try:
        logger.info("--- Result Store: Starting ---")
        store = ResultStore(path)
        store.connect()
        store.insert_run(result.label, spec)
        store.insert_rows(result.store_kind, result.records)
        store.finish_run(code)
        store.close()
        logger.info("--- Result Store: Completed ---")
    except Exception as e:
        logger.error("--- Result Store: Failed - %s ---", e)


def _write_summary(result: CommandResult, spec: dict, duration: float, artifact: Path, path: str):
    try:
        logger.info("--- Summary: Starting ---")
        data = {
            "command": result.label,
            "seed": spec["seed"],
            "duration": f"{duration:.2f}s",
            "total": result.total,
            "passed": result.passed,
            "failed": result.failed,
            "thresholds": [c.as_line() for c in result.checks],
            "artifacts": [str(artifact)],
        }
        SummaryTemplate(data).write(path)
        logger.info("--- Summary: Completed ---")
    except Exception as e:
        logger.error("--- Summary: Failed - %s ---", e)


def execute(argv: Sequence[str] = None) -> int:
    """
    Run one command and write its artifact.

    Exit codes: 0 when every check passed, 1 on an oracle violation,
    an acceptance-threshold miss or a failed computation, 2 on a usage
    error. The result store and the text summary run only when enabled
    in the [outputs] section of config.ini.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0

    configure_logging(args.verbose)
    settings = load_settings(args.config) if args.config else get_settings()
    spec = resolved_spec(args, settings)
    stage = f"{args.command} {_target(args)}"
    started = time.perf_counter()

    try:
        logger.info("--- %s: Starting ---", stage)
        result = COMMANDS[args.command](args, spec, settings)
        out = Path(args.out) if args.out else Path(f"{args.command}-{_target(args)}.{EXTENSIONS[args.format]}")
        artifact = write_artifact(result.records, out, args.format, spec)
        logger.info("--- %s: Completed ---", stage)
    except (InputError, DomainError, CapabilityError) as e:
        logger.error("--- %s: Failed - %s ---", stage, e)
        return 2
    except Exception as e:
        logger.exception("--- %s: Failed - %s ---", stage, e)
        return 1

    for check in result.checks:
        level = logging.INFO if check.ok or not check.binding else logging.WARNING
        logger.log(level, "%s: %s against %s [%s]", check.name, check.value, check.limit, "ok" if check.ok else "FAIL")
    code = 0 if result.ok else 1
    logger.info("%s: %d/%d passed, exit %d", stage, result.passed, result.total, code)

    if settings.outputs.database:
        _record_store(result, spec, code, settings.outputs.database_path)
    if settings.outputs.summary:
        _write_summary(result, spec, time.perf_counter() - started, artifact, settings.outputs.summary_path)
    return code


def main():
    raise SystemExit(execute())
