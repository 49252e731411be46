"""Command-line front end.

Subcommands
-----------
reproduce   compare computed quantities with the reported values
sweep       per-spin gain of methods A and B over a range of j
compute     one scenario, one estimator, full report
verify      projector algebra, Clebsch-Gordan, rotation invariance, oracles

Exit codes: 0 success / all checks pass, 1 a check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .inference import (
    Estimator,
    EstimatorConfig,
    EstimatorError,
    InfoGainReport,
    info_gain,
    pair_info_gain,
    single_cosine_gain,
    sweep_j,
)
from .protocols import Method, Scenario
from .spin_algebra import HalfInteger

CSV_COLUMNS = (
    "scenario", "j", "label", "P_lambda", "I_lambda", "I_avg", "i",
    "stderr", "estimator", "samples_or_nodes", "seed",
)
REPRODUCE_COLUMNS = (
    "quantity", "scenario", "j", "published", "computed", "stderr",
    "reference", "tolerance", "pass", "published_within_0.015",
)

SINGLET_GAIN = 1 - 1 / (2 * math.log(2))
QUBIT_PAIR_GAIN = 2 - 0.75 * math.log2(3) - 1 / (2 * math.log(2))


def fmt(value) -> str:
    """12 significant digits; empty for None."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def _round_json(obj):
    if isinstance(obj, dict):
        return {k: _round_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_json(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(f"{float(obj):.12g}")
        return 0.0 if v == 0 else v
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_round_json(obj), indent=2, sort_keys=False) + "\n"


# ----------------------------------------------------------------------------
# argument parsing


def half_integer(text: str) -> HalfInteger:
    try:
        return HalfInteger.of(text)
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"{text!r} is not a non-negative half-integer") from exc


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from exc
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text!r} must be positive")
    return value


def seed_type(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from exc
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _add_common(p: argparse.ArgumentParser, estimator_default: str | None) -> None:
    p.add_argument("--scenario", choices=[m.value for m in Method])
    p.add_argument("--j", type=half_integer, help="spin as n/2 or a decimal in steps of .5")
    p.add_argument("--estimator", choices=[e.value for e in Estimator], default=estimator_default)
    p.add_argument("--samples", type=positive_int, default=2_000_000)
    p.add_argument("--nodes", type=positive_int, help="quadrature nodes (per axis for quad3d)")
    p.add_argument("--seed", type=seed_type, default=0)
    p.add_argument("--workers", type=positive_int, default=1)
    p.add_argument("--unordered-reduction", action="store_true",
                   help="reduce Monte Carlo chunks as they finish instead of in chunk order")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", type=Path, help="output file (default: standard output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relparam", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    rep = sub.add_parser("reproduce", help="compare with the reported values")
    _add_common(rep, "mc")

    sw = sub.add_parser("sweep", help="per-spin gain of methods A and B across j")
    _add_common(sw, "mc")
    sw.add_argument("--j-min", type=half_integer, default=HalfInteger(1))
    sw.add_argument("--j-max", type=half_integer, default=HalfInteger(50))
    sw.add_argument("--j-points", type=positive_int, default=12)
    sw.add_argument("--spacing", choices=["linear", "geometric"], default="geometric")
    sw.add_argument("--figure", type=Path, help="also render the curves to this image file")
    sw.add_argument("--gnuplot", type=Path, help="also write a gnuplot script for the CSV output")

    comp = sub.add_parser("compute", help="full report for one scenario")
    _add_common(comp, None)
    comp.set_defaults(format="json")

    ver = sub.add_parser("verify", help="run the invariant suites")
    ver.add_argument("--format", choices=["text", "json"], default="text")
    ver.add_argument("--out", type=Path)
    return parser


def scenario_from_args(args, parser) -> Scenario:
    if args.scenario is None:
        parser.error("--scenario is required")
    method = Method(args.scenario)
    if method in (Method.A_QUBITS, Method.B_QUBITS):
        if args.j is not None and args.j != HalfInteger(1):
            parser.error(f"{method.value} has j = 1/2 only")
        return Scenario(method)
    if args.j is None:
        parser.error(f"--j is required for {method.value}")
    if args.j.twice_j < 1:
        parser.error("--j must be at least 1/2")
    return Scenario(method, args.j)


def estimator_from_args(args, method: str | None = None) -> EstimatorConfig:
    return EstimatorConfig(
        method=Estimator(method or args.estimator),
        samples=args.samples,
        nodes=args.nodes,
        seed=args.seed,
        workers=args.workers,
        fixed_order=not args.unordered_reduction,
    )


def j_grid(j_min: HalfInteger, j_max: HalfInteger, points: int, spacing: str) -> list[HalfInteger]:
    """Distinct half-integers from j_min to j_max, both ends included.

    Points are placed on 2j with the requested spacing, rounded, and pushed up
    where rounding collides.
    """
    lo, hi = j_min.twice_j, j_max.twice_j
    if lo < 1 or hi < lo:
        raise ValueError("need 1/2 <= j-min <= j-max")
    if points > hi - lo + 1:
        raise ValueError(f"only {hi - lo + 1} half-integers lie in [{j_min}, {j_max}]")
    if points == 1:
        return [j_min]
    raw = np.geomspace(lo, hi, points) if spacing == "geometric" else np.linspace(lo, hi, points)
    out: list[int] = []
    for k, v in enumerate(raw):
        # leave room for the remaining points below hi
        ceiling = hi - (points - 1 - k)
        t = min(max(int(round(v)), out[-1] + 1 if out else lo), ceiling)
        out.append(t)
    return [HalfInteger(t) for t in out]


@contextmanager
def _output(path: Path | None):
    if path is None:
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", newline="") as fh:
            yield fh


# ----------------------------------------------------------------------------
# report rows


def report_rows(report: InfoGainReport) -> list[list[str]]:
    """One CSV row per outcome plus a ``*`` summary row."""
    sc = report.scenario
    est = report.estimator
    common_tail = [est.method.value, fmt(est.budget), fmt(est.seed)]
    rows = []
    for k, label in enumerate(report.labels):
        rows.append([
            sc.name, fmt(float(sc.j)), label, fmt(report.P[k]), fmt(report.I_lambda[k]),
            fmt(report.I_avg), fmt(report.i), fmt(report.I_lambda_stderr[k]), *common_tail,
        ])
    rows.append(summary_row(report))
    return rows


def summary_row(report: InfoGainReport) -> list[str]:
    sc = report.scenario
    est = report.estimator
    return [
        sc.name, fmt(float(sc.j)), "*", "", "", fmt(report.I_avg), fmt(report.i),
        fmt(report.I_avg_stderr), est.method.value, fmt(est.budget), fmt(est.seed),
    ]


# ----------------------------------------------------------------------------
# reproduce


@dataclass
class ComparisonRow:
    quantity: str
    scenario: str
    j: str
    published: float | None
    computed: float | None
    stderr: float | None
    reference: float
    tolerance: float
    error: str = ""

    @property
    def passed(self) -> bool:
        if self.computed is None or self.error:
            return False
        return abs(self.computed - self.reference) <= self.tolerance

    @property
    def published_agrees(self) -> bool | None:
        if self.published is None:
            return None
        return abs(self.published - self.reference) <= 0.015

    def cells(self) -> list[str]:
        return [
            self.quantity, self.scenario, self.j, fmt(self.published), fmt(self.computed),
            fmt(self.stderr), fmt(self.reference), fmt(self.tolerance),
            "error: " + self.error if self.error else fmt(self.passed), fmt(self.published_agrees),
        ]

    def to_dict(self) -> dict:
        return dict(zip(REPRODUCE_COLUMNS, [
            self.quantity, self.scenario, self.j, self.published, self.computed, self.stderr,
            self.reference, self.tolerance, self.passed, self.published_agrees,
        ])) | ({"error": self.error} if self.error else {})


def _tol(report: InfoGainReport, stderr: float) -> float:
    # exact closed forms and quadrature: 1e-6; Monte Carlo: 3 standard errors
    if report.estimator.method is Estimator.MONTE_CARLO:
        return 3 * stderr
    return 1e-6


def reproduce(cfg_a: EstimatorConfig) -> list[ComparisonRow]:
    rows: list[ComparisonRow] = []
    ref_cfg = EstimatorConfig(method=Estimator.QUADRATURE_3D, nodes=128)

    def guarded(name, scen, j, fn):
        try:
            fn()
        except (EstimatorError, ValueError, FloatingPointError) as exc:
            rows.append(ComparisonRow(name, scen, j, None, None, None, math.nan, 0.0, str(exc)))

    def qubits_a():
        sc = Scenario.a_qubits()
        rep = info_gain(sc, cfg_a)
        ref = info_gain(sc, ref_cfg)
        for label, published, exact in (("1/2'", 0.25, 0.25), ("3/2", 0.5, 0.5), ("1/2", 0.25, 0.25)):
            k = rep.labels.index(label)
            rows.append(ComparisonRow(f"P({label})", sc.name, "1/2", published, rep.P[k], rep.P_stderr[k],
                                      exact, _tol(rep, rep.P_stderr[k])))
        for label, published, reference in (
            ("1/2'", 0.27, SINGLET_GAIN),
            ("3/2", 0.07, ref.I_of("3/2")),
            ("1/2", 0.24, ref.I_of("1/2")),
        ):
            k = rep.labels.index(label)
            rows.append(ComparisonRow(f"I({label})", sc.name, "1/2", published, rep.I_lambda[k],
                                      rep.I_lambda_stderr[k], reference, _tol(rep, rep.I_lambda_stderr[k])))
        # the singlet outcome depends on cos(alpha) alone
        _, single = single_cosine_gain(lambda c: np.array([(1 - c) / 4, (3 + c) / 4]), 256)
        rows.append(ComparisonRow("I(1/2') 1-D quadrature", sc.name, "1/2", 0.27, single[0], None, SINGLET_GAIN, 1e-8))
        rows.append(ComparisonRow("I_avg", sc.name, "1/2", 0.17, rep.I_avg, rep.I_avg_stderr, ref.I_avg,
                                  _tol(rep, rep.I_avg_stderr)))
        rows.append(ComparisonRow("i", sc.name, "1/2", 0.056, rep.i, rep.i_stderr, ref.i, _tol(rep, rep.i_stderr)))

    def qubits_b():
        sc = Scenario.b_qubits()
        pair = pair_info_gain("1/2")
        rows.append(ComparisonRow("I_pair", sc.name, "1/2", 0.08, pair.I, pair.error, QUBIT_PAIR_GAIN, 1e-6))
        rep = info_gain(sc, EstimatorConfig(method=Estimator.QUADRATURE_1D))
        rows.append(ComparisonRow("I_avg", sc.name, "1/2", 0.24, rep.I_avg, rep.I_avg_stderr, 3 * QUBIT_PAIR_GAIN, 1e-6))
        rows.append(ComparisonRow("i", sc.name, "1/2", 0.04, rep.i, rep.i_stderr, QUBIT_PAIR_GAIN / 2, 1e-6))

    def spinj_marginals():
        for j in (HalfInteger(2), HalfInteger(5), HalfInteger(20)):
            sc = Scenario.a_spinj(j)
            rep = info_gain(sc, cfg_a)
            jv = j.value
            exact = {"j'": 0.25, "j-1": (2 * jv - 1) / (8 * jv + 4), "j": 0.25, "j+1": (2 * jv + 3) / (8 * jv + 4)}
            for label, value in exact.items():
                k = rep.labels.index(label)
                rows.append(ComparisonRow(f"P({label})", sc.name, str(j), value, rep.P[k], rep.P_stderr[k],
                                          value, _tol(rep, rep.P_stderr[k])))
            if j == HalfInteger(20):
                k = rep.labels.index("j-1")
                rows.append(ComparisonRow("I(j-1)", sc.name, str(j), 0.55, rep.I_lambda[k], rep.I_lambda_stderr[k],
                                          2 * SINGLET_GAIN, _tol(rep, rep.I_lambda_stderr[k])))

    def sweep_endpoints():
        est_b = EstimatorConfig(method=Estimator.QUADRATURE_1D)
        for j, published_a, published_b, ref_a, tol_a, ref_b, tol_b in (
            (HalfInteger(1), 0.056, 0.04, 0.055, 0.005, 0.045, 0.005),
            (HalfInteger(100), 0.18, 0.10, 0.186, 0.01, 0.108, 0.005),
        ):
            row = sweep_j([j], cfg_a, est_b)[0]
            rows.append(ComparisonRow("i_A (sweep curve a)", "a-spinj", str(j), published_a, row.a.i, row.a.i_stderr, ref_a, tol_a))
            rows.append(ComparisonRow("i_B (sweep curve b)", "b-spinj", str(j), published_b, row.b.i, row.b.i_stderr, ref_b, tol_b))

    guarded("three-qubit method A", "a-qubits", "1/2", qubits_a)
    guarded("three-qubit method B", "b-qubits", "1/2", qubits_b)
    guarded("spin-j marginals", "a-spinj", "", spinj_marginals)
    guarded("sweep endpoints", "", "", sweep_endpoints)
    return rows


# ----------------------------------------------------------------------------
# commands


def cmd_reproduce(args, parser) -> int:
    if args.estimator == Estimator.QUADRATURE_1D.value:
        parser.error("method-A quantities need --estimator mc or quad3d")
    rows = reproduce(estimator_from_args(args))
    with _output(args.out) as fh:
        if args.format == "json":
            fh.write(dumps([r.to_dict() for r in rows]))
        else:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(REPRODUCE_COLUMNS)
            writer.writerows(r.cells() for r in rows)
    return 0 if all(r.passed for r in rows) else 1


def cmd_sweep(args, parser) -> int:
    if args.estimator == Estimator.QUADRATURE_1D.value:
        parser.error("method A needs --estimator mc or quad3d")
    try:
        grid = j_grid(args.j_min, args.j_max, args.j_points, args.spacing)
    except ValueError as exc:
        parser.error(str(exc))
    est_a = estimator_from_args(args)
    est_b = EstimatorConfig(method=Estimator.QUADRATURE_1D)
    collected = []
    with _output(args.out) as fh:
        if args.format == "csv":
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            fh.flush()

            def on_row(row):
                writer.writerow(summary_row(row.a))
                writer.writerow(summary_row(row.b))
                fh.flush()
        else:
            on_row = None
        collected = sweep_j(grid, est_a, est_b, on_row=on_row)
        if args.format == "json":
            fh.write(dumps([{"j": str(r.j), "a": r.a.to_dict(), "b": r.b.to_dict()} for r in collected]))
    if args.figure is not None:
        from .plotting import plot_information_per_spin

        plot_information_per_spin(collected, args.figure)
    if args.gnuplot is not None:
        from .plotting import gnuplot_script

        args.gnuplot.write_text(gnuplot_script(args.out or "sweep.csv"))
    return 0


def cmd_compute(args, parser) -> int:
    scenario = scenario_from_args(args, parser)
    method = args.estimator or EstimatorConfig.default_for(scenario).method.value
    if method == Estimator.QUADRATURE_1D.value and scenario.is_method_a:
        parser.error("quad1d applies to method-B scenarios only")
    try:
        report = info_gain(scenario, estimator_from_args(args, method))
    except EstimatorError as exc:
        print(f"relparam: estimator failure: {exc}", file=sys.stderr)
        return 1
    with _output(args.out) as fh:
        if args.format == "json":
            fh.write(dumps(report.to_dict()))
        else:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            writer.writerows(report_rows(report))
    return 0


def cmd_verify(args, parser) -> int:
    from .verify import run_all

    results = run_all()
    ok = all(c.passed for checks in results.values() for c in checks)
    with _output(args.out) as fh:
        if args.format == "json":
            fh.write(dumps({
                name: [{"check": c.name, "passed": c.passed, "detail": c.detail} for c in checks]
                for name, checks in results.items()
            }))
        else:
            buf = io.StringIO()
            for name, checks in results.items():
                passed = sum(c.passed for c in checks)
                buf.write(f"{name:<24} {passed}/{len(checks)} passed\n")
                for c in checks:
                    if not c.passed:
                        buf.write(f"    FAIL {c.name}: {c.detail}\n")
            buf.write("all suites passed\n" if ok else "verification FAILED\n")
            fh.write(buf.getvalue())
    return 0 if ok else 1


COMMANDS = {
    "reproduce": cmd_reproduce,
    "sweep": cmd_sweep,
    "compute": cmd_compute,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return COMMANDS[args.command](args, parser)


if __name__ == "__main__":
    sys.exit(main())
