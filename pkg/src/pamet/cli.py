"""``pamet`` command line: evaluate prediction files, run degradation sweeps, print worked examples.

Exit codes: 0 ok, 1 usage error, 2 data error, 3 PA <= 0 (no better than the
marginal baseline).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import LossSpec, LOSS_KINDS, MetricError, DEFAULT_EPSILON_CLAMP
from .evaluation import evaluate
from .fixtures import HABERMAN_BMP_RISK, HABERMAN_FIXTURES, exam_results, intern_report
from .io import (
    INPUT_FORMATS,
    DataError,
    ReportDocument,
    read_cost_matrix,
    read_labeled_sample,
    read_lookup_predictions,
    read_marginal,
    read_predictions,
)
from .svg import sweep_panel_svg
from .synthesis import (
    DEFAULT_IMBALANCE_AXIS,
    DEFAULT_NOISE_AXIS,
    LabeledSample,
    LookupPredictor,
    NoisyOraclePredictor,
    run_sweep,
    zero_crossing,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_TRIVIAL = 0, 1, 2, 3
SEED_ENV = "PAMET_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _axis(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _log_base(text: str) -> float:
    if text.lower() == "e":
        return math.e
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid log base {text!r}") from None


def _formats(text: str) -> tuple[str, ...]:
    fmts = tuple(f.strip() for f in text.split(",") if f.strip())
    bad = [f for f in fmts if f not in ("csv", "json", "svg")]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown output format(s): {', '.join(bad)}")
    return fmts


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pamet", description="Prediction advantage: model risk measured against the best marginal-only predictor.")
    parser.add_argument("--version", action="version", version=f"pamet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ev = sub.add_parser("evaluate", help="evaluate a prediction file")
    ev.add_argument("predictions", type=Path)
    ev.add_argument("--loss", choices=LOSS_KINDS, default="zero_one")
    ev.add_argument("--cost-matrix", type=Path, help="JSON rows or headerless CSV; B[i][j] = cost of predicting i for truth j")
    ev.add_argument("--log-base", type=_log_base, default=math.e, help="cross-entropy log base (e or a number)")
    ev.add_argument("--epsilon-clamp", type=float, nargs="?", const=DEFAULT_EPSILON_CLAMP, default=None)
    ev.add_argument("--marginal", choices=("labels", "file"), default="labels")
    ev.add_argument("--marginal-file", type=Path)
    ev.add_argument("--input-format", choices=INPUT_FORMATS)
    ev.add_argument("--num-classes", type=int)
    ev.add_argument("--confidence", type=float, help="add a Hoeffding interval at this confidence")
    ev.add_argument("--loss-range", type=float, help="declared loss range for unbounded losses")
    ev.add_argument("--out", type=Path)
    ev.add_argument("--format", type=_formats, default=("json",))

    sw = sub.add_parser("sweep", help="imbalance x noise degradation sweep")
    sw.add_argument("dataset", type=Path, nargs="?")
    sw.add_argument("--synthetic-balanced", type=int, metavar="N", help="use a balanced N-row sample instead of a dataset")
    sw.add_argument("--label-column", default="label")
    sw.add_argument("--imbalance-axis", type=_axis, default=DEFAULT_IMBALANCE_AXIS)
    sw.add_argument("--noise-axis", type=_axis, default=DEFAULT_NOISE_AXIS)
    sw.add_argument("--epsilon", type=float, default=0.0, help="error rate of the built-in predictor")
    sw.add_argument("--predictions", type=Path, help="CSV with a y_pred column, one row per dataset row")
    sw.add_argument("--n-out", type=int)
    sw.add_argument("--seed", type=int)
    sw.add_argument("--workers", type=int)
    sw.add_argument("--out", type=Path)
    sw.add_argument("--format", type=_formats, default=("csv",))

    sub.add_parser("exam-demo", help="the 3- vs 4-option exam example")
    sub.add_parser("fixtures", help="check embedded PA fixtures")
    return parser


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0


def _require_file(path: Path | None, what: str) -> None:
    if path is not None and not path.is_file():
        raise UsageError(f"{what} not found: {path}")


def _config(args) -> dict:
    out = {}
    for key, value in sorted(vars(args).items()):
        if isinstance(value, Path):
            value = str(value)
        elif isinstance(value, tuple):
            value = list(value)
        out[key] = value
    return out


def cmd_evaluate(args) -> int:
    _require_file(args.predictions, "prediction file")
    _require_file(args.cost_matrix, "cost matrix")
    if args.marginal == "file" and args.marginal_file is None:
        raise UsageError("--marginal file needs --marginal-file")
    _require_file(args.marginal_file, "marginal file")
    if (args.cost_matrix is not None) != (args.loss == "cost_sensitive"):
        raise UsageError("--cost-matrix is required with, and only with, --loss cost_sensitive")
    if "svg" in args.format:
        raise UsageError("evaluate writes json or csv")

    matrix = read_cost_matrix(args.cost_matrix) if args.cost_matrix else None
    loss = LossSpec(args.loss, matrix, args.log_base, args.epsilon_clamp)
    preds = read_predictions(args.predictions, loss, args.input_format, args.num_classes)
    marginal = read_marginal(args.marginal_file, loss) if args.marginal == "file" else None
    report = evaluate(preds, loss, marginal, args.confidence, args.loss_range)
    doc = ReportDocument("evaluation", report, _config(args))

    summary = (
        f"loss={loss.kind} n={report.n} model_risk={report.model_risk:.6g} "
        f"bmp_risk={report.bmp.bmp_risk:.6g} pa={float(report.pa.pa):.6g}"
    )
    if report.metrics is not None:
        summary += f" accuracy={report.metrics.accuracy:.6g}"
    if args.out is None:
        print(doc.to_json())
    else:
        args.out.mkdir(parents=True, exist_ok=True)
        if "json" in args.format:
            (args.out / "report.json").write_text(doc.to_json() + "\n", encoding="utf-8")
        if "csv" in args.format:
            (args.out / "evaluation.csv").write_text(_evaluation_csv(report), encoding="utf-8")
    print(summary, file=sys.stderr)
    if report.trivial_problem:
        print("note: zero-risk baseline (trivial problem)", file=sys.stderr)
    if report.pa.pa <= 0:
        print("PA <= 0: no better than the marginal baseline", file=sys.stderr)
        return EXIT_TRIVIAL
    return EXIT_OK


def _evaluation_csv(report) -> str:
    cols = ["loss", "n", "model_risk", "bmp_risk", "pa", "marginal_source"]
    vals = [report.loss.kind, str(report.n), repr(report.model_risk), repr(report.bmp.bmp_risk),
            repr(float(report.pa.pa)), report.marginal_source]
    if report.metrics is not None:
        for k, v in report.metrics.to_dict().items():
            if k != "pa":
                cols.append(k)
                vals.append("" if v is None else repr(v))
    return ",".join(cols) + "\n" + ",".join(vals) + "\n"


def cmd_sweep(args) -> int:
    if (args.dataset is None) == (args.synthetic_balanced is None):
        raise UsageError("give exactly one of a dataset path or --synthetic-balanced N")
    _require_file(args.dataset, "dataset")
    _require_file(args.predictions, "prediction file")
    if args.out is None and set(args.format) - {"csv"}:
        raise UsageError("json/svg output needs --out")
    if args.dataset is not None:
        sample = read_labeled_sample(args.dataset, args.label_column)
    else:
        n = args.synthetic_balanced
        if n < 2:
            raise UsageError("--synthetic-balanced needs N >= 2")
        sample = LabeledSample(np.arange(n) % 2)
    if args.predictions is not None:
        table = read_lookup_predictions(args.predictions)
        if table.size != sample.n:
            raise DataError(f"{args.predictions}: {table.size} predictions for {sample.n} dataset rows")
        predictor = LookupPredictor(table)
    else:
        predictor = NoisyOraclePredictor(args.epsilon)
    seed = _seed(args)
    grid = run_sweep(
        sample, args.imbalance_axis, args.noise_axis, predictor, seed, args.n_out, args.workers
    )
    csv_text = grid.to_csv()
    if args.out is None:
        sys.stdout.write(csv_text)
    else:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "sweep.csv").write_bytes(csv_text.encode("utf-8"))
        if "json" in args.format:
            doc = ReportDocument("sweep", grid, _config(args) | {"seed": seed})
            (args.out / "sweep.json").write_text(doc.to_json() + "\n", encoding="utf-8")
        if "svg" in args.format:
            for z in grid.noise_axis:
                (args.out / f"sweep_noise_{z:g}.svg").write_text(sweep_panel_svg(grid, z), encoding="utf-8")
    for z, zc in zero_crossing(grid).items():
        where = ", ".join(f"{x:.4g}" for x in zc.crossings) or "none"
        flag = "" if zc.monotone else " (non-monotone)"
        print(f"noise {z:g}: PA crosses zero at imbalance {where}{flag}", file=sys.stderr)
    infeasible = sum(not p.ok for p in grid.points)
    if infeasible:
        print(f"{infeasible} grid point(s) infeasible: noise exceeds minority size", file=sys.stderr)
    return EXIT_OK


def cmd_exam_demo(args=None) -> int:
    bob, alice = exam_results()
    for r in (bob, alice):
        print(
            f"{r.student}: {r.options} options, loss {float(r.loss):.4f}, "
            f"BMP risk {r.bmp_risk} = {float(r.bmp_risk):.4f}, PA {r.pa} = {float(r.pa):.4f}"
        )
    gap = alice.pa - bob.pa
    print(f"Alice - Bob advantage gap: {gap} = {float(gap):.4f}")
    return EXIT_OK


def cmd_fixtures(args=None) -> int:
    failed = []
    for fx in HABERMAN_FIXTURES:
        pa = fx.computed_pa()
        ok = fx.passes()
        expected = "negative" if fx.expected_pa is None else f"{fx.expected_pa:+.4f}"
        print(f"{'PASS' if ok else 'FAIL'} haberman {fx.name}: error {fx.error} -> PA {pa:+.4f} (cited {expected})")
        if not ok:
            failed.append(fx.name)
    intern = intern_report()
    ok = intern.pa.pa == -2.0 and abs(intern.metrics.accuracy - 0.97) < 1e-12
    print(f"{'PASS' if ok else 'FAIL'} intern: PA {intern.pa.pa:+.4f}, accuracy {intern.metrics.accuracy:.4f}")
    if not ok:
        failed.append("intern")
    if failed:
        print(f"fixture mismatch (BMP risk {HABERMAN_BMP_RISK}): {', '.join(failed)}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


COMMANDS = {
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "exam-demo": cmd_exam_demo,
    "fixtures": cmd_fixtures,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # --help / --version exit 0, bad arguments exit EXIT_USAGE
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"pamet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MetricError, OSError) as exc:
        print(f"pamet: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
