"""Command-line interface: fit, sweep, classify, report, simulate.

Any long flag may also come from a TOML ``--config`` file (keys use
underscores, e.g. ``max_iter = 2000``); flags given on the command line win.
When no seed is given, ``LATENTCLASS_SEED`` is used, else a fresh seed is
drawn. The seed in effect is always echoed.
"""

from __future__ import annotations

import argparse
import logging
import os
import secrets
import sys
from pathlib import Path

from . import documents as docs
from .bias import DEFAULT_THRESHOLD, build_report
from .errors import LatentClassError
from .model import EmConfig, fit_em, posterior
from .responses import drop_incomplete, load_responses, write_responses
from .schema import SurveySchema, load_schema
from .schema import tomllib
from .selection import sweep_classes
from .synthetic import sample_dataset

log = logging.getLogger("latentclass")

SEED_ENV = "LATENTCLASS_SEED"

DEFAULTS = {
    "restarts": 10,
    "max_iter": 5000,
    "tol": 1e-10,
    "criterion": "BIC",
    "format": "json",
    "threshold": DEFAULT_THRESHOLD,
    "delimiter": ",",
}


class CliError(Exception):
    pass


def _class_range(text: str) -> list[int]:
    text = text.strip()
    for sep in ("..", "-", ":"):
        if sep in text:
            lo, hi = text.split(sep, 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise argparse.ArgumentTypeError(f"empty class range {text!r}")
            return list(range(lo, hi + 1))
    return [int(text)]


def _delimiter(text: str) -> str:
    return {"tab": "\t", "\\t": "\t", "comma": ","}.get(text, text)


def _add_common(p: argparse.ArgumentParser, data=True, em=False, model=False):
    p.add_argument("--config", type=Path, help="TOML file supplying defaults for any flag")
    p.add_argument("--schema", type=Path, help="schema TOML file")
    if data:
        p.add_argument("--data", type=Path, help="delimited response file")
    p.add_argument("--delimiter", type=_delimiter, default=None,
                   help="field delimiter: ',' (default) or 'tab'")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=Path, default=None, help="output file (or directory for report)")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    if em:
        p.add_argument("--restarts", type=int, default=None)
        p.add_argument("--max-iter", dest="max_iter", type=int, default=None)
        p.add_argument("--tol", type=float, default=None)
    if model:
        p.add_argument("--model", type=Path, help="model document (JSON) from fit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latentclass", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit an R-class model by EM")
    _add_common(p, em=True)
    p.add_argument("--classes", type=int, default=None)

    p = sub.add_parser("sweep", help="fit a range of class counts and select by AIC/BIC")
    _add_common(p, em=True)
    p.add_argument("--class-range", dest="class_range", type=_class_range, default=None,
                   help="inclusive range such as 2..6")
    p.add_argument("--classes", type=int, default=None, help="single class count")
    p.add_argument("--criterion", type=str.upper, choices=("AIC", "BIC"), default=None)

    p = sub.add_parser("classify", help="posterior class membership for each respondent")
    _add_common(p, model=True)

    p = sub.add_parser("report", help="class profiles and extreme-response-bias tables")
    _add_common(p, data=False, model=True)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--optimist-class", dest="optimist_class", type=int, default=None)
    p.add_argument("--pessimist-class", dest="pessimist_class", type=int, default=None)
    p.add_argument("--labels", default=None, help="comma-separated class names")

    p = sub.add_parser("simulate", help="draw a dataset from a model document")
    _add_common(p, data=False)
    p.add_argument("--truth", type=Path, help="model document with the true parameters")
    p.add_argument("--n", type=int, default=None, help="number of respondents")
    return parser


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    values = {}
    if args.config is not None:
        with open(args.config, "rb") as fh:
            values = tomllib.load(fh)
        values = {k.replace("-", "_"): v for k, v in values.items()}
        if "class_range" in values and not isinstance(values["class_range"], list):
            values["class_range"] = _class_range(str(values["class_range"]))
        if "delimiter" in values:
            values["delimiter"] = _delimiter(values["delimiter"])
    for key, value in vars(args).items():
        if value is None:
            if key in values:
                value = values[key]
                if key in ("schema", "data", "out", "model", "truth"):
                    value = Path(value)
            elif key in DEFAULTS:
                value = DEFAULTS[key]
            setattr(args, key, value)
    return args


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env)
    return secrets.randbits(32)


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise CliError("missing required option(s): " + ", ".join(
            "--" + n.replace("_", "-") for n in missing))


def _em_config(args, seed: int) -> EmConfig:
    return EmConfig(max_iterations=args.max_iter, tolerance=args.tol,
                    n_restarts=args.restarts, seed=seed)


def _load_data(args, schema: SurveySchema):
    matrix = load_responses(args.data, schema, args.delimiter)
    complete = drop_incomplete(matrix)
    if complete.n < matrix.n:
        print(f"dropped {matrix.n - complete.n} incomplete rows; {complete.n} retained",
              file=sys.stderr)
    return complete


def _status_stream(args):
    """Status lines go to stderr whenever the document itself goes to stdout."""
    return sys.stdout if args.out is not None else sys.stderr


def _emit(args, text: str):
    if args.out is None:
        sys.stdout.write(text)
    else:
        docs.write_text(args.out, text)


def _schema_for_model(args, model: docs.ModelDocument) -> SurveySchema:
    if args.schema is None:
        return model.default_schema()
    schema = load_schema(args.schema)
    if schema.names != model.indicators or tuple(schema.n_categories) != model.params.n_categories:
        raise CliError("schema mismatch: model document and schema disagree on indicators")
    return schema


def cmd_fit(args) -> int:
    _require(args, "data", "schema", "classes")
    seed = _resolve_seed(args)
    status = _status_stream(args)
    print(f"seed = {seed}", file=status)
    schema = load_schema(args.schema)
    data = _load_data(args, schema)
    fit = fit_em(data, args.classes, _em_config(args, seed))
    _emit(args, docs.dumps(docs.fit_to_dict(fit, schema)))
    print(docs.fit_summary_line(fit), file=status)
    print(f"converged = {str(fit.converged).lower()} after {fit.iterations_used} iterations",
          file=status)
    return 0


def cmd_sweep(args) -> int:
    if args.class_range is None and args.classes is not None:
        args.class_range = [args.classes]
    _require(args, "data", "schema", "class_range")
    seed = _resolve_seed(args)
    status = _status_stream(args)
    print(f"seed = {seed}", file=status)
    schema = load_schema(args.schema)
    data = _load_data(args, schema)
    result = sweep_classes(data, args.class_range, _em_config(args, seed), args.criterion)
    table = docs.sweep_table(result, args.delimiter)
    if args.format == "csv":
        _emit(args, table)
    else:
        _emit(args, docs.dumps(docs.sweep_to_dict(result, n=data.n, seed=seed)))
    if args.out is not None or args.format != "csv":
        status.write(table)
    print(f"selected R = {result.selected} by {result.criterion}", file=status)
    return 0


def cmd_classify(args) -> int:
    _require(args, "data", "model")
    model = docs.read_model(args.model)
    schema = _schema_for_model(args, model)
    data = _load_data(args, schema)
    post = posterior(data, model.params)
    _emit(args, docs.classification_table(post, post.argmax(axis=1), args.delimiter))
    return 0


def cmd_report(args) -> int:
    _require(args, "model")
    model = docs.read_model(args.model)
    schema = _schema_for_model(args, model)
    labels = dict(model.class_labels)
    if args.labels:
        labels = {r: name.strip() for r, name in enumerate(args.labels.split(","))}
    optimist = model.optimist if args.optimist_class is None else args.optimist_class - 1
    pessimist = model.pessimist if args.pessimist_class is None else args.pessimist_class - 1
    report = build_report(model.params, schema, labels, args.threshold, optimist, pessimist)
    doc = docs.dumps(docs.report_to_dict(report))
    if args.out is None:
        sys.stdout.write(doc)
        return 0
    args.out.mkdir(parents=True, exist_ok=True)
    docs.write_text(args.out / "report.json", doc)
    docs.write_text(args.out / "class_conditionals.csv",
                    docs.conditional_table(report, schema, args.delimiter))
    docs.write_text(args.out / "indicators.csv",
                    docs.indicator_table(report, schema, args.delimiter))
    if report.designation is None:
        print(f"profile-only report ({report.designation_error})")
    else:
        print(f"optimist class = {report.designation.optimist + 1}, "
              f"pessimist class = {report.designation.pessimist + 1}")
    print(f"wrote report to {args.out}")
    return 0


def cmd_simulate(args) -> int:
    _require(args, "truth", "n", "out")
    if args.n < 1:
        raise CliError("--n must be at least 1")
    seed = _resolve_seed(args)
    print(f"seed = {seed}")
    model = docs.read_model(args.truth)
    schema = _schema_for_model(args, model)
    ds = sample_dataset(model.params, schema, args.n, seed)
    write_responses(ds.responses, args.out, args.delimiter)
    truth_path = args.out.with_name(args.out.stem + ".truth.json")
    docs.write_text(truth_path,
                    docs.dumps(docs.truth_to_dict(model.params, schema, ds.true_classes, seed)))
    print(f"wrote {args.n} rows to {args.out} and truth to {truth_path}")
    return 0


COMMANDS = {
    "fit": cmd_fit,
    "sweep": cmd_sweep,
    "classify": cmd_classify,
    "report": cmd_report,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = _merge_config(parser.parse_args(argv))
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (CliError, LatentClassError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
