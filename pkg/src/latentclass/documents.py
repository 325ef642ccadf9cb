"""JSON documents and delimited tables for models, sweeps, reports and simulations.

Structured documents keep full float precision; delimited tables print six
decimal places, except posteriors which keep full precision.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .bias import BiasReport
from .model import FitResult, LcaParameters
from .schema import SurveySchema
from .selection import SweepRecord, SweepResult

# Published tables are rounded; their probability vectors may be off by this much.
ROUNDED_TABLE_ATOL = 5e-3


def fmt(x) -> str:
    return f"{float(x):.6f}"


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_text(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _finite_or_none(x: float):
    return float(x) if np.isfinite(x) else None


# -- model documents --------------------------------------------------------


def params_to_dict(params: LcaParameters, names) -> dict:
    return {
        "class_shares": [float(p) for p in params.class_shares],
        "conditionals": [
            {name: params.conditional(r, j).tolist() for j, name in enumerate(names)}
            for r in range(params.n_classes)
        ],
    }


def fit_to_dict(fit: FitResult, schema: SurveySchema | None = None) -> dict:
    schema = schema or fit.schema
    doc = {
        "kind": "lca_model",
        "R": fit.n_classes,
        "n": fit.n,
        "seed": fit.seed,
        "log_likelihood": fit.log_likelihood,
        "n_params": fit.n_params,
        "AIC": fit.aic,
        "BIC": fit.bic,
        "converged": fit.converged,
        "iterations_used": fit.iterations_used,
        "restart_log": [_finite_or_none(x) for x in fit.restart_log],
        "indicators": list(schema.names),
        "n_categories": list(schema.n_categories),
    }
    doc.update(params_to_dict(fit.parameters, schema.names))
    return doc


@dataclass(frozen=True, eq=False)
class ModelDocument:
    """A parsed model document: parameters plus whatever metadata it carried."""

    params: LcaParameters
    indicators: tuple[str, ...]
    meta: dict = field(default_factory=dict)
    class_labels: dict = field(default_factory=dict)
    optimist: int | None = None
    pessimist: int | None = None

    def default_schema(self) -> SurveySchema:
        return SurveySchema.from_categories(self.indicators, self.params.n_categories)


def _normalize(vec, atol, what):
    vec = np.asarray(vec, dtype=float)
    total = vec.sum()
    if abs(total - 1.0) > atol:
        raise ValueError(f"{what} sums to {total}, beyond the {atol} rounding allowance")
    return vec / total


def model_from_dict(doc: dict) -> ModelDocument:
    names = tuple(doc["indicators"])
    shares = doc["class_shares"]
    raw = doc["conditionals"]
    cond = []
    for r, per_class in enumerate(raw):
        if isinstance(per_class, dict):
            missing = [n for n in names if n not in per_class]
            if missing:
                raise ValueError(f"class {r + 1} lacks conditionals for {missing}")
            per_class = [per_class[n] for n in names]
        cond.append([list(v) for v in per_class])
    if len(cond) != len(shares):
        raise ValueError("class_shares and conditionals disagree on the class count")
    if doc.get("normalize"):
        shares = _normalize(shares, ROUNDED_TABLE_ATOL, "class_shares")
        cond = [
            [_normalize(v, ROUNDED_TABLE_ATOL, f"class {r + 1}, indicator {names[j]}")
             for j, v in enumerate(per_class)]
            for r, per_class in enumerate(cond)
        ]
    params = LcaParameters.from_nested(shares, cond)
    if "n_categories" in doc and tuple(doc["n_categories"]) != params.n_categories:
        raise ValueError("n_categories disagrees with the conditional vectors")
    labels = {r: str(lab) for r, lab in enumerate(doc.get("class_labels") or []) if lab}
    des = doc.get("designation") or {}
    to_index = (lambda x: None if x is None else int(x) - 1)
    return ModelDocument(
        params=params,
        indicators=names,
        meta={k: v for k, v in doc.items() if k not in ("class_shares", "conditionals")},
        class_labels=labels,
        optimist=to_index(des.get("optimist_class")),
        pessimist=to_index(des.get("pessimist_class")),
    )


def read_model(path) -> ModelDocument:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def five_class_survey_model() -> ModelDocument:
    """The shipped five-class household-survey solution (rounded published values)."""
    ref = resources.files("latentclass") / "data" / "iesh_five_class_model.json"
    return model_from_dict(json.loads(ref.read_text(encoding="utf-8")))


def truth_r3_model() -> ModelDocument:
    """Shipped well-separated three-class truth (6 indicators, 5 outcomes)."""
    ref = resources.files("latentclass") / "data" / "truth_r3.json"
    return model_from_dict(json.loads(ref.read_text(encoding="utf-8")))


def fit_summary_line(fit: FitResult) -> str:
    """One-line fit summary: R, p, LL, AIC, BIC."""
    return (f"R={fit.n_classes} p={fit.n_params} LL={fit.log_likelihood:.4f} "
            f"AIC={fit.aic:.4f} BIC={fit.bic:.4f}")


# -- sweeps -------------------------------------------------------------------

SWEEP_COLUMNS = ("Number of Classes", "p", "LL", "AIC", "BIC", "converged")


def sweep_to_dict(result: SweepResult, n: int | None = None, seed: int | None = None) -> dict:
    return {
        "kind": "sweep",
        "criterion": result.criterion,
        "selected_R": result.selected,
        "n": n,
        "seed": seed,
        "records": [
            {
                "R": rec.n_classes,
                "n_params": rec.n_params,
                "log_likelihood": rec.log_likelihood,
                "AIC": rec.aic,
                "BIC": rec.bic,
                "converged": rec.converged,
            }
            for rec in result.records
        ],
    }


def sweep_from_dict(doc: dict) -> SweepResult:
    records = tuple(
        SweepRecord(r["R"], r["n_params"], r["log_likelihood"], r["AIC"], r["BIC"],
                    r["converged"])
        for r in doc["records"]
    )
    return SweepResult(records, doc["selected_R"], doc["criterion"])


def sweep_table(result: SweepResult, delimiter: str = ",") -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for rec in result.records:
        writer.writerow([rec.n_classes, rec.n_params, fmt(rec.log_likelihood), fmt(rec.aic),
                         fmt(rec.bic), int(rec.converged)])
    return buf.getvalue()


def records_from_table(text: str, n: float, delimiter: str = ",") -> list[SweepRecord]:
    """Rebuild sweep records from (R, p, LL) columns, recomputing the criteria."""
    reader = csv.DictReader(io.StringIO(text), delimiter=delimiter)
    out = []
    for row in reader:
        converged = row.get("converged", "1") not in ("0", "false", "False")
        out.append(SweepRecord.from_fit(int(row["Number of Classes"]), int(row["p"]),
                                        float(row["LL"]), n, converged))
    return out


# -- classification -----------------------------------------------------------


def classification_table(posterior: np.ndarray, modal_class: np.ndarray,
                         delimiter: str = ",") -> str:
    """Respondent index, posterior per class (full precision), modal class; all 1-based."""
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    n_class = posterior.shape[1]
    writer.writerow(["respondent"] + [f"posterior_{r + 1}" for r in range(n_class)]
                    + ["modal_class"])
    for i, (row, modal) in enumerate(zip(posterior, modal_class), start=1):
        writer.writerow([i] + [repr(float(x)) for x in row] + [int(modal) + 1])
    return buf.getvalue()


# -- bias reports -------------------------------------------------------------


def report_to_dict(report: BiasReport) -> dict:
    return report.to_dict()


def report_from_dict(doc: dict) -> BiasReport:
    return BiasReport.from_dict(doc)


def conditional_table(report: BiasReport, schema: SurveySchema, delimiter: str = ",") -> str:
    """Indicator x outcome rows, one column per class.

    A trailing ``^`` marks probabilities above the profile threshold, ``*``
    the extreme false positive cell and ``**`` the extreme false negative cell.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    header = ["indicator", "outcome", "outcome_label"]
    for r, prof in enumerate(report.profiles):
        header.append(f"class_{r + 1}" + (f" ({prof.label})" if prof.label else ""))
    writer.writerow(header)
    for j, ind in enumerate(schema.indicators):
        for k in range(1, ind.n_categories + 1):
            cells = []
            for r in range(report.n_classes):
                p = report.conditionals[r][j][k - 1]
                mark = "^" if report.profiles[r].dominant_outcomes[j] == k else ""
                cells.append(fmt(p) + mark + report.star(r, j, k))
            writer.writerow([ind.name, k, ind.labels[k - 1]] + cells)
    return buf.getvalue()


def indicator_table(report: BiasReport, schema: SurveySchema, delimiter: str = ",") -> str:
    """Per-indicator bias and consistency columns for external plotting."""
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(["indicator", "description", "extreme_false_negative",
                     "extreme_false_positive", "consistent_classification",
                     "misclassification"])
    blank = [None] * len(report.indicators)
    for j, ind in enumerate(schema.indicators):
        fn = (report.extreme_false_negative or blank)[j]
        fp = (report.extreme_false_positive or blank)[j]
        mis = (report.misclassification or blank)[j]
        writer.writerow([
            ind.name, ind.description,
            "" if fn is None else fmt(fn),
            "" if fp is None else fmt(fp),
            fmt(report.consistent_classification[j]),
            "" if mis is None else fmt(mis),
        ])
    return buf.getvalue()


# -- synthetic truth sidecar --------------------------------------------------


def truth_to_dict(params: LcaParameters, schema: SurveySchema, true_classes, seed: int) -> dict:
    doc = {
        "kind": "synthetic_truth",
        "seed": seed,
        "n": int(len(true_classes)),
        "R": params.n_classes,
        "indicators": list(schema.names),
        "n_categories": list(schema.n_categories),
    }
    doc.update(params_to_dict(params, schema.names))
    doc["true_classes"] = [int(c) + 1 for c in true_classes]
    return doc


__all__ = [
    "ModelDocument", "classification_table", "conditional_table",
    "dumps", "fit_summary_line", "fit_to_dict", "indicator_table",
    "model_from_dict", "read_model", "records_from_table", "report_from_dict",
    "report_to_dict", "sweep_from_dict", "sweep_table", "sweep_to_dict", "five_class_survey_model",
    "truth_r3_model", "truth_to_dict",
]
