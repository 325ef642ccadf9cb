"""Class profiles and extreme-response-bias summaries of a fitted model.

Class indices are 0-based here and 1-based in serialized reports.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DesignationError
from .model import FitResult, LcaParameters
from .schema import SurveySchema

DEFAULT_THRESHOLD = 0.70

DEFINITIONS = {
    "extreme_false_negative": (
        "probability that the optimist class gives the extreme positive "
        "(price-rise) outcome on the indicator"
    ),
    "extreme_false_positive": (
        "probability that the pessimist class gives the extreme negative "
        "(price-decline) outcome on the indicator"
    ),
    "consistent_classification": (
        "sum over classes of class share times the class's modal outcome probability"
    ),
    "misclassification": (
        "optimist share times its extreme false negative probability plus "
        "pessimist share times its extreme false positive probability"
    ),
    "optimist_class": (
        "class with the largest mean (over indicators) mass on outcomes closer to "
        "the extreme negative outcome than to the extreme positive one"
    ),
    "pessimist_class": (
        "class with the largest mean (over indicators) mass on the extreme positive outcome"
    ),
}


@dataclass(frozen=True)
class ClassProfile:
    class_index: int
    share: float
    dominant_outcomes: tuple[int | None, ...]
    label: str = ""


@dataclass(frozen=True)
class Designation:
    optimist: int
    pessimist: int
    source: str = "automatic"


def characterize_classes(params: LcaParameters, threshold: float = DEFAULT_THRESHOLD,
                         labels=None) -> list[ClassProfile]:
    """One profile per class; an indicator's dominant outcome is the argmax when it exceeds ``threshold``."""
    labels = labels or {}
    profiles = []
    for r in range(params.n_classes):
        dominant = []
        for j in range(params.n_indicators):
            probs = params.conditional(r, j)
            k = int(np.argmax(probs))
            dominant.append(k + 1 if probs[k] > threshold else None)
        profiles.append(ClassProfile(r, float(params.class_shares[r]), tuple(dominant),
                                     str(labels.get(r, ""))))
    return profiles


def _extreme_columns(params: LcaParameters, schema: SurveySchema):
    """Per-class, per-indicator mass on the extreme positive outcome and on the negative side."""
    if tuple(schema.n_categories) != params.n_categories:
        raise ValueError("schema and parameters disagree on the outcome layout")
    pos = np.empty((params.n_classes, params.n_indicators))
    neg_side = np.empty_like(pos)
    neg = np.empty_like(pos)
    for j, ind in enumerate(schema.indicators):
        side = [k - 1 for k in ind.negative_side()]
        pos[:, j] = params.conditionals[:, j, ind.extreme_positive - 1]
        neg[:, j] = params.conditionals[:, j, ind.extreme_negative - 1]
        neg_side[:, j] = params.conditionals[:, j, side].sum(axis=1)
    return pos, neg, neg_side


def designate_bias_classes(params: LcaParameters, schema: SurveySchema,
                           optimist: int | None = None,
                           pessimist: int | None = None) -> Designation:
    """Pick the optimist and pessimist classes; explicit indices override the automatic rule."""
    if params.n_classes < 2:
        raise DesignationError("bias designation needs at least 2 classes")
    for name, idx in (("optimist", optimist), ("pessimist", pessimist)):
        if idx is not None and not 0 <= idx < params.n_classes:
            raise DesignationError(f"{name} class {idx} out of range")
    pos, _, neg_side = _extreme_columns(params, schema)
    source = "automatic"
    if optimist is None:
        optimist = int(np.argmax(neg_side.mean(axis=1)))
    else:
        source = "override"
    if pessimist is None:
        pessimist = int(np.argmax(pos.mean(axis=1)))
    else:
        source = "override"
    if optimist == pessimist:
        raise DesignationError("bias classes not separable")
    return Designation(int(optimist), int(pessimist), source)


def extreme_bias_probabilities(params: LcaParameters, schema: SurveySchema,
                               designation: Designation) -> tuple[np.ndarray, np.ndarray]:
    """(false_negative, false_positive) per indicator."""
    pos, neg, _ = _extreme_columns(params, schema)
    return pos[designation.optimist].copy(), neg[designation.pessimist].copy()


def consistency_probabilities(params: LcaParameters, schema: SurveySchema,
                              designation: Designation | None):
    """(consistent, misclassified) per indicator; misclassified is None without a designation."""
    shares = params.class_shares
    modal = params.conditionals.max(axis=2)
    consistent = np.clip(shares @ modal, 0.0, 1.0)
    if designation is None:
        return consistent, None
    false_neg, false_pos = extreme_bias_probabilities(params, schema, designation)
    misclassified = (shares[designation.optimist] * false_neg
                     + shares[designation.pessimist] * false_pos)
    return consistent, np.clip(misclassified, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class BiasReport:
    indicators: tuple[str, ...]
    class_shares: tuple[float, ...]
    conditionals: list          # class -> indicator -> outcome
    profiles: tuple[ClassProfile, ...]
    threshold: float
    consistent_classification: tuple[float, ...]
    designation: Designation | None = None
    extreme_false_negative: tuple[float, ...] | None = None
    extreme_false_positive: tuple[float, ...] | None = None
    misclassification: tuple[float, ...] | None = None
    designation_error: str = ""
    extreme_positive_outcomes: tuple[int, ...] = ()
    extreme_negative_outcomes: tuple[int, ...] = ()
    definitions: dict = field(default_factory=lambda: dict(DEFINITIONS))

    @property
    def n_classes(self) -> int:
        return len(self.class_shares)

    def star(self, r: int, j: int, k: int) -> str:
        """'**' on extreme false negative cells, '*' on extreme false positive cells (k is 1-based)."""
        if self.designation is None:
            return ""
        if r == self.designation.optimist and k == self.extreme_positive_outcomes[j]:
            return "**"
        if r == self.designation.pessimist and k == self.extreme_negative_outcomes[j]:
            return "*"
        return ""

    def to_dict(self) -> dict:
        doc = {
            "kind": "bias_report",
            "definitions": dict(self.definitions),
            "threshold": self.threshold,
            "indicators": list(self.indicators),
            "extreme_positive_outcomes": list(self.extreme_positive_outcomes),
            "extreme_negative_outcomes": list(self.extreme_negative_outcomes),
            "class_shares": list(self.class_shares),
            "conditionals": self.conditionals,
            "profiles": [
                {
                    "class": p.class_index + 1,
                    "label": p.label,
                    "share": p.share,
                    "dominant_outcomes": list(p.dominant_outcomes),
                }
                for p in self.profiles
            ],
            "designation": None,
            "designation_error": self.designation_error,
            "consistent_classification": list(self.consistent_classification),
            "extreme_false_negative": _opt_list(self.extreme_false_negative),
            "extreme_false_positive": _opt_list(self.extreme_false_positive),
            "misclassification": _opt_list(self.misclassification),
        }
        if self.designation is not None:
            doc["designation"] = {
                "optimist_class": self.designation.optimist + 1,
                "pessimist_class": self.designation.pessimist + 1,
                "source": self.designation.source,
            }
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "BiasReport":
        des = doc.get("designation")
        return cls(
            indicators=tuple(doc["indicators"]),
            class_shares=tuple(doc["class_shares"]),
            conditionals=doc["conditionals"],
            profiles=tuple(
                ClassProfile(p["class"] - 1, p["share"], tuple(p["dominant_outcomes"]),
                             p.get("label", ""))
                for p in doc["profiles"]
            ),
            threshold=doc["threshold"],
            consistent_classification=tuple(doc["consistent_classification"]),
            designation=None if des is None else Designation(
                des["optimist_class"] - 1, des["pessimist_class"] - 1, des.get("source", "")),
            extreme_false_negative=_opt_tuple(doc.get("extreme_false_negative")),
            extreme_false_positive=_opt_tuple(doc.get("extreme_false_positive")),
            misclassification=_opt_tuple(doc.get("misclassification")),
            designation_error=doc.get("designation_error", ""),
            extreme_positive_outcomes=tuple(doc.get("extreme_positive_outcomes", ())),
            extreme_negative_outcomes=tuple(doc.get("extreme_negative_outcomes", ())),
            definitions=dict(doc.get("definitions", DEFINITIONS)),
        )

    def __eq__(self, other):
        if not isinstance(other, BiasReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def _opt_list(x):
    return None if x is None else list(x)


def _opt_tuple(x):
    return None if x is None else tuple(x)


def build_report(fit, schema: SurveySchema, labels=None, threshold: float = DEFAULT_THRESHOLD,
                 optimist: int | None = None, pessimist: int | None = None) -> BiasReport:
    """Assemble profiles, bias designation and per-indicator summaries.

    ``fit`` may be a :class:`FitResult` or bare :class:`LcaParameters`. When
    no designation is possible (one class, or inseparable classes) the report
    carries profiles and consistency only, with the reason in ``designation_error``.
    """
    params = fit.parameters if isinstance(fit, FitResult) else fit
    profiles = characterize_classes(params, threshold, labels)
    try:
        designation = designate_bias_classes(params, schema, optimist, pessimist)
    except DesignationError as exc:
        designation, reason = None, str(exc)
    else:
        reason = ""
    consistent, misclassified = consistency_probabilities(params, schema, designation)
    false_neg = false_pos = None
    if designation is not None:
        false_neg, false_pos = extreme_bias_probabilities(params, schema, designation)
    as_tuple = (lambda a: None if a is None else tuple(float(x) for x in a))
    return BiasReport(
        indicators=schema.names,
        class_shares=tuple(float(p) for p in params.class_shares),
        conditionals=params.nested(),
        profiles=tuple(profiles),
        threshold=float(threshold),
        consistent_classification=as_tuple(consistent),
        designation=designation,
        extreme_false_negative=as_tuple(false_neg),
        extreme_false_positive=as_tuple(false_pos),
        misclassification=as_tuple(misclassified),
        designation_error=reason,
        extreme_positive_outcomes=tuple(ind.extreme_positive for ind in schema.indicators),
        extreme_negative_outcomes=tuple(ind.extreme_negative for ind in schema.indicators),
    )
