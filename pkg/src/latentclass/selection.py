"""Choosing the number of latent classes by information criteria."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

from .criteria import count_parameters, identifiability_check, information_criteria
from .errors import IdentifiabilityError, SelectionError
from .model import EmConfig, FitResult, fit_em
from .responses import ResponseMatrix

log = logging.getLogger(__name__)

CRITERIA = ("AIC", "BIC")


@dataclass(frozen=True)
class SweepRecord:
    n_classes: int
    n_params: int
    log_likelihood: float
    aic: float
    bic: float
    converged: bool = True

    @classmethod
    def from_fit(cls, n_classes: int, n_params: int, log_likelihood: float, n: float,
                 converged: bool = True) -> "SweepRecord":
        aic, bic = information_criteria(log_likelihood, n_params, n)
        return cls(n_classes, n_params, log_likelihood, aic, bic, converged)

    def criterion(self, name: str) -> float:
        return self.aic if name == "AIC" else self.bic


@dataclass(frozen=True, eq=False)
class SweepResult:
    records: tuple[SweepRecord, ...]
    selected: int
    criterion: str
    fits: dict | None = None

    def record(self, n_classes: int) -> SweepRecord:
        for rec in self.records:
            if rec.n_classes == n_classes:
                return rec
        raise KeyError(n_classes)

    def __eq__(self, other):
        if not isinstance(other, SweepResult):
            return NotImplemented
        return (self.records, self.selected, self.criterion) == (
            other.records, other.selected, other.criterion)


def _check_criterion(criterion: str) -> str:
    criterion = criterion.upper()
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}, got {criterion!r}")
    return criterion


def select_model(records, criterion: str = "BIC") -> SweepResult:
    """Pick the converged record with the smallest criterion (smaller R on ties)."""
    criterion = _check_criterion(criterion)
    records = tuple(sorted(records, key=lambda rec: rec.n_classes))
    candidates = [rec for rec in records if rec.converged]
    if not candidates:
        raise SelectionError("no candidate model converged")
    best = min(candidates, key=lambda rec: (rec.criterion(criterion), rec.n_classes))
    return SweepResult(records, best.n_classes, criterion)


def sweep_classes(data: ResponseMatrix, class_range, config: EmConfig | None = None,
                  criterion: str = "BIC") -> SweepResult:
    """Fit every class count in ``class_range`` and select by ``criterion``.

    Every class count is fitted with the same config (hence the same seed).
    Non-converged fits are recorded but never selected.
    """
    config = config or EmConfig()
    criterion = _check_criterion(criterion)
    class_range = sorted(set(int(r) for r in class_range))
    if not class_range:
        raise ValueError("empty class range")
    for r in class_range:
        ident = identifiability_check(r, data.schema, data.n)
        if not ident:
            raise IdentifiabilityError(f"R={r}: {ident.reason}")

    fits: dict[int, FitResult] = {}
    records = []
    for r in class_range:
        fit = fit_em(data, r, config)
        fits[r] = fit
        records.append(SweepRecord.from_fit(r, fit.n_params, fit.log_likelihood, data.n,
                                            fit.converged))
        log.info("R=%d LL=%.4f BIC=%.4f converged=%s", r, fit.log_likelihood,
                 records[-1].bic, fit.converged)
    return replace(select_model(records, criterion), fits=fits)


__all__ = [
    "CRITERIA", "SweepRecord", "SweepResult", "count_parameters", "select_model",
    "sweep_classes",
]
