"""Parameter counting, identifiability bounds and information criteria."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .schema import SurveySchema


def count_parameters(n_classes: int, schema: SurveySchema) -> int:
    """Free parameters of an R-class model: R * sum_j (K_j - 1) + (R - 1)."""
    if n_classes < 1:
        raise ValueError("n_classes must be >= 1")
    return n_classes * sum(k - 1 for k in schema.n_categories) + (n_classes - 1)


@dataclass(frozen=True)
class Identifiability:
    ok: bool
    n_params: int
    reason: str = ""

    def __bool__(self):
        return self.ok


def identifiability_check(n_classes: int, schema: SurveySchema, n: int) -> Identifiability:
    """The parameter count may exceed neither the sample size nor (cells - 1)."""
    p = count_parameters(n_classes, schema)
    cells = math.prod(schema.n_categories)
    if p > n:
        return Identifiability(False, p, f"sample-size bound violated: {p} parameters > n = {n}")
    if p > cells - 1:
        return Identifiability(
            False, p, f"cell-count bound violated: {p} parameters > {cells} cells - 1"
        )
    return Identifiability(True, p)


def information_criteria(log_likelihood: float, n_params: int, n: float) -> tuple[float, float]:
    """(AIC, BIC) = (-2 LL + 2 p, -2 LL + p ln n)."""
    if n <= 0:
        raise ValueError("n must be positive")
    deviance = -2.0 * log_likelihood
    return deviance + 2.0 * n_params, deviance + n_params * math.log(n)
