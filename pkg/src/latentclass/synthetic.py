"""Simulation from known parameters and recovery measurement."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import LcaParameters
from .responses import ResponseMatrix
from .schema import SurveySchema


@dataclass(frozen=True, eq=False)
class SyntheticDataset:
    responses: ResponseMatrix
    true_classes: np.ndarray
    true_params: LcaParameters
    seed: int

    def __post_init__(self):
        if self.responses.n != len(self.true_classes):
            raise ValueError("true_classes length differs from the number of responses")


def _draw_categorical(rng, probs, size):
    """Inverse-CDF draws of 0-based categories from one probability vector."""
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    return np.searchsorted(cdf, rng.random(size), side="right")


def sample_dataset(params: LcaParameters, schema: SurveySchema, n: int,
                   seed: int) -> SyntheticDataset:
    """Draw a class per respondent, then each indicator independently given the class."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if tuple(schema.n_categories) != params.n_categories:
        raise ValueError("schema and parameters disagree on the outcome layout")
    rng = np.random.default_rng(seed)
    classes = _draw_categorical(rng, params.class_shares, n)
    codes = np.empty((n, params.n_indicators), dtype=np.int64)
    for j in range(params.n_indicators):
        u = rng.random(n)
        for r in range(params.n_classes):
            members = classes == r
            cdf = np.cumsum(params.conditional(r, j))
            cdf[-1] = 1.0
            codes[members, j] = np.searchsorted(cdf, u[members], side="right") + 1
    return SyntheticDataset(ResponseMatrix(codes, schema), classes, params, seed)


def _tv_cost(true_params: LcaParameters, estimated: LcaParameters) -> np.ndarray:
    """cost[a, b]: total variation between true class a and estimated class b, summed over indicators."""
    diff = np.abs(true_params.conditionals[:, None] - estimated.conditionals[None, :])
    return 0.5 * diff.sum(axis=(2, 3))


def align_labels(true_params: LcaParameters, estimated: LcaParameters,
                 exhaustive_limit: int = 8) -> np.ndarray:
    """Permutation ``perm`` with estimated class ``perm[a]`` matched to true class ``a``.

    Exhaustive search minimizes the summed total variation for up to
    ``exhaustive_limit`` classes; larger models are matched greedily.
    """
    if true_params.n_classes != estimated.n_classes:
        raise ValueError(
            f"class count mismatch: {true_params.n_classes} vs {estimated.n_classes}"
        )
    if true_params.n_categories != estimated.n_categories:
        raise ValueError("outcome layouts differ")
    cost = _tv_cost(true_params, estimated)
    n_class = cost.shape[0]
    rows = np.arange(n_class)
    if n_class <= exhaustive_limit:
        best, best_cost = None, np.inf
        for perm in itertools.permutations(range(n_class)):
            c = cost[rows, perm].sum()
            if c < best_cost:
                best, best_cost = perm, c
        return np.asarray(best, dtype=np.int64)
    perm = np.full(n_class, -1, dtype=np.int64)
    work = cost.copy()
    for _ in range(n_class):
        a, b = np.unravel_index(np.argmin(work), work.shape)
        perm[a] = b
        work[a, :] = np.inf
        work[:, b] = np.inf
    return perm


def recovery_error(true_params: LcaParameters, estimated: LcaParameters,
                   permutation) -> tuple[float, float]:
    """(max abs error over conditionals, max abs error over shares) after alignment."""
    aligned = estimated.permuted(permutation)
    cond_err = float(np.abs(aligned.conditionals - true_params.conditionals).max())
    share_err = float(np.abs(aligned.class_shares - true_params.class_shares).max())
    return cond_err, share_err


def well_separated_truth(n_classes: int = 3, n_indicators: int = 6, n_categories: int = 5,
                         modal_probability: float = 0.8, shares=None) -> LcaParameters:
    """A truth where every class puts ``modal_probability`` on a class-specific outcome.

    Class r's modal outcome on indicator j is ``(r * step + j) mod K``, so
    signatures differ on every indicator when R <= K. The rest of the mass is
    spread evenly.
    """
    if n_classes > n_categories:
        raise ValueError("need at least as many categories as classes")
    if shares is None:
        shares = np.linspace(1.5, 1.0, n_classes)
        shares = shares / shares.sum()
    step = max(1, n_categories // n_classes)
    rest = (1.0 - modal_probability) / (n_categories - 1)
    cond = np.full((n_classes, n_indicators, n_categories), rest)
    for r in range(n_classes):
        for j in range(n_indicators):
            cond[r, j, (r * step + j) % n_categories] = modal_probability
    return LcaParameters(np.asarray(shares, dtype=float), cond,
                         (n_categories,) * n_indicators)
