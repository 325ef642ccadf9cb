"""Polytomous latent class model: densities, posteriors and EM estimation.

Class indices are 0-based in the Python API; category codes in response rows
are 1-based, as in ``ResponseMatrix``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .criteria import identifiability_check, information_criteria
from .errors import EmptyClassError, IdentifiabilityError, ImpossibleObservationError
from .responses import ResponseMatrix, tabulate
from .schema import SurveySchema

log = logging.getLogger(__name__)

_TINY = np.finfo(float).tiny


@dataclass(frozen=True, eq=False)
class LcaParameters:
    """Class shares p_r and class-conditional outcome probabilities pi_jrk.

    ``conditionals`` has shape (R, J, K_max); entries past K_j are zero padding.
    """

    class_shares: np.ndarray
    conditionals: np.ndarray
    n_categories: tuple[int, ...]
    atol: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        shares = np.array(self.class_shares, dtype=float)
        cond = np.array(self.conditionals, dtype=float)
        n_cat = tuple(int(k) for k in self.n_categories)
        if shares.ndim != 1 or cond.ndim != 3 or cond.shape[0] != shares.size:
            raise ValueError(
                f"shape mismatch: shares {shares.shape}, conditionals {cond.shape}"
            )
        if cond.shape[1] != len(n_cat) or cond.shape[2] < max(n_cat):
            raise ValueError(f"conditionals {cond.shape} do not fit n_categories {n_cat}")
        if (shares < 0).any() or abs(shares.sum() - 1.0) > self.atol:
            raise ValueError(f"class shares must be a probability vector, got {shares}")
        for j, k in enumerate(n_cat):
            block = cond[:, j, :k]
            if (block < 0).any():
                raise ValueError(f"negative conditional probability on indicator {j}")
            err = np.abs(block.sum(axis=1) - 1.0)
            if (err > self.atol).any():
                r = int(err.argmax())
                raise ValueError(
                    f"conditionals for class {r}, indicator {j} sum to {block[r].sum()!r}"
                )
            if cond.shape[2] > k and cond[:, j, k:].any():
                raise ValueError(f"non-zero padding on indicator {j}")
        shares.setflags(write=False)
        cond.setflags(write=False)
        object.__setattr__(self, "class_shares", shares)
        object.__setattr__(self, "conditionals", cond)
        object.__setattr__(self, "n_categories", n_cat)

    @property
    def n_classes(self) -> int:
        return self.class_shares.size

    @property
    def n_indicators(self) -> int:
        return len(self.n_categories)

    def conditional(self, r: int, j: int) -> np.ndarray:
        return self.conditionals[r, j, : self.n_categories[j]]

    def class_conditionals(self, r: int) -> list[np.ndarray]:
        return [self.conditional(r, j) for j in range(self.n_indicators)]

    def nested(self) -> list[list[list[float]]]:
        """Conditionals as class -> indicator -> outcome lists."""
        return [
            [self.conditional(r, j).tolist() for j in range(self.n_indicators)]
            for r in range(self.n_classes)
        ]

    @classmethod
    def from_nested(cls, class_shares, conditionals, atol: float = 1e-12) -> "LcaParameters":
        """Build from ``conditionals[r][j]`` = length-K_j probability vector."""
        n_class = len(conditionals)
        n_cat = tuple(len(v) for v in conditionals[0])
        cond = np.zeros((n_class, len(n_cat), max(n_cat)))
        for r, per_class in enumerate(conditionals):
            if tuple(len(v) for v in per_class) != n_cat:
                raise ValueError(f"class {r} has a different outcome layout")
            for j, vec in enumerate(per_class):
                cond[r, j, : len(vec)] = vec
        return cls(np.asarray(class_shares, dtype=float), cond, n_cat, atol=atol)

    def permuted(self, order) -> "LcaParameters":
        """Classes relabelled so new class q is old class ``order[q]``."""
        order = np.asarray(order, dtype=np.int64)
        return LcaParameters(self.class_shares[order], self.conditionals[order],
                             self.n_categories, atol=self.atol)

    def log_conditionals(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.conditionals)

    def log_shares(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.class_shares)

    def allclose(self, other: "LcaParameters", atol: float = 0.0) -> bool:
        return (
            self.n_categories == other.n_categories
            and self.conditionals.shape == other.conditionals.shape
            and np.allclose(self.class_shares, other.class_shares, rtol=0, atol=atol)
            and np.allclose(self.conditionals, other.conditionals, rtol=0, atol=atol)
        )


@dataclass(frozen=True)
class EmConfig:
    max_iterations: int = 5000
    tolerance: float = 1e-10
    n_restarts: int = 10
    seed: int = 0
    probability_floor: float = 1e-12

    def __post_init__(self):
        if self.max_iterations < 1 or self.n_restarts < 1:
            raise ValueError("max_iterations and n_restarts must be positive")
        if not self.tolerance > 0 or not self.probability_floor > 0:
            raise ValueError("tolerance and probability_floor must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(frozen=True, eq=False)
class FitResult:
    parameters: LcaParameters
    log_likelihood: float
    posterior: np.ndarray
    modal_class: np.ndarray
    n_params: int
    iterations_used: int
    converged: bool
    restart_log: tuple[float, ...]
    n: int
    seed: int
    schema: SurveySchema | None = None

    @property
    def n_classes(self) -> int:
        return self.parameters.n_classes

    @property
    def aic(self) -> float:
        return information_criteria(self.log_likelihood, self.n_params, self.n)[0]

    @property
    def bic(self) -> float:
        return information_criteria(self.log_likelihood, self.n_params, self.n)[1]


# -- single-row densities (reference forms, used by reports and tests) --------


def joint_class_density(row, class_conditionals) -> float:
    """Product over indicators of the probability of the observed (1-based) code."""
    out = 1.0
    for code, probs in zip(row, class_conditionals):
        out *= float(probs[int(code) - 1])
    return out


def mixture_density(row, params: LcaParameters) -> float:
    return float(sum(
        params.class_shares[r] * joint_class_density(row, params.class_conditionals(r))
        for r in range(params.n_classes)
    ))


# -- matrix forms ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _Patterns:
    """Distinct response patterns with their multiplicities."""

    codes: np.ndarray    # (m, J) 0-based
    counts: np.ndarray   # (m,)
    inverse: np.ndarray  # (n,) row -> pattern

    @classmethod
    def of(cls, data: ResponseMatrix) -> "_Patterns":
        codes = data.zero_based()
        uniq, inverse, counts = np.unique(
            codes, axis=0, return_inverse=True, return_counts=True
        )
        return cls(np.ascontiguousarray(uniq), counts.astype(float), inverse.reshape(-1))


def _check_layout(data: ResponseMatrix, params: LcaParameters):
    if tuple(data.schema.n_categories) != params.n_categories:
        raise ValueError(
            f"data outcome layout {data.schema.n_categories} does not match "
            f"parameters {params.n_categories}"
        )


def _e_step_arrays(pat: _Patterns, log_cond, log_shares):
    post, row_ll = _kernels.e_step(pat.codes, log_cond, log_shares)
    if not np.isfinite(row_ll).all():
        bad = int(np.flatnonzero(~np.isfinite(row_ll))[0])
        raise ImpossibleObservationError(
            f"impossible observation: pattern {(pat.codes[bad] + 1).tolist()} "
            "has zero probability"
        )
    return post, float(pat.counts @ row_ll)


def _e_step(pat: _Patterns, params: LcaParameters):
    return _e_step_arrays(pat, params.log_conditionals(), params.log_shares())


def log_likelihood(data: ResponseMatrix, params: LcaParameters) -> float:
    """Sum over respondents of the log mixture density, accumulated in log space."""
    _check_layout(data, params)
    return _e_step(_Patterns.of(data), params)[1]


def posterior(data: ResponseMatrix, params: LcaParameters) -> np.ndarray:
    """n x R matrix of posterior class-membership probabilities."""
    _check_layout(data, params)
    pat = _Patterns.of(data)
    post, _ = _e_step(pat, params)
    return post[pat.inverse]


def _outcome_mask(n_categories) -> np.ndarray:
    """(J, K_max) boolean mask of real (non-padding) outcome slots."""
    return np.arange(max(n_categories))[None, :] < np.asarray(n_categories)[:, None]


def _m_step_arrays(pat: _Patterns, post, mask, floor: float):
    weighted = post * pat.counts[:, None]
    mass = weighted.sum(axis=0)
    if (mass <= _TINY).any():
        raise EmptyClassError(f"empty class: posterior mass {mass.tolist()}")
    shares = mass / mass.sum()
    counts = _kernels.m_step_counts(pat.codes, weighted, mask.shape[1])
    cond = np.where(mask, np.maximum(counts / mass[:, None, None], floor), 0.0)
    cond /= cond.sum(axis=2, keepdims=True)
    return shares, cond


def _m_step(pat: _Patterns, post, n_categories, floor: float) -> LcaParameters:
    shares, cond = _m_step_arrays(pat, post, _outcome_mask(n_categories), floor)
    return LcaParameters(shares, cond, tuple(n_categories))


def em_iterate(data: ResponseMatrix, params: LcaParameters,
               probability_floor: float = 1e-12) -> LcaParameters:
    """One E-step followed by one M-step."""
    _check_layout(data, params)
    pat = _Patterns.of(data)
    post, _ = _e_step(pat, params)
    return _m_step(pat, post, params.n_categories, probability_floor)


def canonical_permutation(params: LcaParameters) -> np.ndarray:
    """Order classes by descending share, ties by lexicographic conditionals."""
    flat = params.conditionals.reshape(params.n_classes, -1)
    keys = sorted(
        range(params.n_classes),
        key=lambda r: (-params.class_shares[r], tuple(flat[r]), r),
    )
    return np.asarray(keys, dtype=np.int64)


def canonical_order(params: LcaParameters) -> LcaParameters:
    return params.permuted(canonical_permutation(params))


def random_parameters(n_classes: int, n_categories, rng: np.random.Generator) -> LcaParameters:
    """Normalized uniform positives for the shares and every conditional vector."""
    shares = 1.0 - rng.random(n_classes)
    cond = np.zeros((n_classes, len(n_categories), max(n_categories)))
    for r in range(n_classes):
        for j, k in enumerate(n_categories):
            v = 1.0 - rng.random(k)
            cond[r, j, :k] = v / v.sum()
    return LcaParameters(shares / shares.sum(), cond, tuple(n_categories))


def _run_chain(pat, start: LcaParameters, config: EmConfig):
    n_cat = start.n_categories
    mask = _outcome_mask(n_cat)
    shares, cond = start.class_shares, start.conditionals
    prev = None
    converged = False
    iterations = 0
    with np.errstate(divide="ignore"):
        post, ll = _e_step_arrays(pat, np.log(cond), np.log(shares))
        while True:
            if prev is not None and abs(ll - prev) / (1.0 + abs(ll)) < config.tolerance:
                converged = True
                break
            if iterations >= config.max_iterations:
                break
            shares, cond = _m_step_arrays(pat, post, mask, config.probability_floor)
            iterations += 1
            prev = ll
            post, ll = _e_step_arrays(pat, np.log(cond), np.log(shares))
    return LcaParameters(shares, cond, n_cat), post, ll, iterations, converged


def fit_em(data: ResponseMatrix, n_classes: int, config: EmConfig | None = None) -> FitResult:
    """Maximum-likelihood fit from ``config.n_restarts`` random starts.

    Every restart draws from its own stream spawned from ``config.seed``; the
    chain with the highest final log-likelihood wins (earliest restart on ties).
    The winning parameters are returned in canonical class order.
    """
    config = config or EmConfig()
    if n_classes < 1:
        raise ValueError("n_classes must be >= 1")
    ident = identifiability_check(n_classes, data.schema, data.n)
    if not ident:
        raise IdentifiabilityError(ident.reason)
    pat = _Patterns.of(data)
    n_cat = data.schema.n_categories
    streams = np.random.SeedSequence(config.seed).spawn(config.n_restarts)

    best = None
    restart_log = []
    for idx, ss in enumerate(streams):
        start = random_parameters(n_classes, n_cat, np.random.default_rng(ss))
        try:
            params, post, ll, iters, converged = _run_chain(pat, start, config)
        except EmptyClassError as exc:
            log.debug("restart %d abandoned: %s", idx, exc)
            restart_log.append(float("-inf"))
            continue
        restart_log.append(ll)
        log.debug("restart %d: LL=%.6f after %d iterations", idx, ll, iters)
        if best is None or ll > best[2]:
            best = (params, post, ll, iters, converged)
    if best is None:
        raise EmptyClassError(f"all {config.n_restarts} restarts produced an empty class")

    params, post, ll, iters, converged = best
    order = canonical_permutation(params)
    params = params.permuted(order)
    full_post = post[:, order][pat.inverse]
    return FitResult(
        parameters=params,
        log_likelihood=ll,
        posterior=full_post,
        modal_class=np.argmax(full_post, axis=1),
        n_params=ident.n_params,
        iterations_used=iters,
        converged=converged,
        restart_log=tuple(restart_log),
        n=data.n,
        seed=config.seed,
        schema=data.schema,
    )


def empirical_marginals(data: ResponseMatrix) -> LcaParameters:
    """The one-class model: conditionals equal the observed outcome frequencies."""
    freqs = tabulate(data)
    return LcaParameters.from_nested([1.0], [freqs])
