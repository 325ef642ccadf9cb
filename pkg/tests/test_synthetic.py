import math

import numpy as np
import pytest

from latentclass.documents import truth_r3_model
from latentclass.model import EmConfig, LcaParameters, fit_em, log_likelihood
from latentclass.synthetic import (
    align_labels,
    recovery_error,
    sample_dataset,
    well_separated_truth,
)

from conftest import make_schema
import oracles


def test_point_mass_emission():
    params = LcaParameters.from_nested(
        [0.5, 0.5], [[[1, 0, 0], [0, 1]], [[0, 0, 1], [1, 0]]])
    ds = sample_dataset(params, make_schema((3, 2)), 200, seed=1)
    signatures = {0: [1, 2], 1: [3, 1]}
    for row, cls in zip(ds.responses.codes.tolist(), ds.true_classes):
        assert row == signatures[int(cls)]


def test_class_frequencies_converge():
    params = LcaParameters.from_nested([0.3, 0.7], [[[0.5, 0.5]], [[0.5, 0.5]]])
    ds = sample_dataset(params, make_schema((2,)), 100_000, seed=4)
    freq = np.bincount(ds.true_classes, minlength=2) / 100_000
    np.testing.assert_allclose(freq, [0.3, 0.7], atol=0.01)


def test_outcome_frequencies_converge():
    truth = well_separated_truth(2, 3, 4)
    ds = sample_dataset(truth, make_schema((4,) * 3), 100_000, seed=6)
    codes = ds.responses.codes
    for r in range(2):
        members = codes[ds.true_classes == r]
        for j in range(3):
            freq = np.bincount(members[:, j] - 1, minlength=4) / len(members)
            np.testing.assert_allclose(freq, truth.conditional(r, j), atol=0.02)


def test_sampling_is_deterministic():
    truth = well_separated_truth()
    schema = make_schema((5,) * 6)
    a = sample_dataset(truth, schema, 500, seed=9)
    b = sample_dataset(truth, schema, 500, seed=9)
    assert a.responses == b.responses
    np.testing.assert_array_equal(a.true_classes, b.true_classes)
    assert not np.array_equal(sample_dataset(truth, schema, 500, seed=10).responses.codes,
                              a.responses.codes)


def test_sample_rejects_empty():
    with pytest.raises(ValueError):
        sample_dataset(well_separated_truth(), make_schema((5,) * 6), 0, seed=1)


def test_well_separated_fixture_definition():
    truth = truth_r3_model().params
    assert truth.n_classes == 3 and truth.n_categories == (5,) * 6
    modal = truth.conditionals.argmax(axis=2)
    assert (truth.conditionals.max(axis=2) >= 0.8).all()
    for j in range(6):
        assert len(set(modal[:, j])) == 3


def test_align_identity_and_swap():
    truth = well_separated_truth()
    assert align_labels(truth, truth).tolist() == [0, 1, 2]
    swapped = truth.permuted([1, 0, 2])
    perm = align_labels(truth, swapped)
    assert perm.tolist() == [1, 0, 2]
    assert recovery_error(truth, swapped, perm) == (0.0, 0.0)


def test_align_stable_under_small_noise():
    rng = np.random.default_rng(3)
    truth = well_separated_truth(4, 5, 5)
    shuffled = truth.permuted([2, 0, 3, 1])
    noisy = shuffled.conditionals + rng.uniform(-0.01, 0.01, size=shuffled.conditionals.shape)
    noisy = noisy / noisy.sum(axis=2, keepdims=True)
    perturbed = LcaParameters(shuffled.class_shares, noisy, shuffled.n_categories)
    assert align_labels(truth, perturbed).tolist() == align_labels(truth, shuffled).tolist()


def test_align_greedy_for_many_classes():
    truth = well_separated_truth(9, 3, 9)
    order = [4, 8, 0, 2, 7, 1, 6, 3, 5]
    perm = align_labels(truth, truth.permuted(order))
    # estimated class perm[a] must be true class a
    assert [order[b] for b in perm] == list(range(9))


def test_align_rejects_class_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        align_labels(well_separated_truth(3), well_separated_truth(2))


def test_recovery_error_single_cell():
    truth = LcaParameters.from_nested([0.5, 0.5], [[[0.5, 0.5]], [[0.2, 0.8]]])
    off = LcaParameters.from_nested([0.5, 0.5], [[[0.53, 0.47]], [[0.2, 0.8]]])
    cond_err, share_err = recovery_error(truth, off, [0, 1])
    assert cond_err == pytest.approx(0.03, abs=1e-12)
    assert share_err == 0.0


def test_true_loglik_finite_and_fit_per_obs_improves_with_n():
    truth = truth_r3_model().params
    schema = make_schema((5,) * 6)
    gaps = []
    for n in (500, 5000, 50000):
        ds = sample_dataset(truth, schema, n, seed=21)
        true_ll = log_likelihood(ds.responses, truth)
        assert np.isfinite(true_ll)
        fit = fit_em(ds.responses, 3, EmConfig(n_restarts=3, seed=2))
        # overfitting gain per observation shrinks as n grows
        gaps.append((fit.log_likelihood - true_ll) / n)
    assert all(g >= 0 for g in gaps)
    assert gaps[0] > gaps[1] > gaps[2]


def test_fitted_loglik_per_obs_approaches_entropy_rate():
    truth = truth_r3_model().params
    shares, cond = oracles.to_lists(truth)
    neg_entropy = 0.0
    for cell in oracles.all_cells(truth.n_categories):
        f = oracles.mixture(cell, shares, cond)
        neg_entropy += f * math.log(f)
    schema = make_schema((5,) * 6)
    errors = []
    for n in (500, 5000, 50000):
        ds = sample_dataset(truth, schema, n, seed=33)
        fit = fit_em(ds.responses, 3, EmConfig(n_restarts=3, seed=5))
        errors.append(abs(fit.log_likelihood / n - neg_entropy))
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 0.02
