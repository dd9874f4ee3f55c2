import numpy as np
import pytest

from iclseg.field import encode_labels_as_colors
from iclseg.loss import LossWeights, loss_gradient
from iclseg.optim import finite_difference_check, sample_check_case


def test_random_small_fields_match_finite_differences():
    rng = np.random.default_rng(42)
    for _ in range(4):
        field, labels = sample_check_case(4, 4, rng)
        assert finite_difference_check(field, labels) < 1e-4


def test_gradient_near_zero_at_perfect_coloring():
    labels = np.array([[0, 1, 1], [2, 2, 1]])
    field = encode_labels_as_colors(labels, seed=0)
    grad = loss_gradient(field, labels, LossWeights(lambda_sep=0.0, lambda_mean=0.0))
    # l_var sits exactly at its minimum; the separation terms still pull.
    assert np.abs(grad).max() == 0.0
    assert finite_difference_check(field, labels) < 1e-4


def test_var_only_weights_match_var_gradient():
    rng = np.random.default_rng(8)
    field, labels = sample_check_case(4, 3, rng)
    full = loss_gradient(field, labels, LossWeights(lambda_sep=0.0, lambda_mean=0.0))
    var_only = loss_gradient(
        field, labels, LossWeights(enable_sep=False, enable_mean=False)
    )
    assert np.array_equal(full, var_only)


def test_nonuniform_size_and_many_instances():
    rng = np.random.default_rng(17)
    field, labels = sample_check_case(5, 3, rng, max_instances=4)
    err = finite_difference_check(field, labels, epsilon=1e-3)
    assert err < 1e-4


def test_check_reports_honest_error_for_wrong_gradient():
    # Sanity that the checker can fail: bias one coordinate and expect a miss.
    rng = np.random.default_rng(4)
    field, labels = sample_check_case(3, 3, rng)
    base = finite_difference_check(field, labels)
    assert base < 1e-4

    from iclseg import optim

    original = optim.loss_gradient

    def broken(field, labels, weights=None, return_report=False):
        g = original(field, labels, weights)
        g = np.array(g)
        g[0, 0, 0] += 1.0
        return g

    optim.loss_gradient = broken
    try:
        assert finite_difference_check(field, labels) > 1e-2
    finally:
        optim.loss_gradient = original


def test_sample_check_case_avoids_kinks():
    rng = np.random.default_rng(123)
    for _ in range(5):
        field, labels = sample_check_case(6, 5, rng)
        from iclseg.field import instance_means

        mu = instance_means(field, labels).means
        dev = np.abs(np.abs(field - mu[labels]) - 1.0)
        assert dev.min() > 0.01


def test_finite_difference_check_epsilon_must_be_positive():
    rng = np.random.default_rng(0)
    field, labels = sample_check_case(3, 3, rng)
    with pytest.raises(ValueError):
        finite_difference_check(field, labels, epsilon=0.0)
