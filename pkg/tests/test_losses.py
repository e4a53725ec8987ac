import math

import numpy as np
import pytest

from ccidetect.losses import (
    BatchTensors,
    ContrastiveConfig,
    batch_losses,
    bce_loss,
    infonce_loss,
    loss_and_gradients,
    neg_push_loss,
    pairwise_softmax,
)
from ccidetect.model import init_params

from test_model import random_input


def unit_rows(rng, b, d):
    M = rng.normal(size=(b, d))
    return M / np.linalg.norm(M, axis=1, keepdims=True)


def random_batch(rng, b, d):
    return BatchTensors(
        C=unit_rows(rng, b, d),
        S=unit_rows(rng, b, d),
        p=rng.uniform(0.05, 0.95, size=b),
        y=rng.integers(0, 2, size=b).astype(float),
    )


class TestBceLoss:
    def test_half_probability(self):
        assert bce_loss(np.array([0.5]), np.array([1.0])) == pytest.approx(math.log(2))

    def test_perfect_prediction_near_zero(self):
        assert bce_loss(np.array([1 - 1e-7]), np.array([1.0])) <= 1.1e-7

    def test_closed_form(self):
        expected = -(math.log(0.9) + math.log(0.8)) / 2
        got = bce_loss(np.array([0.9, 0.2]), np.array([1.0, 0.0]))
        assert got == pytest.approx(expected, abs=1e-12)

    def test_empty_batch_rejected(self):
        with pytest.raises(ValueError):
            bce_loss(np.array([]), np.array([]))


class TestPairwiseSoftmax:
    def test_uniform_when_similarities_equal(self):
        C = np.array([[1.0, 0.0], [1.0, 0.0]])
        S = np.array([[0.0, 1.0], [0.0, 1.0]])
        P = pairwise_softmax(C, S, tau=0.08)
        np.testing.assert_allclose(P, 0.25 + np.zeros((2, 2)) + 0.25, atol=1e-12)
        np.testing.assert_allclose(P, [[0.5, 0.5], [0.5, 0.5]], atol=1e-12)

    def test_single_element(self):
        P = pairwise_softmax(np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]]), tau=0.08)
        np.testing.assert_array_equal(P, [[1.0]])

    def test_sharp_diagonal(self):
        # c1.s1 = 1, c1.s2 = 0 at tau = 0.08: P11 = e^12.5 / (e^12.5 + 1).
        C = np.array([[1.0, 0.0], [0.0, 1.0]])
        S = np.array([[1.0, 0.0], [0.0, 1.0]])
        P = pairwise_softmax(C, S, tau=0.08)
        expected = math.exp(12.5) / (math.exp(12.5) + 1.0)
        assert P[0, 0] == pytest.approx(expected, rel=1e-12)
        assert 1.0 - P[0, 0] == pytest.approx(3.7266e-6, rel=1e-3)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(0)
        for b in range(1, 33):
            for tau in (0.05, 0.08, 1.0):
                P = pairwise_softmax(unit_rows(rng, b, 6), unit_rows(rng, b, 6), tau)
                np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-9)

    def test_temperature_sharpening(self):
        rng = np.random.default_rng(1)
        C, S = unit_rows(rng, 8, 6), unit_rows(rng, 8, 6)
        hot = pairwise_softmax(C, S, tau=1.0).max(axis=1)
        cold = pairwise_softmax(C, S, tau=0.08).max(axis=1)
        assert (cold >= hot - 1e-12).all()


class TestContrastiveComponents:
    def test_infonce_zero_when_diagonal_one(self):
        P = np.array([[1.0, 0.0], [0.5, 0.5]])
        assert infonce_loss(P, np.array([0])) == 0.0

    def test_infonce_uniform(self):
        P = np.full((2, 2), 0.5)
        assert infonce_loss(P, np.array([0, 1])) == pytest.approx(math.log(2))

    def test_infonce_mixed_batch(self):
        P = np.array([[0.8, 0.2], [0.3, 0.7]])
        assert infonce_loss(P, np.array([0])) == pytest.approx(-math.log(0.8), abs=1e-12)

    def test_neg_zero_when_diagonal_zero(self):
        P = np.array([[0.0, 1.0], [0.5, 0.5]])
        assert neg_push_loss(P, np.array([0])) == 0.0

    def test_neg_uniform(self):
        P = np.full((2, 2), 0.5)
        assert neg_push_loss(P, np.array([0, 1])) == pytest.approx(math.log(2))

    def test_neg_sharp(self):
        P = np.array([[0.9, 0.1], [0.5, 0.5]])
        assert neg_push_loss(P, np.array([0])) == pytest.approx(-math.log(0.1), abs=1e-12)

    def test_empty_subsets_contribute_zero(self):
        assert infonce_loss(np.full((2, 2), 0.5), np.array([], dtype=int)) == 0.0
        assert neg_push_loss(np.full((2, 2), 0.5), np.array([], dtype=int)) == 0.0


class TestTotalLoss:
    def test_lambda_zero_reduces_to_bce(self):
        rng = np.random.default_rng(2)
        batch = random_batch(rng, 6, 5)
        lb = batch_losses(batch, ContrastiveConfig(lam=0.0))
        assert lb.l_total == lb.l_bce

    def test_alpha_zero_reduces_to_infonce(self):
        rng = np.random.default_rng(3)
        batch = random_batch(rng, 6, 5)
        lb = batch_losses(batch, ContrastiveConfig(alpha=0.0))
        assert lb.l_contrast == lb.l_infonce

    def test_identities_exact(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            b = int(rng.integers(1, 10))
            cfg = ContrastiveConfig(
                tau=float(rng.uniform(0.05, 1.0)),
                alpha=float(rng.uniform(0, 2)),
                lam=float(rng.uniform(0, 2)),
            )
            lb = batch_losses(random_batch(rng, b, 5), cfg)
            assert lb.l_contrast == lb.l_infonce + cfg.alpha * lb.l_neg
            assert lb.l_total == lb.l_bce + cfg.lam * lb.l_contrast

    def test_non_negative_components(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            lb = batch_losses(random_batch(rng, 8, 5), ContrastiveConfig())
            assert lb.l_bce >= 0 and lb.l_infonce >= 0 and lb.l_neg >= 0


class TestConfigValidation:
    def test_tau_positive(self):
        with pytest.raises(ValueError, match="tau"):
            ContrastiveConfig(tau=0.0)

    def test_alpha_non_negative(self):
        with pytest.raises(ValueError, match="alpha"):
            ContrastiveConfig(alpha=-0.1)

    def test_lambda_non_negative(self):
        with pytest.raises(ValueError, match="lambda"):
            ContrastiveConfig(lam=-1.0)


def numeric_gradient(fn, arr, h=1e-5):
    grad = np.zeros_like(arr)
    flat = arr.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        lp = fn()
        flat[i] = orig - h
        lm = fn()
        flat[i] = orig
        gflat[i] = (lp - lm) / (2 * h)
    return grad


def max_relative_error(analytic, numeric):
    denom = np.maximum(1e-4, np.maximum(np.abs(analytic), np.abs(numeric)))
    return float(np.max(np.abs(analytic - numeric) / denom))


def check_gradients(seed, attention, lam, alpha, vocab=16, d=6, b=4, max_len=20):
    rng = np.random.default_rng(seed)
    params = init_params(vocab, d, max_len, attention=attention, seed=seed + 1)
    inputs = [random_input(rng, vocab, max_len) for _ in range(b)]
    y = rng.integers(0, 2, size=b).astype(float)
    cfg = ContrastiveConfig(tau=0.08, alpha=alpha, lam=lam)
    lb = loss_and_gradients(inputs, y, params, cfg)

    def total():
        return loss_and_gradients(inputs, y, params, cfg).l_total

    worst = 0.0
    for name in ("emb", "wq", "wk", "wv", "head_w"):
        analytic = getattr(lb.gradients, name)
        numeric = numeric_gradient(total, getattr(params, name))
        worst = max(worst, max_relative_error(analytic, numeric))
    b_arr = np.array([params.head_b])

    def total_b():
        params.head_b = float(b_arr[0])
        return loss_and_gradients(inputs, y, params, cfg).l_total

    numeric_b = numeric_gradient(total_b, b_arr)
    params.head_b = float(b_arr[0])
    worst = max(worst, max_relative_error(np.array([lb.gradients.head_b]), numeric_b))
    return worst


@pytest.mark.parametrize("attention", [False, True])
@pytest.mark.parametrize("lam,alpha", [(0.0, 1.0), (0.1, 1.0), (1.0, 0.0)])
def test_gradients_match_finite_differences(attention, lam, alpha):
    worst = check_gradients(seed=11, attention=attention, lam=lam, alpha=alpha)
    assert worst < 1e-4


def test_gradient_alpha_insensitive_when_all_consistent():
    # All labels 0: the negative-push term (and hence alpha) cannot matter.
    rng = np.random.default_rng(7)
    params = init_params(16, 6, 20, attention=False, seed=8)
    inputs = [random_input(rng, 16, 20) for _ in range(4)]
    y = np.zeros(4)
    a = loss_and_gradients(inputs, y, params, ContrastiveConfig(alpha=0.0))
    b = loss_and_gradients(inputs, y, params, ContrastiveConfig(alpha=5.0))
    assert a.l_total == b.l_total
    assert a.l_neg == 0.0
    np.testing.assert_array_equal(a.gradients.emb, b.gradients.emb)


def test_gradient_lambda_insensitive_when_all_inconsistent_alpha_zero():
    rng = np.random.default_rng(9)
    params = init_params(16, 6, 20, attention=False, seed=10)
    inputs = [random_input(rng, 16, 20) for _ in range(4)]
    y = np.ones(4)
    lb = loss_and_gradients(inputs, y, params, ContrastiveConfig(alpha=0.0, lam=1.0))
    assert lb.l_infonce == 0.0
    assert lb.l_total == lb.l_bce
