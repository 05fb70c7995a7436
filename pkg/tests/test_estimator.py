"""Surrogate pipeline: fit, both prediction paths, risks, serialization."""

import numpy as np
import pytest

from qslearn.decode import decode_bruteforce
from qslearn.estimator import (
    alpha_weights,
    empirical_risk,
    evaluate,
    fit,
    load_model,
    predict,
    predict_batch,
    save_model,
    surrogate_values,
)
from qslearn.kernels import KernelSpec
from qslearn.losses import Hamming, InvalidLabelError, NDCGType, PrecAtK

from conftest import loss_ids, random_observation, small_losses

GAUSS = KernelSpec("gaussian", 1.0)
ALL_SMALL = small_losses()


def test_single_point_fit_shrinks_embedding(rng):
    loss = Hamming(3)
    y = (1, 0, 1)
    lam = 0.4
    model = fit(loss, GAUSS, lam, np.zeros((1, 2)), [y])
    g = surrogate_values(model, np.zeros(2))[0]
    assert np.allclose(g, loss.u_row(y) / (1 + lam), atol=1e-12)


def test_constant_labels_decode_to_that_label(rng):
    loss = Hamming(4)
    y = (0, 1, 1, 0)
    x = rng.uniform(size=(12, 3))
    model = fit(loss, KernelSpec("gaussian", 0.8), 0.1, x, [y] * 12)
    for _ in range(20):
        pt = rng.uniform(size=3)
        assert predict(model, pt) == y


def test_cross_path_surrogate_values(rng):
    loss = PrecAtK(5, 2)
    x = rng.normal(size=(15, 3))
    ys = [random_observation(loss, rng) for _ in range(15)]
    model = fit(loss, GAUSS, 0.05, x, ys)
    psi = np.array([loss.u_row(y) for y in ys])
    for _ in range(10):
        pt = rng.normal(size=3)
        g_fast = surrogate_values(model, pt)[0]
        g_alpha = psi.T @ alpha_weights(model, pt)[0]
        assert np.max(np.abs(g_fast - g_alpha)) < 1e-8


@pytest.mark.parametrize("loss", ALL_SMALL, ids=loss_ids(ALL_SMALL))
def test_fast_path_equals_alpha_path(loss, rng):
    x = rng.uniform(size=(12, 2))
    ys = [random_observation(loss, rng) for _ in range(12)]
    model = fit(loss, KernelSpec("gaussian", 0.6), 0.08, x, ys)
    x_test = rng.uniform(size=(8, 2))
    assert predict_batch(model, x_test, path="fast") == predict_batch(
        model, x_test, path="alpha"
    )


def test_hamming_predict_matches_eq8_oracle(rng):
    loss = Hamming(4)
    x = rng.uniform(size=(30, 2))
    ys = [random_observation(loss, rng) for _ in range(30)]
    model = fit(loss, KernelSpec("gaussian", 0.5), 0.05, x, ys)
    for _ in range(50):
        pt = rng.uniform(size=2)
        alpha = alpha_weights(model, pt)[0]
        assert predict(model, pt) == decode_bruteforce(loss, alpha, ys)


def test_ndcg_predict_matches_direct_formula(rng):
    loss = NDCGType(5, top_relevance=3)
    x = rng.uniform(size=(20, 2))
    ys = [random_observation(loss, rng) for _ in range(20)]
    model = fit(loss, KernelSpec("gaussian", 0.5), 0.1, x, ys)
    for _ in range(20):
        pt = rng.uniform(size=2)
        alpha = alpha_weights(model, pt)[0]
        v = np.zeros(5)
        for a_i, y in zip(alpha, ys):
            n_y = loss.normalizer(y)
            if n_y > 0:
                v += a_i * loss.gains(y) / n_y
        order = sorted(range(5), key=lambda j: (-v[j], j))
        sigma = [0] * 5
        for pos, item in enumerate(order):
            sigma[item] = pos + 1
        assert predict(model, pt) == tuple(sigma)


def test_empirical_risk_values(rng):
    loss = Hamming(3)
    ys = [(1, 1, 1), (0, 0, 0)]
    assert empirical_risk(ys, loss, ys) == 0.0
    assert empirical_risk([(0, 0, 0)] * 2, loss, [(1, 1, 1)] * 2) == 1.0
    preds = [random_observation(loss, rng) for _ in range(9)]
    truth = [random_observation(loss, rng) for _ in range(9)]
    manual = sum(loss.value(z, y) for z, y in zip(preds, truth)) / 9
    assert empirical_risk(preds, loss, truth) == pytest.approx(manual, rel=1e-12)


def test_empirical_risk_requires_data():
    with pytest.raises(ValueError):
        empirical_risk([], Hamming(2), [])


def test_scale_and_offset_invariance_of_argmin(rng):
    # argmin of sum w_i L is unchanged by L -> s L + c for s > 0
    loss = Hamming(4)
    for _ in range(25):
        n = 8
        w = rng.normal(size=n)
        ys = [random_observation(loss, rng) for _ in range(n)]
        base = decode_bruteforce(loss, w, ys)
        s, c = float(rng.uniform(0.5, 3.0)), float(rng.normal())
        best, best_obj = None, np.inf
        for z in loss.outputs():
            obj = sum(wi * (s * loss.value(z, y) + c) for wi, y in zip(w, ys))
            if obj < best_obj:
                best, best_obj = z, obj
        assert best == base


def test_invalid_observation_reports_index():
    with pytest.raises(InvalidLabelError, match="observation 1"):
        fit(Hamming(3), GAUSS, 0.1, np.zeros((2, 2)), [(0, 1, 0), (0, 1)])


def test_serialization_round_trip(tmp_path, rng):
    for loss in (Hamming(3), PrecAtK(4, 2), NDCGType(3, top_relevance=2)):
        x = rng.uniform(size=(10, 3))
        ys = [random_observation(loss, rng) for _ in range(10)]
        model = fit(loss, KernelSpec("gaussian", 0.7), 0.2, x, ys)
        path = tmp_path / f"{loss.name}.npz"
        save_model(model, str(path))
        restored = load_model(str(path))
        assert np.allclose(restored.coefficients, model.coefficients)
        x_test = rng.uniform(size=(6, 3))
        assert predict_batch(restored, x_test) == predict_batch(model, x_test)


def test_serialization_block_partition(tmp_path, rng):
    from qslearn.losses import BlockZeroOne
    from conftest import popcount_partition

    loss = BlockZeroOne(3, popcount_partition(3))
    x = rng.uniform(size=(12, 2))
    ys = [random_observation(loss, rng) for _ in range(12)]
    model = fit(loss, KernelSpec("gaussian", 0.5), 0.1, x, ys)
    path = tmp_path / "block.npz"
    save_model(model, str(path))
    back = load_model(str(path))
    assert back.loss.partition == loss.partition
    x_test = rng.uniform(size=(5, 2))
    assert predict_batch(back, x_test) == predict_batch(model, x_test)


def test_evaluate_risk(rng):
    loss = Hamming(3)
    x = rng.uniform(size=(10, 2))
    ys = [random_observation(loss, rng) for _ in range(10)]
    model = fit(loss, KernelSpec("gaussian", 0.5), 1e-6, x, ys)
    # near-interpolation: training risk should be small
    assert evaluate(model, x, ys) <= 0.15
