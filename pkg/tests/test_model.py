import numpy as np
import pytest

from conslab.errors import InvalidInputError
from conslab.model import (LINEAR, RELU, Activation, MlpParams, backward,
                           forward, init_kaiming_balanced, leaky,
                           load_checkpoint, save_checkpoint, trace_pairing)
from conslab.training import loss_and_dlogits


def _flat_weights(grads):
    return np.concatenate([g.ravel() for g in grads.weights])


def _numeric_grad(p, ds, act, loss_kind, h=1e-6):
    """Central finite differences through the full loss."""
    out = []
    for li, w in enumerate(p.weights):
        g = np.zeros_like(w)
        for idx in np.ndindex(w.shape):
            orig = w[idx]
            w[idx] = orig + h
            lp, _ = loss_and_dlogits(forward(p, ds.x, act).logits, ds, loss_kind)
            w[idx] = orig - h
            lm, _ = loss_and_dlogits(forward(p, ds.x, act).logits, ds, loss_kind)
            w[idx] = orig
            g[idx] = (lp - lm) / (2 * h)
        out.append(g)
    return np.concatenate([g.ravel() for g in out])


def test_activation_family():
    z = np.array([-2.0, -0.5, 0.0, 0.5, 2.0])
    np.testing.assert_array_equal(LINEAR.apply(z), z)
    np.testing.assert_array_equal(RELU.apply(z), [0.0, 0.0, 0.0, 0.5, 2.0])
    np.testing.assert_array_equal(leaky(0.1).apply(z), [-0.2, -0.05, 0.0, 0.5, 2.0])
    np.testing.assert_array_equal(RELU.deriv(z), [0.0, 0.0, 0.0, 1.0, 1.0])
    assert leaky(0.3).deriv(np.array([0.0]))[0] == 0.3
    assert LINEAR.is_linear and not RELU.is_linear
    with pytest.raises(InvalidInputError):
        Activation(1.5)
    with pytest.raises(InvalidInputError):
        Activation(-0.1)


def test_positive_homogeneity():
    act = leaky(0.2)
    z = np.linspace(-3, 3, 31)
    for scale in (0.5, 2.0, 7.0):
        np.testing.assert_allclose(act.apply(scale * z), scale * act.apply(z))


def test_init_shapes_and_scale():
    p = init_kaiming_balanced([50, 300, 7], 0)
    assert [w.shape for w in p.weights] == [(300, 50), (7, 300)]
    assert p.widths == [50, 300, 7]
    assert abs(p.weights[0].std() - np.sqrt(2.0 / 50)) < 0.01
    assert p.biases is None
    pb = init_kaiming_balanced([5, 4, 3], 0, bias=True)
    assert [b.shape for b in pb.biases] == [(4,), (3,)]
    assert all(np.all(b == 0) for b in pb.biases)
    with pytest.raises(InvalidInputError):
        init_kaiming_balanced([5, 3], 0)


def test_linear_forward_is_matrix_product(ds_small):
    p = init_kaiming_balanced([8, 6, 3], 1)
    cache = forward(p, ds_small.x, LINEAR)
    expected = ds_small.x @ p.weights[0].T @ p.weights[1].T
    np.testing.assert_allclose(cache.logits, expected, atol=1e-12)


def test_forward_shape_validation(ds_small):
    p = init_kaiming_balanced([9, 6, 3], 1)
    with pytest.raises(InvalidInputError):
        forward(p, ds_small.x, RELU)


def test_backward_matches_finite_differences(ds_small):
    for seed, act, loss_kind in [(0, RELU, "mse"), (1, LINEAR, "ce"),
                                 (2, leaky(0.4), "ce")]:
        p = init_kaiming_balanced([8, 5, 4, 3], seed)
        cache = forward(p, ds_small.x, act)
        _, dlogits = loss_and_dlogits(cache.logits, ds_small, loss_kind)
        analytic = _flat_weights(backward(p, cache, dlogits, act))
        numeric = _numeric_grad(p, ds_small, act, loss_kind)
        err = np.linalg.norm(analytic - numeric) / np.linalg.norm(numeric)
        assert err < 1e-7, (seed, err)


def test_bias_gradients_match_finite_differences(ds_small):
    p = init_kaiming_balanced([8, 5, 3], 3, bias=True)
    for b in p.biases:
        b += 0.01 * np.arange(len(b))
    act = leaky(0.3)
    cache = forward(p, ds_small.x, act)
    _, dlogits = loss_and_dlogits(cache.logits, ds_small, "mse")
    g = backward(p, cache, dlogits, act)
    h = 1e-6
    for li in range(2):
        for j in range(len(p.biases[li])):
            orig = p.biases[li][j]
            p.biases[li][j] = orig + h
            lp, _ = loss_and_dlogits(forward(p, ds_small.x, act).logits, ds_small, "mse")
            p.biases[li][j] = orig - h
            lm, _ = loss_and_dlogits(forward(p, ds_small.x, act).logits, ds_small, "mse")
            p.biases[li][j] = orig
            assert abs(g.biases[li][j] - (lp - lm) / (2 * h)) < 1e-8


def test_trace_pairing_equal_across_layers(ds_small):
    """tr(W_l^T g_l) is layer-independent for bias-free homogeneous nets."""
    for act in (LINEAR, RELU, leaky(0.5)):
        p = init_kaiming_balanced([8, 10, 6, 3], 4)
        cache = forward(p, ds_small.x, act)
        _, dlogits = loss_and_dlogits(cache.logits, ds_small, "mse")
        traces = trace_pairing(p, backward(p, cache, dlogits, act))
        assert np.max(np.abs(traces - traces[0])) < 1e-10 * max(abs(traces[0]), 1.0)


def test_trace_pairing_breaks_with_bias(ds_small):
    p = init_kaiming_balanced([8, 10, 3], 4, bias=True)
    for b in p.biases:
        b += 0.5
    cache = forward(p, ds_small.x, RELU)
    _, dlogits = loss_and_dlogits(cache.logits, ds_small, "mse")
    traces = trace_pairing(p, backward(p, cache, dlogits, RELU))
    assert np.max(np.abs(traces - traces[0])) > 1e-4


def test_checkpoint_roundtrip(tmp_path):
    p = init_kaiming_balanced([6, 4, 2], 5, bias=True)
    path = tmp_path / "ckpt.json"
    save_checkpoint(p, path)
    q = load_checkpoint(path)
    assert q.widths == p.widths
    for a, b in zip(p.weights, q.weights):
        np.testing.assert_array_equal(a, b)
    for a, b in zip(p.biases, q.biases):
        np.testing.assert_array_equal(a, b)


def test_checkpoint_version_guard(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"version": 99, "widths": [2, 2, 2], "weights": []}')
    with pytest.raises(InvalidInputError):
        load_checkpoint(path)


def test_copy_is_deep():
    p = init_kaiming_balanced([4, 3, 2], 6)
    q = p.copy()
    q.weights[0][0, 0] += 1.0
    assert p.weights[0][0, 0] != q.weights[0][0, 0]
    assert p.num_params == 4 * 3 + 3 * 2
