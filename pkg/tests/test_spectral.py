import numpy as np
import pytest

from conslab.data import gen_gaussian_mixture
from conslab.errors import InvalidInputError, SizeLimitError
from conslab.model import RELU, LINEAR, forward, init_kaiming_balanced, leaky
from conslab.numerics import sym_eig
from conslab.spectral import (CompressionProfile, HessianSnapshot,
                              compression_bound, eos_dwell_fraction,
                              estimate_tau, gauss_newton, hessian_snapshot,
                              is_at_eos, lambda_max_hvp, logit_jacobian,
                              profile_to_csv, softmax_block, switch_rate,
                              track_compression, unit_switch_fraction)
from conslab.training import (CE, MSE, OptimizerKind, TrainConfig,
                              softmax_probs, train)


def test_softmax_block_properties():
    p = np.array([0.5, 0.3, 0.2])
    blk = softmax_block(p)
    np.testing.assert_allclose(blk.s, np.diag(p) - np.outer(p, p), atol=1e-15)
    np.testing.assert_allclose(blk.s.sum(axis=0), 0.0, atol=1e-15)
    evals = np.linalg.eigvalsh(blk.s)
    assert evals[0] > -1e-12                      # PSD
    assert abs(blk.lambda_max - evals[-1]) < 1e-12
    assert blk.lambda_max <= 0.5 + 1e-12
    with pytest.raises(InvalidInputError):
        softmax_block(np.array([0.5, 0.6]))


def test_softmax_block_vanishes_at_certainty():
    blk = softmax_block(np.array([1.0, 0.0, 0.0]))
    assert blk.lambda_max < 1e-12


def test_logit_jacobian_matches_finite_differences(ds_small):
    p = init_kaiming_balanced([8, 5, 3], 0)
    act = leaky(0.2)
    J = logit_jacobian(p, ds_small, act)
    h = 1e-6
    flat_idx = 0
    for li, w in enumerate(p.weights):
        for idx in np.ndindex(w.shape):
            orig = w[idx]
            w[idx] = orig + h
            fp = forward(p, ds_small.x, act).logits
            w[idx] = orig - h
            fm = forward(p, ds_small.x, act).logits
            w[idx] = orig
            col = ((fp - fm) / (2 * h)).ravel()   # row-major (i, c)
            np.testing.assert_allclose(J[:, flat_idx], col, atol=1e-6)
            flat_idx += 1


def test_gauss_newton_mse_is_jtj(ds_small):
    p = init_kaiming_balanced([8, 5, 3], 1)
    J = logit_jacobian(p, ds_small, RELU)
    H = gauss_newton(p, ds_small, RELU, MSE)
    np.testing.assert_allclose(H, J.T @ J / ds_small.n, atol=1e-12)


def test_gauss_newton_ce_matches_blockwise_oracle(ds_small):
    """CE curvature assembled sample by sample with explicit S_i blocks."""
    p = init_kaiming_balanced([8, 5, 3], 2)
    act = leaky(0.1)
    J = logit_jacobian(p, ds_small, act)
    probs = softmax_probs(forward(p, ds_small.x, act).logits)
    P = J.shape[1]
    ref = np.zeros((P, P))
    for i in range(ds_small.n):
        Ji = J[i * ds_small.c:(i + 1) * ds_small.c]
        Si = np.diag(probs[i]) - np.outer(probs[i], probs[i])
        ref += Ji.T @ Si @ Ji
    ref /= ds_small.n
    np.testing.assert_allclose(gauss_newton(p, ds_small, act, CE), ref, atol=1e-12)


def test_lambda_max_hvp_matches_dense(ds_small):
    for loss in (MSE, CE):
        p = init_kaiming_balanced([8, 6, 3], 3)
        dense = sym_eig(gauss_newton(p, ds_small, RELU, loss)).eigenvalues[0]
        hvp = lambda_max_hvp(p, ds_small, RELU, loss, tol=1e-9)
        assert abs(hvp - dense) < 1e-6 * max(dense, 1.0)


def test_compression_bound_holds(ds_small):
    for seed in range(5):
        p = init_kaiming_balanced([8, 7, 3], seed)
        lhs, rhs = compression_bound(p, ds_small, RELU)
        assert lhs <= rhs + 1e-8


def test_jacobian_guards(ds_small):
    p = init_kaiming_balanced([8, 5, 3], 0, bias=True)
    with pytest.raises(InvalidInputError):
        logit_jacobian(p, ds_small, RELU)
    big = gen_gaussian_mixture(3000, 30, 10, 2.0, 0)
    wide = init_kaiming_balanced([30, 4000, 10], 0)
    with pytest.raises(SizeLimitError):
        logit_jacobian(wide, big, RELU)


def test_hessian_snapshot_fields(ds_small):
    p = init_kaiming_balanced([8, 6, 3], 1)
    snap = hessian_snapshot(p, ds_small, RELU, CE, step=7)
    assert snap.step == 7
    assert 0 < snap.lambda_max <= snap.jtj_lambda_max * snap.q_margin + 1e-8
    snap_mse = hessian_snapshot(p, ds_small, RELU, MSE)
    assert snap_mse.q_margin == 1.0
    assert snap_mse.lambda_max == snap_mse.jtj_lambda_max


def test_estimate_tau_recovers_synthetic_decay():
    steps = np.arange(0, 600, 10, dtype=float)
    lams = 5.0 * np.exp(-steps / 80.0)
    profile = CompressionProfile(
        snapshots=[HessianSnapshot(int(s), l, l, 0.5)
                   for s, l in zip(steps, lams)])
    tau, r2 = estimate_tau(profile)
    assert abs(tau - 80.0) < 2.0
    assert r2 > 0.999


def test_estimate_tau_none_for_flat_series():
    profile = CompressionProfile(
        snapshots=[HessianSnapshot(s, 3.0, 3.0, 0.5) for s in range(0, 100, 10)])
    tau, r2 = estimate_tau(profile)
    assert tau is None


def test_track_compression_and_csv(tmp_path, ds_small):
    cfg = TrainConfig(widths=[8, 10, 3], activation=RELU, loss=CE,
                      opt=OptimizerKind("gd", 0.3), steps=150, seed=1)
    profile = track_compression(cfg, ds_small, stride=10)
    steps, lams = profile.series()
    assert len(steps) >= 15
    for s in profile.snapshots:
        assert s.lambda_max <= s.jtj_lambda_max * s.q_margin + 1e-8
    path = tmp_path / "profile.csv"
    profile_to_csv(profile, path)
    assert len(path.read_text().splitlines()) == len(steps) + 1
    with pytest.raises(InvalidInputError):
        track_compression(
            TrainConfig(widths=[8, 10, 3], activation=RELU, loss=MSE,
                        opt=OptimizerKind("gd", 0.01), steps=50, seed=1),
            ds_small, stride=10)


def test_switch_rates(ds_small):
    cfg = TrainConfig(widths=[8, 10, 3], activation=RELU, loss=MSE,
                      opt=OptimizerKind("gd", 0.2), steps=60, seed=1,
                      record_patterns=True)
    tr = train(cfg, ds_small)
    per_neuron, total = switch_rate(tr)
    assert 0 < per_neuron < 1
    assert total == pytest.approx(per_neuron * tr.hidden_units)
    # hand recompute from the recorded counts
    expected = tr.switch_counts[1:tr.steps_run].sum() / (
        (tr.steps_run - 1) * ds_small.n * tr.hidden_units)
    assert per_neuron == pytest.approx(expected)
    frac = unit_switch_fraction(tr)
    assert 0 < frac <= 1
    assert frac >= per_neuron    # unit-level events are coarser


def test_switch_rate_linear_is_zero(ds_small):
    cfg = TrainConfig(widths=[8, 10, 3], activation=LINEAR, loss=MSE,
                      opt=OptimizerKind("gd", 0.05), steps=20, seed=1,
                      record_patterns=True)
    tr = train(cfg, ds_small)
    assert switch_rate(tr) == (0.0, 0.0)
    assert unit_switch_fraction(tr) == 0.0


def test_switch_rate_requires_patterns(ds_small):
    cfg = TrainConfig(widths=[8, 10, 3], activation=RELU, loss=MSE,
                      opt=OptimizerKind("gd", 0.05), steps=10, seed=1)
    with pytest.raises(InvalidInputError):
        switch_rate(train(cfg, ds_small))


def test_eos_dwell():
    snaps = [HessianSnapshot(s, lam, lam, 1.0)
             for s, lam in enumerate([10.0, 19.5, 20.0, 20.4, 5.0])]
    frac = eos_dwell_fraction(snaps, eta=0.1)   # band: |0.1*lam - 2| < 0.25
    assert frac == pytest.approx(3 / 5)
    assert is_at_eos(snaps, eta=0.1)
    assert not is_at_eos(snaps, eta=0.01)
    assert eos_dwell_fraction([], 0.1) == 0.0
