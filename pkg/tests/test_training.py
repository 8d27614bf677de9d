import csv
import json

import numpy as np
import pytest

from conslab.errors import InvalidInputError
from conslab.model import (LINEAR, RELU, forward, init_kaiming_balanced)
from conslab.training import (CE, MSE, OptimizerKind, TrainConfig,
                              init_opt_state, integrate_flow, loss_and_dlogits,
                              save_trace_summary, softmax_probs, step, train,
                              trace_summary, trace_to_csv)


def test_mse_loss_value_and_gradient(ds_small):
    logits = np.zeros((ds_small.n, ds_small.c))
    loss, dl = loss_and_dlogits(logits, ds_small, MSE)
    # every row of Y is one-hot, so residual sum of squares is n
    assert abs(loss - 0.5) < 1e-12
    np.testing.assert_allclose(dl, -ds_small.onehot / ds_small.n)


def test_ce_loss_matches_reference(ds_small, rng):
    logits = rng.standard_normal((ds_small.n, ds_small.c))
    loss, dl = loss_and_dlogits(logits, ds_small, CE)
    p = np.exp(logits) / np.exp(logits).sum(axis=1, keepdims=True)
    ref = -np.mean(np.log(p[np.arange(ds_small.n), ds_small.labels]))
    assert abs(loss - ref) < 1e-12
    np.testing.assert_allclose(dl, (p - ds_small.onehot) / ds_small.n, atol=1e-12)
    # gradient of CE wrt logits via finite differences on one entry
    h = 1e-6
    logits[3, 1] += h
    lp, _ = loss_and_dlogits(logits, ds_small, CE)
    logits[3, 1] -= 2 * h
    lm, _ = loss_and_dlogits(logits, ds_small, CE)
    assert abs((lp - lm) / (2 * h) - dl[3, 1]) < 1e-8


def test_ce_loss_stable_at_large_logits(ds_small):
    logits = 500.0 * ds_small.onehot
    loss, dl = loss_and_dlogits(logits, ds_small, CE)
    assert np.isfinite(loss) and loss < 1e-10
    assert np.all(np.isfinite(dl))


def test_softmax_probs_rows_sum_to_one(rng):
    p = softmax_probs(rng.standard_normal((7, 4)) * 100)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(p >= 0)


def test_gd_step_formula(ds_small):
    p = init_kaiming_balanced([8, 5, 3], 0)
    cache = forward(p, ds_small.x, RELU)
    from conslab.model import backward
    _, dl = loss_and_dlogits(cache.logits, ds_small, MSE)
    g = backward(p, cache, dl, RELU)
    q, state = step(p, g, OptimizerKind("gd", 0.1))
    assert state is None
    for w0, w1, gw in zip(p.weights, q.weights, g.weights):
        np.testing.assert_allclose(w1, w0 - 0.1 * gw, atol=1e-15)


def test_adam_step_matches_reference_formula():
    """Two Adam steps against an independent implementation of the update."""
    w = np.array([[1.0, -2.0]])
    from conslab.model import LayerGrads, MlpParams
    p = MlpParams(weights=[w.copy()])
    opt = OptimizerKind("adam", eta=0.1, beta1=0.9, beta2=0.99, eps=1e-8)
    grads = [np.array([[0.5, -1.0]]), np.array([[-0.25, 2.0]])]
    m = np.zeros_like(w)
    v = np.zeros_like(w)
    ref = w.copy()
    state = init_opt_state(p, opt)
    for t, g in enumerate(grads, start=1):
        p, state = step(p, LayerGrads(weights=[g]), opt, state)
        m = opt.beta1 * m + (1 - opt.beta1) * g
        v = opt.beta2 * v + (1 - opt.beta2) * g * g
        mhat = m / (1 - opt.beta1 ** t)
        vhat = v / (1 - opt.beta2 ** t)
        ref = ref - opt.eta * mhat / (np.sqrt(vhat) + opt.eps)
        np.testing.assert_allclose(p.weights[0], ref, atol=1e-14)


def test_optimizer_validation():
    with pytest.raises(InvalidInputError):
        OptimizerKind("gd", eta=0.0)
    with pytest.raises(InvalidInputError):
        OptimizerKind("adam", eta=0.1, beta1=1.0)


def test_train_records_are_consistent(ds_small):
    cfg = TrainConfig(widths=[8, 10, 3], activation=RELU, loss=MSE,
                      opt=OptimizerKind("gd", 0.05), steps=40, seed=1)
    tr = train(cfg, ds_small)
    assert tr.status == "ok" and tr.steps_run == 40
    assert tr.cons.shape == (41, 1)
    assert tr.loss[-1] < tr.loss[0]
    # recorded per-step drift telescopes to the endpoint difference
    np.testing.assert_allclose(tr.delta_c.sum(axis=0), tr.cons[40] - tr.cons[0],
                               atol=1e-10)
    # imbalance column is exactly the gradient norm difference
    np.testing.assert_allclose(tr.imbalance[:, 0],
                               tr.grad_sq[:, 1] - tr.grad_sq[:, 0], atol=1e-12)


def test_train_deterministic(ds_small):
    cfg = TrainConfig(widths=[8, 6, 3], activation=RELU, loss=CE,
                      opt=OptimizerKind("gd", 0.05), steps=25, seed=3)
    a = train(cfg, ds_small)
    b = train(cfg, ds_small)
    np.testing.assert_array_equal(a.loss, b.loss)
    for wa, wb in zip(a.params_final.weights, b.params_final.weights):
        np.testing.assert_array_equal(wa, wb)


def test_divergence_guard(ds_small):
    cfg = TrainConfig(widths=[8, 16, 3], activation=RELU, loss=MSE,
                      opt=OptimizerKind("gd", 50.0), steps=200, seed=1)
    tr = train(cfg, ds_small)
    assert tr.status == "diverged"
    assert tr.steps_run < 200


def test_mode_imbalance_allocation_sums_to_delta(ds_small):
    from conslab.data import data_cov_spectrum
    spec = data_cov_spectrum(ds_small)
    cfg = TrainConfig(widths=[8, 10, 3], activation=RELU, loss=MSE,
                      opt=OptimizerKind("gd", 0.05), steps=30, seed=1,
                      mode_basis=spec.basis)
    tr = train(cfg, ds_small)
    np.testing.assert_allclose(tr.mode_imbalance.sum(axis=1),
                               tr.imbalance[:, 0], atol=1e-10)


def test_switch_counts_recorded(ds_small):
    cfg = TrainConfig(widths=[8, 10, 3], activation=RELU, loss=MSE,
                      opt=OptimizerKind("gd", 0.1), steps=30, seed=1,
                      record_patterns=True)
    tr = train(cfg, ds_small)
    assert tr.switch_counts is not None
    assert tr.switch_counts[0] == 0          # nothing to compare at step 0
    assert tr.switch_counts.sum() > 0
    # unit-level counts can never exceed entry-level counts
    assert np.all(tr.neuron_switch_counts <= tr.switch_counts)
    assert np.all(tr.neuron_switch_counts <= tr.hidden_units)


def test_integrate_flow_conserves(ds_small):
    p0 = init_kaiming_balanced([8, 10, 3], 2)
    flow = integrate_flow(p0, ds_small, RELU, MSE, duration=0.5, step_size=1e-3)
    rel = np.max(np.abs(flow.cons - flow.cons[0]) / (1.0 + np.abs(flow.cons[0])))
    assert rel < 1e-8
    assert flow.loss[-1] < flow.loss[0]


def test_integrate_flow_step_size_convergence(ds_small):
    """Halving the step shrinks the endpoint change at fourth order."""
    p0 = init_kaiming_balanced([8, 6, 3], 2)
    ends = []
    for h in (4e-3, 2e-3, 1e-3):
        flow = integrate_flow(p0, ds_small, LINEAR, MSE, duration=0.2, step_size=h)
        ends.append(np.concatenate([w.ravel() for w in flow.params_final.weights]))
    coarse = np.linalg.norm(ends[0] - ends[1])
    fine = np.linalg.norm(ends[1] - ends[2])
    assert coarse < 1e-6
    assert 10.0 < coarse / fine < 22.0        # ~2^4 for an RK4 scheme


def test_trace_csv_and_summary(tmp_path, ds_small):
    cfg = TrainConfig(widths=[8, 6, 3], activation=RELU, loss=CE,
                      opt=OptimizerKind("gd", 0.05), steps=20, seed=1,
                      record_patterns=True, record_q=True)
    tr = train(cfg, ds_small)
    path = tmp_path / "trace.csv"
    trace_to_csv(tr, path)
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 20
    assert float(rows[5]["loss"]) == tr.loss[5]
    assert float(rows[7]["cons_1"]) == tr.cons[8, 0]
    summary = trace_summary(tr)
    assert summary["status"] == "ok"
    assert summary["q_mean_final"] == pytest.approx(np.mean(tr.q[19]))
    out = tmp_path / "summary.json"
    save_trace_summary(tr, out)
    assert json.loads(out.read_text())["steps_run"] == 20


def test_config_validation():
    with pytest.raises(InvalidInputError):
        TrainConfig(widths=[8, 6, 3], activation=RELU, steps=0)
    with pytest.raises(InvalidInputError):
        TrainConfig(widths=[8, 6, 3], activation=RELU, steps=5, lambda_stride=-1)
