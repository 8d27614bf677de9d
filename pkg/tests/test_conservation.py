import numpy as np
import pytest

from conslab.conservation import (conservation_quantities, drift_report,
                                  imbalance_sum, step_drift_check)
from conslab.errors import InvalidInputError
from conslab.model import (RELU, backward, forward, init_kaiming_balanced,
                           leaky)
from conslab.training import (MSE, OptimizerKind, TrainConfig,
                              loss_and_dlogits, step, train)


def test_conservation_quantities_manual():
    p = init_kaiming_balanced([4, 3, 2], 0)
    c = conservation_quantities(p)
    expected = np.sum(p.weights[1] ** 2) - np.sum(p.weights[0] ** 2)
    assert c.shape == (1,)
    assert abs(c[0] - expected) < 1e-12


def test_step_drift_identity_single_step(ds_small):
    """Measured Delta C equals eta^2 * gradient imbalance for one GD step."""
    for seed in range(3):
        p = init_kaiming_balanced([8, 12, 6, 3], seed)
        cache = forward(p, ds_small.x, leaky(0.3))
        _, dl = loss_and_dlogits(cache.logits, ds_small, MSE)
        g = backward(p, cache, dl, leaky(0.3))
        q, _ = step(p, g, OptimizerKind("gd", 0.07))
        measured, predicted = step_drift_check(p, q, g, 0.07)
        np.testing.assert_allclose(measured, predicted, rtol=1e-9, atol=1e-18)


def test_stable_drift_avoids_cancellation():
    """The factored difference beats direct norm differencing by orders of magnitude.

    Reference is the exact delta-C of the rounded update, evaluated in extended
    precision.  Gradients are adjusted to satisfy the layer trace pairing
    <w2, g2> = <w1, g1> that backprop gradients of bias-free homogeneous nets
    satisfy, so the drift is a pure second-order effect as in real training.
    """
    from conslab.model import LayerGrads, MlpParams
    rng = np.random.Generator(np.random.PCG64(0))
    w = [rng.standard_normal((20, 20)) for _ in range(2)]
    g = [rng.standard_normal((20, 20)) for _ in range(2)]
    shift = (np.sum(w[0] * g[0]) - np.sum(w[1] * g[1])) / np.sum(w[1] * w[1])
    g[1] = g[1] + shift * w[1]
    eta = 1e-6
    before = MlpParams(weights=[x.copy() for x in w])
    after = MlpParams(weights=[x - eta * y for x, y in zip(w, g)])
    measured, predicted = step_drift_check(before, after, LayerGrads(weights=g), eta)
    exact_c = [float(np.sum(a.astype(np.longdouble) ** 2)
                     - np.sum(b.astype(np.longdouble) ** 2))
               for a, b in zip(after.weights, before.weights)]
    exact = exact_c[1] - exact_c[0]
    naive = np.array([np.sum(a ** 2) - np.sum(b ** 2)
                      for a, b in zip(after.weights, before.weights)])
    naive = naive[1:] - naive[:-1]
    stable_err = abs(measured[0] - exact)
    naive_err = abs(naive[0] - exact)
    assert stable_err < naive_err / 10
    assert measured[0] == pytest.approx(predicted[0], rel=1e-3)


def test_drift_report_matches_endpoints(ds_small):
    cfg = TrainConfig(widths=[8, 10, 3], activation=RELU, loss=MSE,
                      opt=OptimizerKind("gd", 0.05), steps=50, seed=2)
    tr = train(cfg, ds_small)
    rep = drift_report(tr)
    np.testing.assert_allclose(rep.total_drift,
                               np.abs(tr.cons[50] - tr.cons[0]), atol=1e-15)
    np.testing.assert_allclose(rep.imbalance, imbalance_sum(tr), atol=1e-15)
    assert rep.identity_applicable
    assert np.max(rep.identity_residual) < 1e-8
    d = rep.to_dict()
    assert d["identity_applicable"] is True


def test_identity_not_applicable_for_adam_and_bias(ds_small):
    for kw in ({"opt": OptimizerKind("adam", 0.01)}, {"bias": True}):
        cfg = TrainConfig(widths=[8, 10, 3], activation=RELU, loss=MSE,
                          opt=kw.get("opt", OptimizerKind("gd", 0.05)),
                          steps=20, seed=2, bias=kw.get("bias", False))
        rep = drift_report(train(cfg, ds_small))
        assert not rep.identity_applicable
        assert rep.to_dict()["identity_residual"] is None


def test_total_drift_equals_eta_sq_imbalance(ds_small):
    """Signed total drift is exactly eta^2 times the imbalance sum."""
    cfg = TrainConfig(widths=[8, 10, 3], activation=RELU, loss=MSE,
                      opt=OptimizerKind("gd", 0.03), steps=80, seed=5)
    tr = train(cfg, ds_small)
    signed = tr.cons[80] - tr.cons[0]
    np.testing.assert_allclose(signed, 0.03 ** 2 * imbalance_sum(tr), rtol=1e-7)


def test_errors():
    p = init_kaiming_balanced([4, 3, 2], 0)
    with pytest.raises(InvalidInputError):
        conservation_quantities(
            type(p)(weights=[p.weights[0]]))
