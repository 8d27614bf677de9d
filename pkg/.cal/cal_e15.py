import numpy as np
from conslab import data, model, training, spectral, fitting

ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)
widths = [32, 64, 128, 256]

def run(W, eta, T, stride=None):
    cfg = training.TrainConfig(widths=[20, W, 5], activation=model.RELU, loss="mse",
                               opt=training.OptimizerKind("gd", float(eta)), steps=T, seed=42,
                               record_patterns=True, lambda_stride=stride or 0)
    return training.train(cfg, ds)

print("--- sub-EoS, eta=0.01, T=300 ---")
rates = []
for W in widths:
    tr = run(W, 0.01, 300)
    r, _ = spectral.switch_rate(tr)
    rates.append(r)
    print(f"W={W}: per-neuron rate={r:.5g}")
fit = fitting.fit_power_law(np.array(widths, float), np.array(rates))
print(f"exponent={fit.exponent_or_slope:.3f} r2={fit.r2:.3f}")

print("--- EoS search ---")
from conslab.model import RELU, init_kaiming_balanced
from conslab.numerics import make_rng
for W in widths:
    p0 = init_kaiming_balanced([20, W, 5], make_rng(42, 0))
    lam0 = spectral.lambda_max_hvp(p0, ds, RELU, "mse")
    eta = 2.0 / lam0
    tr = run(W, eta, 500, stride=10)
    dwell = spectral.eos_dwell_fraction(tr.snapshots, eta)
    r, _ = spectral.switch_rate(tr)
    print(f"W={W}: lam0={lam0:.2f} eta={eta:.4g} dwell={dwell:.2f} status={tr.status} rate={r:.5g}")
