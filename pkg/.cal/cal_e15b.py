import numpy as np
from conslab import data, model, training, spectral, fitting

ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)
widths = [32, 64, 128, 256]

def run(W, eta, T, seed=42, stride=0):
    cfg = training.TrainConfig(widths=[20, W, 5], activation=model.RELU, loss="mse",
                               opt=training.OptimizerKind("gd", float(eta)), steps=T, seed=seed,
                               record_patterns=True, lambda_stride=stride)
    return training.train(cfg, ds)

for eta in (0.02, 0.04):
    rates = []
    for W in widths:
        rs = [spectral.switch_rate(run(W, eta, 500, seed=s))[0] for s in (42, 137, 256)]
        rates.append(float(np.mean(rs)))
    fit = fitting.fit_power_law(np.array(widths, float), np.array(rates))
    print(f"sub-EoS eta={eta}: rates={[f'{r:.3g}' for r in rates]} exp={fit.exponent_or_slope:.3f} r2={fit.r2:.3f}")

print("--- EoS ---")
for W in widths:
    p0 = model.init_kaiming_balanced([20, W, 5], 42)
    lam0 = spectral.lambda_max_hvp(p0, ds, model.RELU, "mse")
    eta = 2.0 / lam0
    tr = run(W, eta, 500, stride=10)
    dwell = spectral.eos_dwell_fraction(tr.snapshots, eta)
    r, _ = spectral.switch_rate(tr)
    print(f"W={W}: lam0={lam0:.2f} eta={eta:.4g} dwell={dwell:.2f} status={tr.status} rate={r:.5g}")
