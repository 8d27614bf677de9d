import numpy as np
from conslab import data, model, training, spectral, fitting

ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)
widths = [32, 64, 128, 256]

def run(W, eta, T, seed=42, stride=0):
    cfg = training.TrainConfig(widths=[20, W, 5], activation=model.RELU, loss="mse",
                               opt=training.OptimizerKind("gd", float(eta)), steps=T, seed=seed,
                               record_patterns=True, lambda_stride=stride)
    return training.train(cfg, ds)

lam0s = {}
for W in widths:
    p0 = model.init_kaiming_balanced([20, W, 5], 42)
    lam0s[W] = spectral.lambda_max_hvp(p0, ds, model.RELU, "mse")

print("--- sub-EoS at eta = 0.25 * 2/lam0 ---")
rates = []
for W in widths:
    eta = 0.25 * 2.0 / lam0s[W]
    rs = [spectral.switch_rate(run(W, eta, 500, seed=s))[0] for s in (42, 137, 256)]
    rates.append(float(np.mean(rs)))
    print(f"W={W}: eta={eta:.4g} rate={rates[-1]:.4g}")
fit = fitting.fit_power_law(np.array(widths, float), np.array(rates))
print(f"exp={fit.exponent_or_slope:.3f} r2={fit.r2:.3f}")

print("--- EoS dwell scan ---")
for W in widths:
    base = 2.0 / lam0s[W]
    for m in (1.0, 1.5, 2.0, 3.0, 4.5, 7.0):
        tr = run(W, m * base, 500, stride=10)
        dwell = spectral.eos_dwell_fraction(tr.snapshots, m * base)
        r, _ = spectral.switch_rate(tr)
        print(f"W={W} m={m}: dwell={dwell:.2f} status={tr.status} rate={r:.5g}")
        if dwell >= 0.2:
            break
