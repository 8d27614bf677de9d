import numpy as np
from conslab import data, model, training, conservation, fitting

ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)
etas = np.logspace(-3.5, np.log10(0.08), 8)
widths = [16, 32, 64, 96, 128, 192]
betas, r2s = [], []
for W in widths:
    dr = []
    for eta in etas:
        cfg = training.TrainConfig(widths=[20, W, 5], activation=model.RELU, loss="mse",
                                   opt=training.OptimizerKind("gd", float(eta)), steps=400, seed=42)
        tr = training.train(cfg, ds)
        dr.append(float(np.max(conservation.drift_report(tr).total_drift)))
    f = fitting.fit_power_law(etas, np.array(dr))
    betas.append(f.exponent_or_slope)
    r2s.append(f.r2)
    print(f"W={W}: beta={f.exponent_or_slope:.3f} r2={f.r2:.4f}")
bw = np.array(betas) - 1
g = fitting.fit_power_law(np.array(widths, float), bw)
print(f"(beta-1) ~ W^{g.exponent_or_slope:.3f} r2={g.r2:.3f}")
