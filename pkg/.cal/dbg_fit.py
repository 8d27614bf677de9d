import numpy as np
from conslab import data, model, training, conservation, fitting
etas = np.logspace(-3.5, np.log10(0.08), 8)
ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)
drifts = []
for eta in etas:
    cfg = training.TrainConfig(widths=[20, 16, 5], activation=model.RELU, loss="mse",
                               opt=training.OptimizerKind("gd", float(eta)), steps=400, seed=42)
    tr = training.train(cfg, ds)
    drifts.append(conservation.drift_report(tr).total_drift)
drifts = np.array(drifts)
print(drifts)
fit = fitting.fit_power_law(etas, drifts)
print(fit)
lx, ly = np.log(etas), np.log(drifts)
slope, intercept = np.polyfit(lx, ly, 1)
pred = slope*lx + intercept
print("rss", np.sum((ly-pred)**2), "tss", np.sum((ly-ly.mean())**2))
