import numpy as np
from conslab import data, model, training, conservation, fitting

etas = np.logspace(-3.5, np.log10(0.08), 8)
widths = [8, 12, 16, 24, 32, 48, 64, 96, 128, 192]
for d in (10, 20, 40):
    ds = data.gen_gaussian_mixture(200, d, 5, 2.0, 42)
    row = []
    wstar = None
    for W in widths:
        drifts = []
        for eta in etas:
            cfg = training.TrainConfig(widths=[d, W, 5], activation=model.RELU, loss="mse",
                                       opt=training.OptimizerKind("gd", float(eta)), steps=400, seed=42)
            tr = training.train(cfg, ds)
            drifts.append(float(np.max(conservation.drift_report(tr).total_drift)))
        fit = fitting.fit_power_law(etas, np.array(drifts))
        row.append((W, round(fit.r2, 4), round(fit.loglog_curvature, 3)))
        if wstar is None and (fit.r2 < 0.95 or fit.loglog_curvature > 0.2):
            wstar = W
    print(f"d={d}: wstar={wstar} ratio={None if wstar is None else wstar/d}")
    print("  ", row)
