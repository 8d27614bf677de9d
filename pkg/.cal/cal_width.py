import sys
import numpy as np
from conslab import data, model, training, conservation, fitting

loss_kinds = sys.argv[1].split(",") if len(sys.argv) > 1 else ["mse", "ce"]
widths = [int(w) for w in sys.argv[2].split(",")] if len(sys.argv) > 2 else [16, 64, 192]
hi = float(sys.argv[3]) if len(sys.argv) > 3 else 0.08
T = int(sys.argv[4]) if len(sys.argv) > 4 else 400
etas = np.logspace(-3.5, np.log10(hi), 8)
ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)
for loss in loss_kinds:
    betas = []
    for W in widths:
        drifts = []
        for eta in etas:
            cfg = training.TrainConfig(widths=[20, W, 5], activation=model.RELU, loss=loss,
                                       opt=training.OptimizerKind("gd", float(eta)), steps=T, seed=42)
            tr = training.train(cfg, ds)
            rep = conservation.drift_report(tr)
            drifts.append(float(np.max(rep.total_drift)))
        fit = fitting.fit_power_law(etas, np.array(drifts))
        betas.append(fit.exponent_or_slope)
        print(f"{loss} W={W}: beta={fit.exponent_or_slope:.3f} r2={fit.r2:.4f} curv={fit.loglog_curvature:.3f}")
    if loss == "mse" and len(widths) >= 3:
        bw = np.array(betas) - 1.0
        if np.all(bw > 0):
            g = fitting.fit_power_law(np.array(widths, float), bw)
            print(f"  (beta-1) ~ W^{g.exponent_or_slope:.3f} r2={g.r2:.3f}")
