import numpy as np
from conslab import data, model, training, fitting

ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)
for W in (16, 32, 64):
    for top in (0.1, 0.2, 0.3):
        betas, r2s = [], []
        for seed in (42, 137, 256, 512, 1024):
            etas = np.logspace(-4, np.log10(top), 12)
            xs, ys = [], []
            for eta in etas:
                cfg = training.TrainConfig(widths=[20,W,5], activation=model.RELU, loss=training.MSE,
                                           opt=training.OptimizerKind("gd", float(eta)), steps=1000, seed=seed)
                tr = training.train(cfg, ds)
                if tr.status == "ok":
                    d = abs(tr.cons[tr.steps_run]-tr.cons[0])[0]
                    if d > 0: xs.append(eta); ys.append(d)
            fit = fitting.fit_power_law(xs, ys)
            betas.append(fit.exponent_or_slope); r2s.append(fit.r2)
        print(f"W={W} top={top}: beta mean={np.mean(betas):.3f} range=({min(betas):.3f},{max(betas):.3f}) r2 min={min(r2s):.4f}")
