import numpy as np, time
from conslab import data, model, training, conservation, fitting

ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)
for T in (500, 1000, 2000):
    for seed in (42, 137):
        etas = np.logspace(np.log10(1e-4), np.log10(0.3), 12)
        drifts = []
        for eta in etas:
            cfg = training.TrainConfig(widths=[20,64,5], activation=model.RELU, loss=training.MSE,
                                       opt=training.OptimizerKind("gd", float(eta)), steps=T, seed=seed)
            tr = training.train(cfg, ds)
            d = abs(tr.cons[tr.steps_run] - tr.cons[0])[0]
            drifts.append((eta, d, tr.status))
        ok = [(e,d) for e,d,s in drifts if s=="ok" and d>0]
        xs, ys = zip(*ok)
        fit = fitting.fit_power_law(xs, ys)
        print(f"T={T} seed={seed}: npts={len(ok)} beta={fit.exponent_or_slope:.3f} r2={fit.r2:.4f} curv={fit.loglog_curvature:.3f} diverged={[f'{e:.3g}' for e,d,s in drifts if s!='ok']}")
