import numpy as np
from conslab import data, model, training, conservation, fitting

ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)

def beta(etas, T, loss="mse"):
    dr = []
    for eta in etas:
        cfg = training.TrainConfig(widths=[20, 64, 5], activation=model.RELU, loss=loss,
                                   opt=training.OptimizerKind("adam", float(eta)), steps=T, seed=42)
        tr = training.train(cfg, ds)
        dr.append(float(np.max(conservation.drift_report(tr).total_drift)))
    f = fitting.fit_power_law(np.asarray(etas), np.array(dr))
    return f.exponent_or_slope, f.r2, dr

for lo, hi, T, loss in ((-4, -1.5, 400, "mse"), (-3.5, -1, 400, "mse"), (-3, -1, 1000, "mse"), (-3.5, -1.5, 1000, "ce")):
    etas = np.logspace(lo, hi, 7)
    b, r2, dr = beta(etas, T, loss)
    print(f"eta 1e{lo}..1e{hi} T={T} {loss}: beta={b:.3f} r2={r2:.3f} drifts={[f'{d:.2g}' for d in dr]}")
