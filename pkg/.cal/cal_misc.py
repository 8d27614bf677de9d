import time
import numpy as np
from conslab import data, model, training, conservation, fitting

ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)

t0 = time.time()
p0 = model.init_kaiming_balanced([20, 32, 5], 42)
flow = training.integrate_flow(p0, ds, model.RELU, "mse", duration=1.0, step_size=1e-4)
rel = np.max(np.abs(flow.cons - flow.cons[0]) / (1.0 + np.abs(flow.cons[0])))
print(f"E1 flow: max rel drift={rel:.3g} time={time.time()-t0:.1f}s")

# E4: EoS vs eta/100 drift ratio
def drift_at(eta, T=400):
    cfg = training.TrainConfig(widths=[20, 64, 5], activation=model.RELU, loss="mse",
                               opt=training.OptimizerKind("gd", float(eta)), steps=T, seed=42)
    tr = training.train(cfg, ds)
    return float(np.max(conservation.drift_report(tr).total_drift)), tr.status
hi, st1 = drift_at(0.13)
lo, st2 = drift_at(0.0013)
print(f"E4: drift(EoS)={hi:.3g}({st1}) drift(EoS/100)={lo:.3g}({st2}) ratio={hi/lo:.1f}")

# E7: Adam drift exponent
etas = np.logspace(-4, -2.2, 7)
drifts = []
for eta in etas:
    cfg = training.TrainConfig(widths=[20, 64, 5], activation=model.RELU, loss="mse",
                               opt=training.OptimizerKind("adam", float(eta)), steps=400, seed=42)
    tr = training.train(cfg, ds)
    drifts.append(float(np.max(conservation.drift_report(tr).total_drift)))
fit = fitting.fit_power_law(etas, np.array(drifts))
print(f"E7 adam: beta={fit.exponent_or_slope:.3f} r2={fit.r2:.3f}")

# E6: depth sweep
etas6 = np.logspace(-3.5, np.log10(0.05), 7)
for depth in (2, 4, 6, 8):
    widths = [20] + [32] * (depth - 1) + [5]
    ds6 = ds
    dr = []
    for eta in etas6:
        cfg = training.TrainConfig(widths=widths, activation=model.RELU, loss="mse",
                                   opt=training.OptimizerKind("gd", float(eta)), steps=400, seed=42)
        tr = training.train(cfg, ds6)
        dr.append(float(np.max(conservation.drift_report(tr).total_drift)))
    fit = fitting.fit_power_law(etas6, np.array(dr))
    print(f"E6 depth={depth}: beta={fit.exponent_or_slope:.3f} r2={fit.r2:.3f}")
