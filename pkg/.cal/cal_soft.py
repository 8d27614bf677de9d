import numpy as np
from conslab import data, model, training, conservation, spectral, fitting

ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)
etas = np.logspace(-3.5, np.log10(0.08), 8)

def beta(widths, act, loss, etas, T=400, seed=42, opt="gd"):
    dr = []
    for eta in etas:
        cfg = training.TrainConfig(widths=widths, activation=act, loss=loss,
                                   opt=training.OptimizerKind(opt, float(eta)), steps=T, seed=seed)
        tr = training.train(cfg, ds)
        dr.append(float(np.max(conservation.drift_report(tr).total_drift)))
    f = fitting.fit_power_law(np.asarray(etas), np.array(dr))
    return f.exponent_or_slope, f.r2

# E2: bias breaks the per-step identity
cfg = training.TrainConfig(widths=[20, 32, 5], activation=model.RELU, loss="mse",
                           opt=training.OptimizerKind("gd", 0.02), steps=200, seed=42, bias=True)
tr = training.train(cfg, ds)
rep = conservation.drift_report(tr)
print(f"E2: identity_applicable={rep.identity_applicable} residual={np.max(rep.identity_residual):.3g}")

# E9: ReLU switch rate at a mid-grid eta
cfg = training.TrainConfig(widths=[20, 16, 5], activation=model.RELU, loss="mse",
                           opt=training.OptimizerKind("gd", 0.05), steps=400, seed=42,
                           record_patterns=True)
tr = training.train(cfg, ds)
r, _ = spectral.switch_rate(tr)
print(f"E9: relu per-neuron switch rate={r:.4g}")

# E10/E11: leaky-slope interpolation
bs = []
for a in (0.0, 0.25, 0.5, 0.75, 1.0):
    b, r2 = beta([20, 16, 5], model.leaky(a), "mse", etas)
    bs.append(b)
    print(f"E10/E11 slope={a}: beta={b:.3f} r2={r2:.3f}")
print("max jump:", max(abs(bs[i+1]-bs[i]) for i in range(4)))

# E12: 2x2x2 factorial loss x width x depth
etas12 = np.logspace(-3.5, np.log10(0.03), 6)
cells = {}
for loss in ("mse", "ce"):
    for W in (16, 64):
        for depth in (2, 4):
            widths = [20] + [W] * (depth - 1) + [5]
            b, r2 = beta(widths, model.RELU, loss, etas12)
            cells[(loss, W, depth)] = b
            print(f"E12 {loss} W={W} L={depth}: beta={b:.3f} r2={r2:.3f}")
code = {"mse": -1, "ce": 1, 16: -1, 64: 1, 2: -1, 4: 1}
inter = sum(code[l] * code[w] * code[d] * b for (l, w, d), b in cells.items()) / 8
print(f"E12 three-factor interaction={inter:.4f}")

# E16: correlation of measured CE lambda_max with bound rhs over first 250 steps
cfg = training.TrainConfig(widths=[20, 64, 5], activation=model.RELU, loss="ce",
                           opt=training.OptimizerKind("gd", 0.1), steps=250, seed=42,
                           record_q=True, lambda_stride=10)
tr = training.train(cfg, ds)
lams = np.array([s.lambda_max for s in tr.snapshots])
rhs = np.array([s.jtj_lambda_max * s.q_margin for s in tr.snapshots])
from conslab.theory import pearson_r
print(f"E16: snapshots={len(lams)} R(measured, bound)={pearson_r(lams, rhs):.4f}")
