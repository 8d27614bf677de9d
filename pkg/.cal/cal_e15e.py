import numpy as np
from conslab import data, model, training, spectral, fitting

ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)

def run(W, eta, T, seed=42, stride=10):
    cfg = training.TrainConfig(widths=[20, W, 5], activation=model.RELU, loss="mse",
                               opt=training.OptimizerKind("gd", float(eta)), steps=T, seed=seed,
                               record_patterns=True, lambda_stride=stride)
    return training.train(cfg, ds)

def tail_rate(tr):
    T = tr.steps_run
    h = T // 2
    flips = float(tr.switch_counts[h:T].sum())
    return flips / ((T - h) * tr.n_samples * tr.hidden_units)

print("--- sub-EoS fixed eta=0.008, T=1000, 5 seeds ---")
rates = []
widths = [32, 64, 128, 256]
for W in widths:
    rs = [spectral.switch_rate(run(W, 0.008, 1000, seed=s, stride=0))[0] for s in (42, 137, 256, 512, 1024)]
    rates.append(float(np.mean(rs)))
    print(f"W={W}: rate={rates[-1]:.4g}")
fit = fitting.fit_power_law(np.array(widths, float), np.array(rates))
print(f"exp={fit.exponent_or_slope:.3f} r2={fit.r2:.3f}")

print("--- EoS fine scan, T=1000, tail metrics ---")
lam0s = {}
grids = {32: (2.2, 2.3, 2.4, 2.45), 64: (1.9, 2.0, 2.1, 2.15),
         128: (1.0, 1.9, 2.0, 2.1), 256: (1.0, 1.9, 2.0, 2.1)}
for W in widths:
    p0 = model.init_kaiming_balanced([20, W, 5], 42)
    lam0s[W] = spectral.lambda_max_hvp(p0, ds, model.RELU, "mse")
    base = 2.0 / lam0s[W]
    for m in grids[W]:
        eta = m * base
        tr = run(W, eta, 1000)
        snaps = tr.snapshots
        d_half = spectral.eos_dwell_fraction(snaps[len(snaps)//2:], eta)
        print(f"W={W} m={m}: status={tr.status} dwell_tail={d_half:.2f} tail_rate={tail_rate(tr):.5g}")
        if tr.status != "ok":
            break
