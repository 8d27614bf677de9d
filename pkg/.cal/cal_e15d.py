import numpy as np
from conslab import data, model, training, spectral, fitting

ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)
widths = [32, 64, 128, 256]

def run(W, eta, T, seed=42, stride=0):
    cfg = training.TrainConfig(widths=[20, W, 5], activation=model.RELU, loss="mse",
                               opt=training.OptimizerKind("gd", float(eta)), steps=T, seed=seed,
                               record_patterns=True, lambda_stride=stride)
    return training.train(cfg, ds)

print("--- sub-EoS fixed eta=0.012, T=800, 5 seeds ---")
rates = []
for W in widths:
    rs = [spectral.switch_rate(run(W, 0.012, 800, seed=s))[0] for s in (42, 137, 256, 512, 1024)]
    rates.append(float(np.mean(rs)))
    print(f"W={W}: rate={rates[-1]:.4g} per-seed={[f'{r:.3g}' for r in rs]}")
fit = fitting.fit_power_law(np.array(widths, float), np.array(rates))
print(f"exp={fit.exponent_or_slope:.3f} r2={fit.r2:.3f}")

print("--- EoS m-scan, dwell over full run and last half ---")
lam0s = {}
for W in widths:
    p0 = model.init_kaiming_balanced([20, W, 5], 42)
    lam0s[W] = spectral.lambda_max_hvp(p0, ds, model.RELU, "mse")
    base = 2.0 / lam0s[W]
    for m in (1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5):
        eta = m * base
        tr = run(W, eta, 500, stride=10)
        snaps = tr.snapshots
        d_all = spectral.eos_dwell_fraction(snaps, eta)
        d_half = spectral.eos_dwell_fraction(snaps[len(snaps)//2:], eta)
        r, _ = spectral.switch_rate(tr)
        print(f"W={W} m={m}: status={tr.status} dwell={d_all:.2f}/{d_half:.2f} rate={r:.5g}")
        if tr.status != "ok":
            break
