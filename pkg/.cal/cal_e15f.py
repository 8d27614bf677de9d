import numpy as np
from conslab import data, model, training, spectral

ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)

def run(W, eta, T, seed=42, stride=10):
    cfg = training.TrainConfig(widths=[20, W, 5], activation=model.RELU, loss="mse",
                               opt=training.OptimizerKind("gd", float(eta)), steps=T, seed=seed,
                               record_patterns=True, lambda_stride=stride)
    return training.train(cfg, ds)

def tail_stats(tr, eta):
    snaps = tr.snapshots
    tail = snaps[len(snaps)//2:]
    le = np.array([s.lambda_max for s in tail]) * eta
    T = tr.steps_run
    h = T // 2
    flips = float(tr.switch_counts[h:T].sum())
    rate = flips / ((T - h) * tr.n_samples * tr.hidden_units)
    return float(le.mean()), float(le.min()), float(le.max()), rate

lam0s = {}
grids = {32: (1.6, 1.8, 1.9, 2.0, 2.05, 2.1, 2.15),
         64: (1.6, 1.8, 1.9, 1.95, 2.0, 2.05),
         128: (1.05, 1.2, 1.4, 1.6, 1.8, 1.95),
         256: (1.05, 1.2, 1.4, 1.6, 1.8, 1.95)}
for W in (32, 64, 128, 256):
    p0 = model.init_kaiming_balanced([20, W, 5], 42)
    lam0s[W] = spectral.lambda_max_hvp(p0, ds, model.RELU, "mse")
    base = 2.0 / lam0s[W]
    for m in grids[W]:
        eta = m * base
        tr = run(W, eta, 1000)
        if tr.status != "ok":
            print(f"W={W} m={m}: diverged")
            continue
        mu, lo, hi, rate = tail_stats(tr, eta)
        print(f"W={W} m={m}: tail lam*eta mean={mu:.2f} [{lo:.2f},{hi:.2f}] rate={rate:.5g}")
