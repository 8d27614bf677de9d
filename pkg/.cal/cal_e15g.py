import numpy as np
from conslab import data, model, training, spectral, fitting

ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)

def run(W, eta, T, seed=42, stride=0):
    cfg = training.TrainConfig(widths=[20, W, 5], activation=model.RELU, loss="mse",
                               opt=training.OptimizerKind("gd", float(eta)), steps=T, seed=seed,
                               record_patterns=True, lambda_stride=stride)
    return training.train(cfg, ds)

widths = [32, 64, 128, 256]
print("--- at max stable eta (just below divergence), unit fraction, T=1000 tail ---")
lam0s = {}
fracs = []
for W in widths:
    p0 = model.init_kaiming_balanced([20, W, 5], 42)
    lam0s[W] = spectral.lambda_max_hvp(p0, ds, model.RELU, "mse")
    base = 2.0 / lam0s[W]
    lo_m, hi_m = 1.0, 3.0
    # bisection on stability
    for _ in range(8):
        mid = 0.5 * (lo_m + hi_m)
        tr = run(W, mid * base, 400)
        if tr.status == "ok":
            lo_m = mid
        else:
            hi_m = mid
    tr = run(W, lo_m * base, 1000)
    uf = spectral.unit_switch_fraction(tr, start=500)
    pr, _ = spectral.switch_rate(tr, start=500)
    fracs.append(uf)
    print(f"W={W}: m={lo_m:.3f} eta={lo_m*base:.4g} status={tr.status} unit_frac={uf:.4g} triple_rate={pr:.4g}")
print("max/min unit_frac:", max(fracs)/min(fracs))

print("--- sub-EoS eta=0.012 unit fraction ---")
subs = []
for W in widths:
    ufs = [spectral.unit_switch_fraction(run(W, 0.012, 800, seed=s)) for s in (42, 137, 256)]
    subs.append(float(np.mean(ufs)))
    print(f"W={W}: unit_frac={subs[-1]:.4g}")
fit = fitting.fit_power_law(np.array(widths, float), np.array(subs))
print(f"unit-frac exponent={fit.exponent_or_slope:.3f} r2={fit.r2:.3f}")
