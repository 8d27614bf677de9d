import numpy as np
from conslab import data, model, training, spectral, fitting

etas = [0.004, 0.008, 0.016, 0.032, 0.064]
taus = []
for eta in etas:
    T = int(max(600, 14*1.2/eta))
    ds = data.gen_gaussian_mixture(200, 20, 5, 8.0, 42)
    cfg = training.TrainConfig(widths=[20,64,5], activation=model.RELU, loss=training.CE,
                               opt=training.OptimizerKind("gd", float(eta)), steps=T, seed=42)
    stride = max(1, T//400)
    prof = spectral.track_compression(cfg, ds, stride)
    print(f"eta={eta}: T={T} stride={stride} tau={prof.tau and round(prof.tau,1)} r2={prof.fit_r2 and round(prof.fit_r2,3)}")
    taus.append(prof.tau)
fit = fitting.fit_linear(1.0/np.array(etas), np.array(taus))
print(f"tau = {fit.exponent_or_slope:.3f}/eta + {fit.intercept:.1f}, R2={fit.r2:.4f}")
