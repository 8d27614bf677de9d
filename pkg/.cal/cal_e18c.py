import numpy as np
from conslab import data, model, training, spectral

def comp(n, eta, T=2000, stride=25, seed=42, W=64, sep=2.0):
    ds = data.gen_gaussian_mixture(n, 20, 5, sep, seed)
    cfg = training.TrainConfig(widths=[20,W,5], activation=model.RELU, loss=training.CE,
                               opt=training.OptimizerKind("gd", float(eta)), steps=T, seed=seed)
    prof = spectral.track_compression(cfg, ds, stride)
    steps, lams = prof.series()
    q = prof.trace.q[prof.trace.steps_run-1]
    print(f"W={W} n={n} eta={eta} sep={sep}: ratio={lams[-1]/lams[0]:.4f} tau={prof.tau and round(prof.tau,1)} "
          f"r2={prof.fit_r2 and round(prof.fit_r2,3)} qmin={q.min():.3f}")
    return prof.tau

for sep in (2.0, 3.0):
    for W in (128, 256):
        taus=[comp(n, 0.2, W=W, sep=sep) for n in (100,200,400)]
        print("  spread:", round(max(taus)/min(taus),2))
