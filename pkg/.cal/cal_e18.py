import numpy as np, time
from conslab import data, model, training, spectral

def comp(n, eta, T=2000, stride=25, seed=42, W=64):
    ds = data.gen_gaussian_mixture(n, 20, 5, 2.0, seed)
    cfg = training.TrainConfig(widths=[20,W,5], activation=model.RELU, loss=training.CE,
                               opt=training.OptimizerKind("gd", float(eta)), steps=T, seed=seed)
    t0=time.time()
    prof = spectral.track_compression(cfg, ds, stride)
    steps, lams = prof.series()
    q = prof.trace.q[prof.trace.steps_run-1]
    print(f"n={n} eta={eta}: lam0={lams[0]:.3f} lam_end={lams[-1]:.4f} ratio={lams[-1]/lams[0]:.4f} "
          f"tau={prof.tau and round(prof.tau,1)} r2={prof.fit_r2 and round(prof.fit_r2,3)} "
          f"qmin={q.min():.3f} status={prof.trace.status} t={time.time()-t0:.1f}s")
    return prof

for eta in (0.05, 0.1, 0.2):
    comp(200, eta)
print("n-sweep at eta=0.1:")
for n in (100, 200, 400):
    comp(n, 0.1)
