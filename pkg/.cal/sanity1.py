import numpy as np, time
from conslab import data, model, training, conservation, theory, spectral

ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)
print("balance:", np.bincount(ds.labels))
spec = data.data_cov_spectrum(ds)
print("lam_x range:", spec.eigenvalues[0], spec.eigenvalues[-1], "trace id:",
      spec.eigenvalues.sum() - np.sum(ds.x**2)/ds.n)

# finite-diff gradient check
act = model.RELU
p = model.init_kaiming_balanced([20, 8, 5], 1)
cache = model.forward(p, ds.x, act)
loss0, dl = training.loss_and_dlogits(cache.logits, ds, training.MSE)
g = model.backward(p, cache, dl, act)
eps = 1e-5
errs = []
rng = np.random.default_rng(0)
for l in range(2):
    for _ in range(5):
        i = rng.integers(p.weights[l].shape[0]); j = rng.integers(p.weights[l].shape[1])
        p.weights[l][i, j] += eps
        lp, _ = training.loss_and_dlogits(model.forward(p, ds.x, act).logits, ds, training.MSE)
        p.weights[l][i, j] -= 2*eps
        lm, _ = training.loss_and_dlogits(model.forward(p, ds.x, act).logits, ds, training.MSE)
        p.weights[l][i, j] += eps
        fd = (lp - lm) / (2*eps)
        errs.append(abs(fd - g.weights[l][i, j]) / (abs(fd)+1e-12))
print("max fd rel err:", max(errs))

# trace equality
tr = model.trace_pairing(p, g)
print("traces:", tr, "rel spread:", (tr.max()-tr.min())/abs(tr).max())

# drift identity on a GD run
t0=time.time()
cfg = training.TrainConfig(widths=[20, 64, 5], activation=model.RELU, loss=training.MSE,
                           opt=training.OptimizerKind("gd", 0.01), steps=200, seed=42)
trace = training.train(cfg, ds)
rep = conservation.drift_report(trace)
print("train 200 steps:", time.time()-t0, "s; status", trace.status)
print("identity residual max:", rep.identity_residual, "total drift:", rep.total_drift)
print("th2: eta^2|G| vs drift:", 0.01**2*np.abs(rep.imbalance), rep.total_drift)
