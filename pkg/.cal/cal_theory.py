import numpy as np
from conslab import data, model, training, fitting, conservation, theory, spectral

ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)
spec = data.data_cov_spectrum(ds)

def run(W, act, loss, eta, T, seed, mode_basis=None):
    cfg = training.TrainConfig(widths=[20,W,5], activation=act, loss=loss,
                               opt=training.OptimizerKind("gd", float(eta)), steps=T, seed=seed,
                               mode_basis=mode_basis)
    return training.train(cfg, ds)

# linear vs relu beta at matched config
for act, name in ((model.LINEAR,"linear"), (model.RELU,"relu")):
    xs, ys = [], []
    for eta in np.logspace(-4, np.log10(0.2), 12):
        tr = run(16, act, training.MSE, eta, 1000, 42)
        if tr.status=="ok":
            d = abs(tr.cons[tr.steps_run]-tr.cons[0])[0]
            if d>0: xs.append(eta); ys.append(d)
    f = fitting.fit_power_law(xs, ys)
    print(f"{name}: beta={f.exponent_or_slope:.3f} r2={f.r2:.4f} n={len(xs)}")

# effective spectrum: linear closed form vs GN
p0 = model.init_kaiming_balanced([20,64,5], 42)
lam_formula = theory.mode_spectrum(p0, spec, model.LINEAR)
import conslab.numerics as nx
H = spectral.gauss_newton(p0, ds, model.LINEAR, training.MSE)
gn = nx.sym_eig(H).eigenvalues
print("formula lam (sorted desc):", np.sort(lam_formula)[::-1][:6])
print("GN top eigenvalues:", gn[:8])
print("GN top-20:", gn[:20])
# ReLU comparison
lam_relu = theory.mode_spectrum(p0, spec, model.RELU)
H2 = spectral.gauss_newton(p0, ds, model.RELU, training.MSE)
gn2 = nx.sym_eig(H2).eigenvalues
print("relu formula top:", np.sort(lam_relu)[::-1][:4], "GN relu top:", gn2[:4])
