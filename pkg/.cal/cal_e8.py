import numpy as np
from conslab import data, model, training, theory, conservation

ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)
spec = data.data_cov_spectrum(ds)

def e8(act, name, W=16, T=1000, seed=42, etas=None):
    if etas is None:
        etas = np.logspace(-3, np.log10(0.05), 8)
    traces = {}
    for eta in etas:
        cfg = training.TrainConfig(widths=[20,W,5], activation=act, loss=training.MSE,
                                   opt=training.OptimizerKind("gd", float(eta)), steps=T, seed=seed,
                                   mode_basis=spec.basis)
        traces[eta] = training.train(cfg, ds)
    ref_eta = etas[len(etas)//2]
    tr = traces[ref_eta]
    emp_raw = theory.empirical_ck(tr, spec, ds, normalize=False)
    e0 = theory.initial_mode_errors(tr.params0, ds, act, spec)
    pred = theory.predict_ck(e0, spec.eigenvalues)
    alpha = float(np.dot(pred, emp_raw) / np.dot(pred, pred))
    lam = theory.calibrated_mode_spectrum(tr.params0, ds, act, spec)
    errs = []
    for eta in etas:
        t = traces[eta]
        if t.status != "ok": continue
        G_m = abs(conservation.imbalance_sum(t)[0])
        m = theory.SpectralModel(lam, alpha*pred, float(eta), T)
        G_f = theory.predict_imbalance(m)
        err = abs(G_f-G_m)/G_m
        errs.append(err)
        print(f"  {name} eta={eta:.4g}: G_m={G_m:.4g} G_f={G_f:.4g} err={err:.2%}")
    print(f"  -> max err {max(errs):.2%}")

e8(model.LINEAR, "linear")
e8(model.RELU, "relu")
