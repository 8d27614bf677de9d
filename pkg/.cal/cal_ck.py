import numpy as np
from conslab import data, model, training, theory

ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)
spec = data.data_cov_spectrum(ds)

def ck_test(W, act, eta, T, seed):
    cfg = training.TrainConfig(widths=[20,W,5], activation=act, loss=training.MSE,
                               opt=training.OptimizerKind("gd", float(eta)), steps=T, seed=seed,
                               mode_basis=spec.basis)
    tr = training.train(cfg, ds)
    if tr.status != "ok":
        return None, tr.status
    emp = theory.empirical_ck(tr, spec, ds)
    e0 = theory.initial_mode_errors(tr.params0, ds, act, spec)
    pred = theory.predict_ck(e0, spec.eigenvalues)
    return theory.pearson_r(pred, emp), "ok"

print("LINEAR (E20-style):")
for W in (16, 64):
    for eta in (0.003, 0.01, 0.03):
        for seed in (42, 137):
            r, st = ck_test(W, model.LINEAR, eta, 1000, seed)
            print(f"  W={W} eta={eta} seed={seed}: R={r if r is None else round(r,3)} {st}")
print("RELU (E21-style):")
for W in (64,):
    for eta in (0.003, 0.01, 0.03, 0.06):
        for seed in (42, 137):
            r, st = ck_test(W, model.RELU, eta, 1000, seed)
            print(f"  W={W} eta={eta} seed={seed}: R={r if r is None else round(r,3)} {st}")
