import numpy as np
from conslab import data, model, training
from conslab.theory import pearson_r

for sep, eta, T in ((8.0, 0.05, 250), (8.0, 0.1, 250)):
    ds = data.gen_gaussian_mixture(200, 20, 5, sep, 42)
    cfg = training.TrainConfig(widths=[20, 64, 5], activation=model.RELU, loss="ce",
                               opt=training.OptimizerKind("gd", eta), steps=T, seed=42,
                               record_q=True, lambda_stride=5)
    tr = training.train(cfg, ds)
    lams = np.array([s.lambda_max for s in tr.snapshots])
    jtj = np.array([s.jtj_lambda_max for s in tr.snapshots])
    mmean = np.array([np.mean(tr.q[min(s.step, T-1)] * (1 - tr.q[min(s.step, T-1)])) for s in tr.snapshots])
    print(f"sep={sep} eta={eta}: R(lam, mean q(1-q))={pearson_r(lams, mmean):.4f} "
          f"R(lam/jtj, ...)={pearson_r(lams/jtj, mmean):.4f}")
