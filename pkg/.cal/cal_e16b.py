import numpy as np
from conslab import data, model, training
from conslab.theory import pearson_r

ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)
for eta, T in ((0.05, 250), (0.1, 250), (0.1, 1000)):
    cfg = training.TrainConfig(widths=[20, 64, 5], activation=model.RELU, loss="ce",
                               opt=training.OptimizerKind("gd", eta), steps=T, seed=42,
                               record_q=True, lambda_stride=10)
    tr = training.train(cfg, ds)
    steps = np.array([s.step for s in tr.snapshots])
    lams = np.array([s.lambda_max for s in tr.snapshots])
    jtj = np.array([s.jtj_lambda_max for s in tr.snapshots])
    mmean = np.array([np.mean(tr.q[min(s.step, T-1)] * (1 - tr.q[min(s.step, T-1)])) for s in tr.snapshots])
    print(f"eta={eta} T={T}: R(lam, mean q(1-q))={pearson_r(lams, mmean):.4f} "
          f"R(lam/jtj, mean q(1-q))={pearson_r(lams/jtj, mmean):.4f}")
