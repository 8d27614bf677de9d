import numpy as np
from conslab import data, model, training
from conslab.theory import pearson_r

ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)
for eta in (0.05, 0.1):
    cfg = training.TrainConfig(widths=[20, 64, 5], activation=model.RELU, loss="ce",
                               opt=training.OptimizerKind("gd", eta), steps=250, seed=42,
                               record_q=True, lambda_stride=10)
    tr = training.train(cfg, ds)
    lams = np.array([s.lambda_max for s in tr.snapshots])
    qm = np.array([s.q_margin for s in tr.snapshots])
    print(f"eta={eta}: R(lam, q_margin)={pearson_r(lams, qm):.4f}  lam0={lams[0]:.2f} lamT={lams[-1]:.2f} qm0={qm[0]:.3f} qmT={qm[-1]:.3f}")
