import numpy as np
from conslab import data, model, training, spectral, fitting

ds = data.gen_gaussian_mixture(200, 20, 5, 2.0, 42)
widths = [32, 64, 128, 256]

def run(W, eta, T, seed):
    cfg = training.TrainConfig(widths=[20, W, 5], activation=model.RELU, loss="mse",
                               opt=training.OptimizerKind("gd", float(eta)), steps=T, seed=seed,
                               record_patterns=True)
    return training.train(cfg, ds)

for eta in (0.010, 0.014):
    rates = []
    for W in widths:
        rs = [spectral.switch_rate(run(W, eta, 800, s))[0] for s in (42, 137, 256, 512, 1024)]
        rates.append(float(np.mean(rs)))
    fit = fitting.fit_power_law(np.array(widths, float), np.array(rates))
    print(f"eta={eta}: rates={[f'{r:.3g}' for r in rates]} exp={fit.exponent_or_slope:.3f} r2={fit.r2:.3f}")
