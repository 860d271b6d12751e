# %% Single-qubit estimation from three copies
import numpy as np

from collective_lab import estimation as est

b = est.bounds()
print(b)

# %% theta sweep
cfg = est.EstimationConfig(trials_per_rep=20000, repetitions=10)
for row in est.sweep_theta(cfg):
    print(f"{row['theta']:.4f}  {row['f_analytic']:.6f}  {row['f_mc']:.6f} +- {row['stderr']:.1e}")

# %% icosahedron average
res = est.icosahedron_average(cfg)
print(f"aggregate {res.mean:.6f} +- {res.stderr:.1e}")
print("SE above biseparable bound:", round(res.separation(), 1))

# %% noise: fidelity of the walk POVM vs coin error
for sigma in (0.0, 0.02, 0.04):
    mean, se = est.noisy_reference_fidelity(sigma, n_seeds=20)
    noisy = est.icosahedron_average(est.EstimationConfig(20000, 10, noise_sigma=sigma))
    print(f"sigma {sigma:.2f}: POVM fidelity {mean:.5f}, estimation {noisy.mean:.5f}")
print("local bound", np.round(b.local, 6))
