"""Reconstruction fidelity of a Bell state versus shot number and detector efficiency."""
import numpy as np

from thzent import fidelity_study
from thzent.tomography import wall_clock_estimate

phi = np.array([0, 1, -1, 0]) / np.sqrt(2)
rho = np.outer(phi, phi).astype(complex)
n_shot = [100, 1_000, 10_000, 100_000]
eta_e = [0.01, 0.5, 0.9, 1.0]
fm = fidelity_study(rho, n_shot, eta_e, eta_g=0.99, n_ave=20, seed=1)

print("n_shot \\ eta_e " + "".join(f"{e:>9}" for e in eta_e))
for i, n in enumerate(n_shot):
    print(f"{n:>14} " + "".join(f"{fm.mean[i, j]:9.4f}" for j in range(len(eta_e))))
print("singular columns:", [e for j, e in enumerate(eta_e) if fm.singular[0, j]])
per, tot = wall_clock_estimate(1_000_000, 0.03979)
print(f"acquisition at 1e6 shots: {per:.3f} s per setting, {tot:.3f} s for all nine")
