"""Ergotropy and total ergotropy of a few qutrit states with h = diag(0, 1, 2).

Run: python3 demos/ergotropy_basics.py
"""
import numpy as np

from workcap import Hamiltonian, find_beta_star, mean_energy, passive_decompose, total_ergotropy, von_neumann_entropy
from workcap.qops import ket, pure_state

h = Hamiltonian.from_eigenvalues([0.0, 1.0, 2.0])
states = {
    "ground": ket(3, 0),
    "top level": ket(3, 2),
    "diag(0.1, 0.2, 0.7)": np.diag([0.1, 0.2, 0.7]),
    "diag(0.5, 0.5, 0)": np.diag([0.5, 0.5, 0.0]),
    "(|0> + |2>)/sqrt2": pure_state([1, 0, 1]),
}

print(f"{'state':22s} {'energy':>8s} {'erg':>8s} {'erg_tot':>8s} {'beta*':>8s}")
for name, rho in states.items():
    s = von_neumann_entropy(rho)
    print(f"{name:22s} {mean_energy(rho, h):8.4f} {passive_decompose(rho, h).ergotropy:8.4f} "
          f"{total_ergotropy(rho, h):8.4f} {find_beta_star(h, s).beta:8.4f}")

# mixed states can hold more total ergotropy than ergotropy; pure states cannot
