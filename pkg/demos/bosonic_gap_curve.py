"""Two-mode capacitance gap of the thermal attenuator versus inverse temperature.

The series result is compared with a truncated Fock-space calculation at a
few temperatures, then the gap curve is tabulated.

Run: python3 demos/bosonic_gap_curve.py
"""
import numpy as np

from workcap import AttenuatorParams, beta_eff, two_mode_gap
from workcap.bosonic import gap_row, truncated_fock_energies

for lam, n in ((0.5, 1.0), (0.8, 0.2)):
    print(f"attenuator lam={lam}, N={n}: beta = {beta_eff(AttenuatorParams(lam, n)):.4f}")

print("\nseries vs truncated Fock (n_A + n_B <= 60)")
for beta in (0.5, 1.0, 2.0):
    e_pass, e_cpass = truncated_fock_energies(beta)
    print(f"beta={beta}: series gap {two_mode_gap(beta):.12f}, Fock gap {e_pass - e_cpass:.12f}")

print(f"\n{'beta':>6s} {'beta*':>8s} {'E_pass':>10s} {'E_cpass':>10s} {'gap':>10s}")
for beta in np.linspace(0.25, 6.0, 24):
    r = gap_row(float(beta))
    print(f"{r['beta']:6.3f} {r['beta_star']:8.4f} {r['e_pass']:10.6f} {r['e_cpass']:10.6f} {r['gap']:10.6f}")
