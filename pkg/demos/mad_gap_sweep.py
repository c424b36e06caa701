"""Capacitances chi, chi_tot and their gap for the qutrit MAD and ReMAD channels.

Damping rates (0.3, 0.2, 0.6), h = diag(0, 1, 2).  A coarse grid keeps the
run under a minute; pass a grid size as the first argument for more points.

Run: python3 demos/mad_gap_sweep.py [grid_size]
"""
import sys

from workcap import Hamiltonian, OptimizerConfig, make_mad, make_remad, sweep

grid = int(sys.argv[1]) if len(sys.argv) > 1 else 8
h = Hamiltonian.from_eigenvalues([0.0, 1.0, 2.0])
cfg = OptimizerConfig(n_starts=16)

for name, make in (("MAD", make_mad), ("ReMAD", make_remad)):
    s = sweep(make((0.3, 0.2, 0.6)), h, grid, cfg)
    print(f"\n{name}")
    print(f"{'e':>6s} {'E1':>9s} {'E1_tot':>9s} {'chi':>9s} {'chi_tot':>9s} {'gap':>9s}")
    for i, e in enumerate(s.e1.e_grid):
        print(f"{e:6.3f} {s.e1.values[i]:9.5f} {s.e1_tot.values[i]:9.5f} "
              f"{s.chi.values[i]:9.5f} {s.chi_tot.values[i]:9.5f} {s.gap.values[i]:9.5f}")
    i = s.gap.values.argmax()
    print(f"largest gap {s.gap.values[i]:.5f} at e = {s.gap.e_grid[i]:.3f}")
