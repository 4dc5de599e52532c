"""Measure a principal net on a constant-|H| meridian surface, rebuild it, and report convergence."""

import numpy as np

from surfr4 import build_net, check_integrability, reconstruct
from surfr4.bonnet import aligned_rms
from surfr4.surface_jets import catalog

model = catalog("meridian_cmc", [1.0, 0.5])
seed = tuple(0.5 * (a + b) for a, b in model.domain)

rows = []
for n, d in ((9, 0.02), (17, 0.01), (33, 0.005)):
    grid = build_net(model, seed, n, n, d, d)
    residual = check_integrability(grid).max_residual
    rms = aligned_rms(reconstruct(grid).positions, grid.positions)
    rows.append((n, d, residual, rms))

print(f"{'nodes':>6} {'step':>7} {'residual':>10} {'rms':>10}")
for n, d, res, rms in rows:
    print(f"{n:>6} {d:>7.3f} {res:>10.2e} {rms:>10.2e}")
rms = np.array([r[3] for r in rows])
print("observed orders:", np.round(np.log2(rms[:-1] / rms[1:]), 2))
