import time
from surfplan.channel import synthesize_channels
from surfplan.deploy import DeployConfig, sweep_budgets
from surfplan.scenes import desk_scene

channels = synthesize_channels(desk_scene())
cfg = DeployConfig(budget=0, num_starts=3, seed=0, max_iters=3,
                   solver_tol=3e-4, objective_tol=1e-3,
                   first_iter_max_iter=6_000, solver_max_iter=30_000,
                   node_limit=6, mip_gap=1e-3)
t0 = time.time()
reports = sweep_budgets(channels, range(7), cfg)
el = time.time() - t0
print("sweep total %.0fs" % el)
rates = [r.min_rate_bps for r in reports]
print("rates", ["%.4f" % r for r in rates])
print("gains", [None if r.marginal_gain is None else "%.4f" % r.marginal_gain
                for r in reports])
mono = all(hi >= lo * 0.98 for lo, hi in zip(rates, rates[1:]))
gains = [r.marginal_gain for r in reports[1:]]
import numpy as np
print("monotone-2pc", mono, "argmax", int(np.argmax(gains)), "argmin", int(np.argmin(gains)))
for r in reports:
    print(" b=%d" % r.budget, "best=%d" % r.best_start,
          ["%.4f" % s.min_rate_bps for s in r.starts],
          [s.status for s in r.starts])
