import time

import numpy as np

from surfplan.channel import synthesize_channels
from surfplan.conic import ConicWorkspace
from surfplan.scenes import desk_scene
from surfplan.subproblem import PhaseIterate, build_subproblem

rng = np.random.default_rng(1)
z0 = np.exp(2j * np.pi * rng.random((8, 24)))

for power in (2.0, 5.0, 20.0):
    cfg = desk_scene(seed=0)
    cfg.tx_power_watt = power
    csd = synthesize_channels(cfg)
    for budget in (0, 3, 6):
        prob, lay = build_subproblem(csd, budget=budget, iterate=PhaseIterate(z=z0))
        ws = ConicWorkspace(prob)
        t0 = time.perf_counter()
        sol = ws.solve(tol=1e-6, max_iter=100000)
        dt = time.perf_counter() - t0
        print(
            f"P={power:g} budget={budget}: {sol.status} it={sol.iterations} "
            f"obj={sol.objective:.8f} pres={sol.primal_res:.2e} "
            f"dres={sol.dual_res:.2e} gap={sol.gap:.2e} t={dt:.1f}s",
            flush=True,
        )
