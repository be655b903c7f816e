import time

import numpy as np

import surfplan.conic as conic
from surfplan.channel import synthesize_channels
from surfplan.conic import ConicWorkspace
from surfplan.scenes import desk_scene
from surfplan.subproblem import PhaseIterate, build_subproblem

cfg = desk_scene(seed=0)
csd = synthesize_channels(cfg)
rng = np.random.default_rng(1)
z0 = np.exp(2j * np.pi * rng.random((8, 24)))
prob, lay = build_subproblem(csd, budget=3, iterate=PhaseIterate(z=z0))

for spread in (10.0, 30.0, 100.0, 1e8):
    conic._SCALE_SPREAD = spread
    ws = ConicWorkspace(prob)
    t0 = time.perf_counter()
    sol = ws.solve(tol=1e-6, max_iter=60000)
    dt = time.perf_counter() - t0
    print(
        f"spread={spread:g}: {sol.status} it={sol.iterations} "
        f"obj={sol.objective:.8f} pres={sol.primal_res:.2e} "
        f"dres={sol.dual_res:.2e} gap={sol.gap:.2e} t={dt:.1f}s",
        flush=True,
    )
