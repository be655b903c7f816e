import time

import numpy as np

from surfplan.channel import synthesize_channels
from surfplan.conic import ConicWorkspace
from surfplan.scenes import desk_scene
from surfplan.subproblem import PhaseIterate, build_subproblem

cfg = desk_scene(seed=0)
csd = synthesize_channels(cfg)
rng = np.random.default_rng(1)
z0 = np.exp(2j * np.pi * rng.random((8, 24)))  # per-entry random (not tiled)

prob, lay = build_subproblem(csd, budget=0, iterate=PhaseIterate(z=z0))
ws = ConicWorkspace(prob)
t0 = time.perf_counter()
for chunk in range(12):
    sol = ws.solve(tol=1e-6, max_iter=25000) if chunk == 0 else ws.solve(
        tol=1e-6, max_iter=25000,
        warm=(sol.x, sol.info.get("y_ext"), sol.info.get("s_ext")),
    )
    dt = time.perf_counter() - t0
    print(
        f"after ~{25 * (chunk + 1)}k: {sol.status} obj={sol.objective:.6f} "
        f"pres={sol.primal_res:.2e} dres={sol.dual_res:.2e} gap={sol.gap:.2e} t={dt:.0f}s",
        flush=True,
    )
    if sol.status == "optimal":
        break
