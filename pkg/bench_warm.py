import time

import numpy as np

from surfplan.channel import synthesize_channels
from surfplan.conic import ConicWorkspace
from surfplan.scenes import desk_scene
from surfplan.subproblem import PhaseIterate, build_subproblem

cfg = desk_scene(seed=0)
csd = synthesize_channels(cfg)
rng = np.random.default_rng(1)
theta0 = np.exp(2j * np.pi * rng.random(24))
z0 = np.tile(theta0, (8, 1))


def normalize(z):
    out = np.ones_like(z)
    nz = np.abs(z) > 1e-12
    out[nz] = z[nz] / np.abs(z[nz])
    return out


for mode in ("cold", "warm"):
    z = z0.copy()
    sol = None
    total = 0.0
    for step in range(4):
        prob, lay = build_subproblem(csd, budget=3, iterate=PhaseIterate(z=z))
        ws = ConicWorkspace(prob)
        warm = None
        if mode == "warm" and sol is not None:
            warm = (sol.x, sol.info["y_ext"], sol.info["s_ext"])
        t0 = time.perf_counter()
        sol = ws.solve(tol=1e-6, max_iter=100000, warm=warm)
        dt = time.perf_counter() - t0
        total += dt
        print(
            f"{mode} step {step}: {sol.status} it={sol.iterations} "
            f"obj={sol.objective:.8f} t={dt:.1f}s",
            flush=True,
        )
        z = normalize(lay.extract_z(sol.x))
    print(f"{mode} total: {total:.1f}s", flush=True)
