import cProfile
import pstats

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
prob, lay = build_subproblem(csd, budget=3, iterate=PhaseIterate(z=z0))
ws = ConicWorkspace(prob)
print("n =", prob.A.shape[1], "m_ext =", ws._m, "nnz(As) =", ws._As.nnz)

pr = cProfile.Profile()
pr.enable()
sol = ws.solve(tol=1e-6, max_iter=8000)
pr.disable()
stats = pstats.Stats(pr)
stats.sort_stats("cumulative").print_stats(18)
