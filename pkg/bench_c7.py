import time
import numpy as np
from surfplan.channel import synthesize_channels
from surfplan.deploy import DeployConfig, plan_deployment
from surfplan.scenes import desk_scene

channels = synthesize_channels(desk_scene())  # K=8, L=6, M=4, N=4
t0 = time.time()
cfg = DeployConfig(budget=3, num_starts=1, seed=0, solver_tol=1e-6,
                   first_iter_max_iter=30_000, measure_time=True)
plan, alloc, rep = plan_deployment(channels, cfg)
el = time.time() - t0
b = rep.best
tr = b.objective_trace
rels = [abs(y - x) / max(abs(x), 1e-12) for x, y in zip(tr, tr[1:])]
print("total %.1fs  status=%s  iters=%d" % (el, b.status, b.iteration_count))
print("trace", ["%.6f" % v for v in tr])
print("rels ", ["%.2e" % r for r in rels])
print("slacks", ["%.1e" % s for s in b.slack_trace])
print("iter_seconds", ["%.1f" % s for s in b.iteration_seconds])
print("alpha", b.alpha, "min_rate %.6f" % b.min_rate_bps)
print("gamma", np.round(b.gamma, 3))
print("tau", np.round(b.tau, 4))
