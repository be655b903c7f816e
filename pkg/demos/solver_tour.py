"""Drive the conic solver directly on two tiny hand-built problems.

The planner feeds the solver large sparse problems; this demo shows the
raw interface on problems small enough to check by hand: a box-constrained
nearest-point problem (second-order cone) and a power curve (exponential
cone).
"""

import numpy as np
import scipy.sparse as sp

from surfplan import ConicProblem, solve_conic
from surfplan.cones import expcone, soc


def nearest_point_in_box() -> None:
    # minimize t  s.t.  ||x - g|| <= t,  -0.5 <= x <= 0.5
    g = np.array([1.2, -0.3, 0.8])
    n = g.size
    A = sp.vstack([
        sp.csc_matrix((-np.ones(1), ([0], [0])), shape=(1, n + 1)),
        sp.hstack([sp.csc_matrix((n, 1)), -sp.identity(n, format="csc")]),
    ]).tocsc()
    b = np.concatenate([[0.0], -g])
    c = np.zeros(n + 1)
    c[0] = 1.0
    problem = ConicProblem(
        c=c, A=A, b=b, cones=[soc(n + 1)],
        lower=np.concatenate([[0.0], np.full(n, -0.5)]),
        upper=np.concatenate([[np.inf], np.full(n, 0.5)]),
    )
    sol = solve_conic(problem, tol=1e-9)
    expected = float(np.linalg.norm(np.clip(g, -0.5, 0.5) - g))
    print("nearest point in a box")
    print(f"  status {sol.status} after {sol.iterations} iterations")
    print(f"  x = {np.round(sol.x[1:], 6).tolist()} (clip would give "
          f"{np.clip(g, -0.5, 0.5).tolist()})")
    print(f"  distance {sol.objective:.9f} vs closed form {expected:.9f}")


def power_curve() -> None:
    # minimize d  s.t.  d >= 2^e,  e fixed at 1.5  ->  d = 2^1.5
    e0 = 1.5
    A = sp.csc_matrix(np.array([[-np.log(2.0), 0.0],
                                [0.0, 0.0],
                                [0.0, -1.0]]))
    b = np.array([0.0, 1.0, 0.0])
    problem = ConicProblem(
        c=np.array([0.0, 1.0]), A=A, b=b, cones=[expcone()],
        lower=np.array([e0, 0.0]), upper=np.array([e0, np.inf]),
    )
    sol = solve_conic(problem, tol=1e-9)
    print("\npower curve through the exponential cone")
    print(f"  status {sol.status} after {sol.iterations} iterations")
    print(f"  min d with d >= 2^{e0}: {sol.objective:.9f} "
          f"vs closed form {2.0 ** e0:.9f}")


if __name__ == "__main__":
    nearest_point_in_box()
    power_curve()
