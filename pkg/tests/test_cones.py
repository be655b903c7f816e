"""Projection tests: closed-form cases, grid oracle, and cone calculus."""

import numpy as np
import pytest

from surfplan import cones
from oracles import exp_grid_project, ref_project_soc

ALL_KINDS = [
    cones.zero(4),
    cones.nonneg(5),
    cones.soc(3),
    cones.soc(6),
    cones.expcone(),
]


def random_vec(rng, cone):
    return rng.normal(scale=2.0, size=cone.dim)


def test_nonneg_componentwise():
    out = cones.project_cone(np.array([-1.0, 2.0]), cones.nonneg(2))
    np.testing.assert_array_equal(out, [0.0, 2.0])


def test_soc_interior_point_unchanged():
    v = np.array([5.0, 3.0, 4.0])  # t=5 >= ||(3,4)||
    out = cones.project_cone(v, cones.soc(3))
    np.testing.assert_array_equal(out, v)


def test_soc_matches_reference_formula():
    rng = np.random.default_rng(7)
    for _ in range(200):
        v = rng.normal(scale=3.0, size=int(rng.integers(2, 7)))
        mine = cones.project_cone(v, cones.soc(v.size))
        np.testing.assert_allclose(mine, ref_project_soc(v), atol=1e-14)


def test_exp_projection_against_grid_oracle():
    # Frozen from the grid oracle: projection of (0, 1, 0.5).
    v = np.array([0.0, 1.0, 0.5])
    out = cones.project_cone(v, cones.expcone())
    a, b, c = out
    assert b * np.exp(a / b) <= c + 1e-9
    expected = np.array([-0.151491844222, 0.820539002382, 0.682209401045])
    np.testing.assert_allclose(out, expected, atol=1e-6)
    np.testing.assert_allclose(out, exp_grid_project(v), atol=1e-6)


def test_exp_projection_random_against_grid_oracle():
    rng = np.random.default_rng(11)
    for _ in range(12):
        v = rng.normal(scale=1.5, size=3)
        mine = cones.project_cone(v, cones.expcone())
        ref = exp_grid_project(v)
        # the oracle itself only resolves ~1e-7 in position
        assert np.linalg.norm(v - mine) <= np.linalg.norm(v - ref) + 1e-6
        np.testing.assert_allclose(mine, ref, atol=5e-5)


def test_projection_idempotent():
    rng = np.random.default_rng(3)
    for cone in ALL_KINDS:
        for _ in range(50):
            v = random_vec(rng, cone)
            p1 = cones.project_cone(v, cone)
            p2 = cones.project_cone(p1, cone)
            np.testing.assert_allclose(p2, p1, atol=1e-12)


def test_projection_nonexpansive():
    rng = np.random.default_rng(4)
    for cone in ALL_KINDS:
        for _ in range(50):
            u, v = random_vec(rng, cone), random_vec(rng, cone)
            pu = cones.project_cone(u, cone)
            pv = cones.project_cone(v, cone)
            assert np.linalg.norm(pu - pv) <= np.linalg.norm(u - v) + 1e-12


def test_moreau_identity():
    # v = P_K(v) - P_{K*}(-v) for every cone kind
    rng = np.random.default_rng(5)
    for cone in ALL_KINDS:
        for _ in range(50):
            v = random_vec(rng, cone)
            pk = cones.project_cone(v, cone)
            pd = cones.project_dual_cone(-v, cone)
            np.testing.assert_allclose(v, pk - pd, atol=1e-10)


def test_exp_moreau_pair_orthogonal():
    rng = np.random.default_rng(6)
    for _ in range(200):
        v = rng.normal(scale=3.0, size=3)
        vp, vd = cones.project_exp_pair(v)
        np.testing.assert_allclose(vp + vd, v, atol=1e-10)
        assert abs(float(vp @ vd)) < 1e-9


def test_cone_validation():
    with pytest.raises(ValueError):
        cones.Cone("soc", 1)
    with pytest.raises(ValueError):
        cones.Cone("exp", 4)
    with pytest.raises(ValueError):
        cones.Cone("simplex", 3)
    with pytest.raises(ValueError):
        cones.project_cone(np.zeros(2), cones.soc(3))
