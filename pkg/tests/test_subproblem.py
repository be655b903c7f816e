import numpy as np
import pytest

from surfplan.channel import ChannelSet, synthesize_channels
from surfplan.conic import solve_conic
from surfplan.scenes import desk_scene
from surfplan.subproblem import PhaseIterate, VariableLayout, build_subproblem, quad_data


def raw_channels(h, G, g, B=1.0, P=1.0, N0=1.0):
    return ChannelSet(h=h, G=G, g=g, bandwidth_hz=B, tx_power_watt=P,
                      noise_psd_watt_per_hz=N0, carrier_freq_hz=1.0)


def unit_iterate(rng, K, LM):
    return PhaseIterate(z=np.exp(2j * np.pi * rng.random((K, LM))))


def test_quad_data_scalar_case():
    # one surface-element path of gain 2 on top of a unit direct link
    cs = raw_channels(h=[[1.0]], G=[[[2.0]]], g=[[[1.0]]])
    q = quad_data(cs, 0)
    assert np.allclose(q.A, [[4.0]])
    assert np.allclose(q.b, [2.0])
    assert q.c == pytest.approx(1.0)


def test_quad_data_zero_direct_link():
    cs = raw_channels(h=[[0.0]], G=[[[2.0]]], g=[[[1.0]]])
    q = quad_data(cs, 0)
    assert np.all(q.b == 0.0)
    assert q.c == 0.0


def test_quad_data_matches_naive_product():
    rng = np.random.default_rng(12)
    for _ in range(5):
        cs = synthesize_channels(desk_scene(num_ues=2, num_surfaces=2, seed=int(rng.integers(1000))))
        for k in range(2):
            q = quad_data(cs, k)
            H, h = cs.stacked[k], cs.h[k]
            n, lm = H.shape
            naive = np.zeros((lm, lm), dtype=complex)
            for i in range(lm):
                for j in range(lm):
                    for t in range(n):
                        naive[i, j] += np.conj(H[t, i]) * H[t, j]
            assert np.allclose(q.A, naive, atol=1e-14)
            assert np.allclose(q.b, H.conj().T @ h, atol=1e-14)
            # Hermitian PSD within round-off
            assert np.allclose(q.A, q.A.conj().T, atol=1e-14)
            assert np.linalg.eigvalsh(q.A).min() >= -1e-9 * np.linalg.norm(q.A)
            assert q.c >= 0.0


def test_variable_census_small_instance():
    cs = synthesize_channels(desk_scene(num_ues=2, num_surfaces=2, surface_elements=4,
                                        bs_antennas=1, seed=2))
    # M=2 is not a perfect square, so build the census instance from raw arrays
    rng = np.random.default_rng(3)
    K, L, M, N = 2, 2, 2, 1
    h = rng.standard_normal((K, N)) + 1j * rng.standard_normal((K, N))
    G = rng.standard_normal((L, M, N)) + 1j * rng.standard_normal((L, M, N))
    g = rng.standard_normal((L, K, M)) + 1j * rng.standard_normal((L, K, M))
    cs = raw_channels(h, G, g)

    prob, lay = build_subproblem(cs, budget=1, iterate=unit_iterate(rng, K, L * M))
    assert lay.num_vars == 1 + 4 * K + L + 2 * (2 * K * L * M) + 2 * L * M == 51
    kinds = {}
    for cone in prob.cones:
        kinds.setdefault((cone.kind, cone.dim), 0)
        kinds[(cone.kind, cone.dim)] += 1
    assert kinds[("zero", 2 * K * L * M)] == 1          # z = phi + theta coupling
    assert kinds[("nonneg", 3 + 3 * K)] == 1            # airtime, signs, budget, surrogates
    assert kinds[("soc", 4)] == K
    assert kinds[("soc", 3)] == K * L * M + L * M       # phi and theta magnitude caps
    assert kinds[("exp", 3)] == K
    assert prob.num_rows == (2 * K * L * M) + (3 + 3 * K) + 4 * K + 3 * (K * L * M + L * M) + 3 * K
    # only the mode indicators carry boxes
    finite = np.isfinite(prob.lower) | np.isfinite(prob.upper)
    assert set(np.flatnonzero(finite)) == set(lay.alpha.tolist())
    prob.validate()


def test_surrogate_is_tight_at_expansion_point():
    rng = np.random.default_rng(4)
    cs = synthesize_channels(desk_scene(num_ues=3, num_surfaces=2, seed=8))
    for k in range(3):
        q = quad_data(cs, k)
        z = np.exp(2j * np.pi * rng.random(q.b.shape[0]))
        assert q.surrogate_at(z, z) == pytest.approx(q.power_at(z), abs=1e-10)


def test_surrogate_minorizes_power_everywhere():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(1, 6))
        X = rng.standard_normal((n + 1, n)) + 1j * rng.standard_normal((n + 1, n))
        q_A = X.conj().T @ X
        from surfplan.subproblem import QuadData
        q = QuadData(A=q_A, b=rng.standard_normal(n) + 1j * rng.standard_normal(n),
                     c=float(rng.random()))
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        zeta = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        assert q.surrogate_at(z, zeta) <= q.power_at(z) + 1e-9


def test_assembled_surrogate_row_evaluates_both_sides():
    rng = np.random.default_rng(6)
    cs = synthesize_channels(desk_scene(num_ues=2, num_surfaces=2, seed=13))
    K, LM = 2, cs.num_surfaces * cs.num_elements
    it = unit_iterate(rng, K, LM)
    prob, lay = build_subproblem(cs, budget=2, iterate=it)
    noise_over_power = cs.bandwidth_hz * cs.noise_psd_watt_per_hz / cs.tx_power_watt

    # surrogate rows sit at the end of the scalar inequality block
    zero_rows = 2 * K * LM
    first_surrogate = zero_rows + (3 + 3 * K) - K
    x = np.zeros(lay.num_vars)
    for k in range(K):
        z = rng.standard_normal(LM) + 1j * rng.standard_normal(LM)
        x[lay.z_block(k)] = lay._complex_to_pairs(z)
        q = quad_data(cs, k)
        x[lay.d[k]] = 1.0 + q.surrogate_at(z, it.z[k]) / noise_over_power
    resid = prob.b - prob.A @ x
    for k in range(K):
        assert resid[first_surrogate + k] == pytest.approx(0.0, abs=1e-10)


def test_feasible_low_slack_point_satisfies_rate_chain():
    cs = synthesize_channels(desk_scene(num_ues=2, num_surfaces=1, bs_antennas=4,
                                        surface_elements=4, seed=21))
    K, LM = 2, cs.num_surfaces * cs.num_elements
    # expand around the phases that align each reflected path with the direct one,
    # so the surrogate is strong and no slack is needed
    z0 = np.array([np.exp(-1j * np.angle(quad_data(cs, k).b)) for k in range(K)])
    prob, lay = build_subproblem(cs, budget=1, iterate=PhaseIterate(z=z0))
    sol = solve_conic(prob, tol=1e-9)
    assert sol.status == "optimal"
    s = sol.x[lay.s]
    assert np.all(s <= 1e-7)
    r, tau, d = sol.x[lay.r_min], sol.x[lay.tau], sol.x[lay.d]
    for k in range(K):
        assert d[k] >= 2.0 ** (r**2 / (cs.bandwidth_hz * tau[k])) - 1e-6


def test_mode_indicator_forces_matching_profile_to_zero():
    rng = np.random.default_rng(9)
    cs = synthesize_channels(desk_scene(num_ues=2, num_surfaces=1, seed=30))
    K, LM = 2, cs.num_elements
    for fixed, quiet in ((1.0, "theta"), (0.0, "phi")):
        prob, lay = build_subproblem(cs, budget=1, iterate=unit_iterate(rng, K, LM))
        prob.lower[lay.alpha] = fixed
        prob.upper[lay.alpha] = fixed
        sol = solve_conic(prob, tol=1e-9)
        assert sol.status == "optimal"
        if quiet == "theta":
            assert np.abs(lay.extract_theta(sol.x)).max() <= 1e-7
        else:
            assert np.abs(lay.extract_phi(sol.x)).max() <= 1e-7


def test_no_surfaces_reduces_to_time_allocation():
    cs = raw_channels(h=[[1.0], [np.sqrt(7.0)]], G=np.zeros((0, 0, 1)), g=np.zeros((0, 2, 0)))
    prob, lay = build_subproblem(cs, budget=0, iterate=PhaseIterate(z=np.zeros((2, 0))),
                                 tau_min=0.1)
    assert lay.num_vars == 1 + 4 * 2
    sol = solve_conic(prob, tol=1e-9)
    assert sol.status == "optimal"
    # with SNRs 1 and 7 the equal-rate split is tau = [0.75, 0.25]
    assert np.allclose(sol.x[lay.tau], [0.75, 0.25], atol=1e-6)
    assert sol.x[lay.r_min] ** 2 == pytest.approx(0.75, abs=1e-6)


def test_builder_rejects_bad_inputs():
    rng = np.random.default_rng(11)
    cs = synthesize_channels(desk_scene(num_ues=2, num_surfaces=1, seed=1))
    it = unit_iterate(rng, 2, cs.num_elements)
    with pytest.raises(ValueError, match="omega"):
        build_subproblem(cs, budget=1, iterate=it, omega=5.0)
    with pytest.raises(ValueError, match="budget"):
        build_subproblem(cs, budget=2, iterate=it)
    with pytest.raises(ValueError, match="tau_min"):
        build_subproblem(cs, budget=1, iterate=it, tau_min=0.6)
    with pytest.raises(ValueError, match="shape"):
        build_subproblem(cs, budget=1, iterate=PhaseIterate(z=np.zeros((2, 3))))
    with pytest.raises(ValueError, match="non-finite"):
        PhaseIterate(z=np.array([[np.nan + 0j]]))
