import math

import numpy as np
import pytest

from conucb.core import ArmStatistics, InfeasibleInstanceError, ProblemInstance, RewardSample, RoundOutcome
from conucb.env import ArmTable, RewardStream, run_key, sample_round, synthetic_instance
from conucb.lp import solve_constrained_selection
from conucb.policies import (
    CUCB,
    ConfidenceParams,
    ConUCB,
    Exp3M,
    OraclePolicy,
    UniformRandom,
    confidence_gamma,
    exp3m_gamma,
    make_policy,
    oracle_policy,
    radius,
    run_policy,
    ucb_indices,
)


def test_radius_examples():
    assert radius(0.0, 1, 10) == 10.0
    assert radius(0.5, 100, 10) == pytest.approx(math.sqrt(0.05) + 0.1, abs=1e-15)
    assert radius(0.5, 100, 10) == pytest.approx(0.3236, abs=1e-4)
    r = [radius(0.3, n, 5.0) for n in range(1, 200)]
    assert all(x >= y for x, y in zip(r, r[1:]))


def test_ucb_examples():
    a_hat, g_hat = ucb_indices([ArmStatistics()], 10.0)
    assert a_hat[0] == 1.0 and g_hat[0] == 1.0
    # a_bar = 0.5 with N + 1 = 100
    a_hat, _ = ucb_indices([ArmStatistics(99, 50.0, 0.0)], 10.0)
    assert a_hat[0] == 1.0
    # a_bar = 0.1 with N + 1 = 10000
    a_hat, _ = ucb_indices([ArmStatistics(9999, 1000.0, 0.0)], 10.0)
    assert a_hat[0] == pytest.approx(0.122, abs=1e-12)


def test_ucb_dominates_average():
    rng = np.random.default_rng(0)
    stats = [ArmStatistics(int(n), float(s), float(s) * 0.5) for n, s in zip(rng.integers(0, 1000, 50), rng.random(50))]
    stats = [ArmStatistics(s.n, s.a_sum * s.n, s.g_sum * s.n) for s in stats]
    a_hat, g_hat = ucb_indices(stats, 3.0)
    for s, ah, gh in zip(stats, a_hat, g_hat):
        assert s.a_bar <= ah <= 1.0 and s.g_bar <= gh <= 1.0


def test_gamma_values():
    assert confidence_gamma(20, 10_000, 0.05) == pytest.approx(72 * math.log(8 * 20 * 10_000 / 0.05))
    inst = ProblemInstance.from_means([0.5, 0.5], [0.5, 0.5], 1, 0.5, 10, 0.1)
    assert ConfidenceParams.from_instance(inst).gamma == pytest.approx(72 * math.log(1600))
    with pytest.raises(ValueError):
        ConfidenceParams(0.5)
    assert exp3m_gamma(271, 15, 50_000) == pytest.approx(
        math.sqrt(271 * math.log(271 / 15) / ((math.e - 1) * 15 * 50_000))
    )
    assert exp3m_gamma(2, 1, 1) == pytest.approx(math.sqrt(2 * math.log(2) / (math.e - 1)))
    assert exp3m_gamma(10, 1, 1) == 1.0


def test_conucb_first_round_picks_first_l():
    pol = ConUCB(K=6, L=3, h=2.0, T=100, delta=0.1)
    x, sel = pol.select(np.random.default_rng(0))
    np.testing.assert_array_equal(x, [1, 1, 1, 0, 0, 0])
    assert sel == (0, 1, 2)


def test_conucb_update_rules():
    pol = ConUCB(K=3, L=1, h=0.5, T=100, delta=0.1)
    _, sel = pol.select(np.random.default_rng(0))
    assert sel == (0,)
    before = pol.statistics
    pol.update(RoundOutcome(1, sel, {0: RewardSample(1.0, 1.0)}))
    after = pol.statistics
    assert after[0].n == 1 and after[0].a_bar == 0.5 and after[0].g_bar == 0.5
    assert after[1:] == before[1:]


def test_update_rejects_foreign_outcome():
    pol = ConUCB(K=3, L=1, h=0.5, T=100, delta=0.1)
    pol.select(np.random.default_rng(0))
    with pytest.raises(ValueError):
        pol.update(RoundOutcome(1, (2,), {2: RewardSample(1.0, 1.0)}))


@pytest.mark.parametrize("name", ["conucb", "cucb", "exp3m", "oracle", "uniform"])
def test_play_counts_and_cardinality(name):
    t = synthetic_instance("conflicting", 8, 1)
    inst = ProblemInstance(t.arms, 3, 1.2, 300, 0.1)
    pol = make_policy(name, inst)
    stream = RewardStream(run_key(0, 0))
    rng = np.random.default_rng(0)
    for r in range(1, 301):
        x, sel = pol.select(rng)
        assert len(sel) == 3 == len(set(sel))
        assert abs(np.sum(x) - 3) <= 1e-9
        pol.update(sample_round(t, sel, stream, r))
        if hasattr(pol, "n"):
            assert pol.n.sum() == 3 * r
    assert pol.t == 301


def test_cucb_examples():
    pol = CUCB(K=5, L=2)
    _, sel = pol.select()
    assert sel == (0, 1)
    pol.n[:] = 25
    pol.g_sum[:] = 0.2 * 26
    pol.t = math.e**2
    np.testing.assert_allclose(pol.indices(), 0.2 + math.sqrt(0.12), atol=1e-12)
    assert pol.indices()[0] == pytest.approx(0.5464, abs=1e-4)


def test_cucb_plays_unplayed_first():
    pol = CUCB(K=4, L=2)
    pol.n[:] = [3, 0, 5, 0]
    pol.g_sum[:] = [3.0, 0.0, 5.0, 0.0]
    pol.t = 9
    assert pol.select()[1] == (1, 3)


def test_exp3m_probabilities():
    pol = Exp3M(K=5, L=2, T=100, gamma=0.0)
    p, capped = pol.probabilities()
    np.testing.assert_allclose(p, 0.4)
    assert not capped.any()
    pol = Exp3M(K=2, L=1, T=100, gamma=0.0)
    pol.log_w[:] = np.log([1.0, 3.0])
    p, _ = pol.probabilities()
    np.testing.assert_allclose(p, [0.25, 0.75])


def test_exp3m_capping():
    pol = Exp3M(K=6, L=3, T=1000, gamma=0.1)
    pol.log_w[:] = [50.0, 49.0, 0.0, 0.0, 0.0, 0.0]
    p, capped = pol.probabilities()
    assert capped[0] and capped[1] and not capped[2:].any()
    np.testing.assert_allclose(p[:2], 1.0)
    assert p.sum() == pytest.approx(3.0)
    assert np.all(p[2:] < 1) and np.all(p > 0)


def test_exp3m_weight_grows_on_reward():
    pol = Exp3M(K=4, L=2, T=100)
    _, sel = pol.select(np.random.default_rng(1))
    i = sel[0]
    w0 = pol.log_w[i]
    pol.update(RoundOutcome(1, sel, {j: RewardSample(1.0, 1.0 if j == i else 0.0) for j in sel}))
    assert pol.log_w[i] > w0
    assert np.all(np.isfinite(pol.log_w)) and np.all(pol.weights > 0)


def test_oracle_examples():
    inst = ProblemInstance.from_means([0.9, 0.1, 0.5], [0.1, 1.0, 0.9], 1, 0.5, 10, 0.1)
    np.testing.assert_allclose(oracle_policy(inst), [0, 0, 1], atol=1e-12)
    # constraint inactive: top-L by g
    inst = ProblemInstance.from_means([0.9, 0.8, 0.2, 0.7], [0.9, 0.1, 0.9, 0.8], 2, 0.1, 10, 0.1)
    np.testing.assert_array_equal(oracle_policy(inst), [1, 0, 0, 1])
    with pytest.raises(InfeasibleInstanceError):
        oracle_policy(ProblemInstance.from_means([0.1, 0.1, 0.1], [1, 1, 1], 2, 1.5, 10, 0.1))


def test_oracle_is_feasible_on_random_instances():
    rng = np.random.default_rng(2)
    for _ in range(200):
        K = int(rng.integers(2, 15))
        L = int(rng.integers(1, K))
        a = rng.random(K)
        h = float(rng.uniform(0.01, np.sort(a)[-L:].sum()))
        if h >= L:
            continue
        x = oracle_policy(ProblemInstance.from_means(a, rng.random(K), L, h, 10, 0.1))
        assert x @ a >= h - 1e-9


def test_conucb_objective_approaches_optimum():
    t = synthetic_instance("conflicting", 6, 4)
    inst = ProblemInstance(t.arms, 2, 0.8 * np.sort(t.a)[-2:].sum(), 1000, 0.1)
    opt = oracle_policy(inst) @ inst.g
    gaps = []
    for n in (1e6, 1e9, 1e12):
        pol = ConUCB.from_instance(inst)
        pol.n[:] = n
        pol.a_sum[:] = inst.a * (n + 1)
        pol.g_sum[:] = inst.g * (n + 1)
        a_hat, g_hat = pol.indices()
        res = solve_constrained_selection(g_hat, a_hat, inst.L, inst.h)
        gaps.append(abs(res.objective - opt))
    assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 1e-3


def simulate_objects(name, inst, table, key, rng):
    pol = make_policy(name, inst)
    stream = RewardStream(key)
    sa, sg = np.empty(inst.T), np.empty(inst.T)
    for r in range(1, inst.T + 1):
        _, sel = pol.select(rng)
        out = sample_round(table, sel, stream, r)
        pol.update(out)
        sa[r - 1], sg[r - 1] = out.sum_a, out.sum_g
    return sa, sg


@pytest.mark.parametrize("name", ["conucb", "cucb", "exp3m", "oracle", "uniform"])
def test_compiled_loop_matches_objects(name):
    t = synthetic_instance("conflicting", 7, 2)
    inst = ProblemInstance(t.arms, 3, 0.8 * np.sort(t.a)[-3:].sum(), 400, 0.2)
    key = run_key(9, 1)
    slow = simulate_objects(name, inst, t, key, np.random.default_rng(77))
    fast = run_policy(name, inst, key, np.random.default_rng(77))
    np.testing.assert_array_equal(slow[0], fast.sum_a)
    np.testing.assert_array_equal(slow[1], fast.sum_g)


def test_conucb_with_small_gamma_matches_objects():
    # with a small confidence scale the LP is non-trivial from early on
    t = synthetic_instance("conflicting", 7, 2)
    inst = ProblemInstance(t.arms, 3, 0.8 * np.sort(t.a)[-3:].sum(), 400, 0.2)
    pol = ConUCB(inst.K, inst.L, inst.h, inst.T, inst.delta, gamma=1.0)
    stream = RewardStream(5)
    rng = np.random.default_rng(3)
    sg = []
    fractional_rounds = 0
    for r in range(1, inst.T + 1):
        x, sel = pol.select(rng)
        fractional_rounds += bool(np.any((x > 0) & (x < 1)))
        out = sample_round(t, sel, stream, r)
        pol.update(out)
        sg.append(out.sum_g)
    fast = run_policy("conucb", inst, 5, np.random.default_rng(3), gamma=1.0)
    np.testing.assert_array_equal(sg, fast.sum_g)
    assert fractional_rounds > 0


def test_optimism_implies_lp_dominates_optimum():
    t = synthetic_instance("uniform", 10, 5)
    inst = ProblemInstance(t.arms, 3, 0.6 * np.sort(t.a)[-3:].sum(), 3000, 0.1)
    res = run_policy("conucb", inst, run_key(0, 0), np.random.default_rng(0), track=True)
    d = res.diagnostics
    assert d["pairs"] == inst.K * inst.T
    assert d["optimistic_rounds"] == inst.T
    assert d["lp_below_optimum"] == 0


def test_state_depends_only_on_seed():
    t = synthetic_instance("uniform", 9, 6)
    inst = ProblemInstance(t.arms, 2, 0.5, 500, 0.1)
    for name in ("conucb", "exp3m", "uniform"):
        r1 = run_policy(name, inst, 42, np.random.default_rng(1))
        r2 = run_policy(name, inst, 42, np.random.default_rng(1))
        np.testing.assert_array_equal(r1.sum_g, r2.sum_g)


def test_uniform_random_marginals():
    pol = UniformRandom(5, 2)
    rng = np.random.default_rng(0)
    counts = np.zeros(5)
    n = 20000
    for _ in range(n):
        _, sel = pol.select(rng)
        counts[list(sel)] += 1
        pol._pending = None
    np.testing.assert_allclose(counts / n, 0.4, atol=4 * math.sqrt(0.24 / n))


def test_make_policy_unknown():
    inst = ProblemInstance.from_means([0.5, 0.5], [0.5, 0.5], 1, 0.5, 10, 0.1)
    with pytest.raises(ValueError):
        make_policy("lexp", inst)
    assert isinstance(make_policy("oracle", inst), OraclePolicy)
