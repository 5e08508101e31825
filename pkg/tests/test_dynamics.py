import numpy as np
import pytest

from eigenrelax import ConnectionMatrix, DynamicsConfig, InvalidInputError, energy, is_fixed_point, relax
from eigenrelax.dynamics import RANDOM_PERMUTATION, ConvergenceError
from oracles import all_configurations, direct_energy, is_one_flip_minimum, random_symmetric


def test_two_spin_trace(pair):
    r = relax(pair, [1, -1])
    # spin 0 sees field -1 and flips first
    assert list(r.final_state) == [-1, -1]
    assert r.final_energy == -2.0
    assert r.flips == 1 and r.sweeps == 2


def test_fixed_point_start_is_unchanged(pair):
    r = relax(pair, [1, 1])
    assert list(r.final_state) == [1, 1]
    assert (r.sweeps, r.flips) == (1, 0)


def test_is_fixed_point_examples(pair):
    assert is_fixed_point(pair, [1, 1])
    assert not is_fixed_point(pair, [1, -1])


def test_random_starts_self_consistent(rng):
    J = ConnectionMatrix(random_symmetric(rng, 10))
    for _ in range(100):
        r = relax(J, rng.choice([-1, 1], size=10))
        assert r.final_energy == energy(J, r.final_state)
        h = J.entries @ r.final_state
        assert np.all(r.final_state * h >= 0)


def test_fixed_points_are_one_flip_minima_exhaustive(rng):
    a = random_symmetric(rng, 8)
    J = ConnectionMatrix(a)
    for s in all_configurations(8):
        assert is_fixed_point(J, s) == is_one_flip_minimum(a, s)


def test_trace_strictly_decreasing_and_flip_identity(rng):
    a = random_symmetric(rng, 12)
    J = ConnectionMatrix(a)
    cfg = DynamicsConfig(record_trace=True)
    for _ in range(50):
        r = relax(J, rng.choice([-1, 1], size=12), cfg)
        trace = np.array(r.energy_trace)
        assert len(trace) == r.flips + 1
        assert np.all(np.diff(trace) < 0)
        assert trace[-1] == pytest.approx(r.final_energy, abs=1e-10)


def test_flip_energy_change_is_four_field(rng):
    a = random_symmetric(rng, 7)
    s = rng.choice([-1, 1], size=7)
    for i in range(7):
        h = a[i] @ s
        t = s.copy()
        t[i] = -t[i]
        assert direct_energy(a, t) - direct_energy(a, s) == pytest.approx(4 * s[i] * h)


def test_random_permutation_order_reproducible(rng):
    J = ConnectionMatrix(random_symmetric(rng, 30))
    s0 = rng.choice([-1, 1], size=30)
    cfg = DynamicsConfig(RANDOM_PERMUTATION, seed=3)
    a, b = relax(J, s0, cfg), relax(J, s0, cfg)
    np.testing.assert_array_equal(a.final_state, b.final_state)
    assert is_fixed_point(J, a.final_state)


def test_zero_fields_keep_spins():
    J = ConnectionMatrix(np.zeros((4, 4)))
    r = relax(J, [1, -1, 1, -1])
    assert list(r.final_state) == [1, -1, 1, -1] and r.flips == 0


def test_sweep_budget_error(rng):
    J = ConnectionMatrix(random_symmetric(rng, 40))
    s0 = rng.choice([-1, 1], size=40)
    full = relax(J, s0)
    assert full.sweeps > 1
    with pytest.raises(ConvergenceError) as info:
        relax(J, s0, DynamicsConfig(max_sweeps=1))
    assert info.value.best_energy <= energy(J, s0)


def test_config_validation():
    with pytest.raises(InvalidInputError):
        DynamicsConfig("synchronous")
    with pytest.raises(InvalidInputError):
        DynamicsConfig(max_sweeps=0)
