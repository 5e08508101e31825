import numpy as np
import pytest

from eigenrelax import (
    ConnectionMatrix,
    compare,
    decompose,
    energy,
    gen_uniform,
    lower_bound,
    solve_exhaustive,
    solve_random,
    solve_spectral,
)
from eigenrelax.solvers import ExhaustiveCapError, enumerate_energies
from oracles import all_configurations, brute_minimum, random_symmetric


def test_spectral_two_spin(pair):
    out = solve_spectral(pair, 1, "positive")
    assert out.best_energy == -2.0
    assert abs(int(out.best_state.sum())) == 2


def test_spectral_outcome_invariants(rng):
    J = ConnectionMatrix(random_symmetric(rng, 15))
    out = solve_spectral(J)
    assert out.best_energy == min(r.final_energy for r in out.all_results)
    assert out.best_energy == energy(J, out.best_state)
    assert out.decomposition_work == 15**3


def test_spectral_fallback_when_no_positive_eigenvalue():
    J = ConnectionMatrix(np.zeros((3, 3)))
    out = solve_spectral(J, 3, "positive")
    assert out.warnings and out.best_energy == 0.0


def test_random_two_spin(pair):
    for seed in range(5):
        assert solve_random(pair, 1, seed).best_energy == -2.0


def test_random_deterministic(rng):
    J = ConnectionMatrix(random_symmetric(rng, 25))
    a, b = solve_random(J, seed=9), solve_random(J, seed=9)
    assert a.to_dict() == b.to_dict()
    assert a.params["restarts"] == 25


def test_random_many_restarts_find_global(rng):
    hits = 0
    for trial in range(30):
        a = random_symmetric(rng, 10)
        J = ConnectionMatrix(a)
        hits += solve_random(J, 1024, seed=trial).best_energy <= brute_minimum(a) + 1e-9
    assert hits / 30 >= 0.99


def test_exhaustive_examples(pair):
    out = solve_exhaustive(pair)
    assert out.best_energy == -2.0 and out.degeneracy == 1
    zero = solve_exhaustive(ConnectionMatrix(np.zeros((3, 3))))
    assert zero.best_energy == 0.0 and zero.degeneracy == 4
    assert list(zero.best_state) == [1, -1, -1]


@pytest.mark.parametrize("n", [2, 3, 5, 9, 16, 17])
def test_enumeration_matches_brute_force(rng, n):
    a = random_symmetric(rng, n)
    J = ConnectionMatrix(a)
    got = np.sort(enumerate_energies(J))
    if n <= 9:
        want = np.sort([energy(J, s) for s in all_configurations(n) if s[0] == 1])
    else:
        s = np.array(all_configurations(n - 1), dtype=float)
        s = np.hstack([np.ones((len(s), 1)), s])
        want = np.sort(-np.einsum("ij,jk,ik->i", s, a, s))
    np.testing.assert_allclose(got, want, atol=1e-9)


def test_exhaustive_degenerate_lexicographic():
    # ferromagnet on 4 spins: all-equal states only; with s_0 = +1 only one
    J = ConnectionMatrix(np.ones((4, 4)) - np.eye(4))
    out = solve_exhaustive(J)
    assert list(out.best_state) == [1, 1, 1, 1] and out.degeneracy == 1
    # two decoupled pairs: minimizers (+,+,+,+) and (+,+,-,-)
    b = np.zeros((4, 4))
    b[0, 1] = b[1, 0] = b[2, 3] = b[3, 2] = 1.0
    out = solve_exhaustive(ConnectionMatrix(b))
    assert out.degeneracy == 2 and list(out.best_state) == [1, 1, -1, -1]


def test_exhaustive_cap(monkeypatch):
    J = gen_uniform(12, seed=0)
    with pytest.raises(ExhaustiveCapError):
        solve_exhaustive(J, cap=10)
    monkeypatch.setenv("EXHAUSTIVE_CAP", "11")
    with pytest.raises(ExhaustiveCapError):
        solve_exhaustive(J)


def test_oracle_dominance_n17():
    J = gen_uniform(17, 4, seed=4)
    exact = solve_exhaustive(J)
    assert exact.best_energy >= lower_bound(decompose(J)) - 1e-9
    for out in (solve_spectral(J), solve_spectral(J, 3, "largest"), solve_random(J, seed=1)):
        assert out.best_energy >= exact.best_energy - J.energy_tolerance()


def test_budget_accounting_constant_factor():
    for n in (20, 60):
        J = gen_uniform(n, 4, seed=n)
        spec_work = solve_spectral(J).work_estimate
        rand_work = solve_random(J, seed=0).work_estimate
        assert 0.1 <= rand_work / spec_work <= 10


def test_compare_two_spin_tie(pair):
    rec = compare(pair, seed=0)
    assert rec["outcome"] == "tie" and rec["gap"] == 0.0


def test_compare_classification(rng):
    J = ConnectionMatrix(random_symmetric(rng, 40))
    rec = compare(J, seed=3)
    gap = rec["random_energy"] - rec["spectral_energy"]
    assert rec["gap"] == gap
    expected = "win" if gap > J.energy_tolerance() else "loss" if gap < -J.energy_tolerance() else "tie"
    assert rec["outcome"] == expected
