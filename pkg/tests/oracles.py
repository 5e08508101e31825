"""Brute-force reference computations, deliberately independent of the library code paths."""

import itertools

import numpy as np


def all_configurations(n):
    return [np.array(c, dtype=np.int8) for c in itertools.product((-1, 1), repeat=n)]


def direct_energy(a, s):
    # explicit double sum; no matrix products
    a = np.asarray(a, dtype=float)
    n = len(s)
    return -sum(a[i][j] * s[i] * s[j] for i in range(n) for j in range(n))


def brute_minimum(a):
    n = len(a)
    return min(direct_energy(a, s) for s in all_configurations(n))


def is_one_flip_minimum(a, s):
    e = direct_energy(a, s)
    for i in range(len(s)):
        t = s.copy()
        t[i] = -t[i]
        if direct_energy(a, t) < e - 1e-12:
            return False
    return True


def top_overlaps(f, k):
    """The k largest overlap values (s, f) over all 2^n configurations."""
    values = sorted((float(np.dot(s, f)) for s in all_configurations(len(f))), reverse=True)
    return values[:k]


def random_symmetric(rng, n, bound=4.0):
    a = rng.uniform(-bound, bound, size=(n, n))
    a = np.triu(a, 1)
    return a + a.T
