"""Brute-force reference computations, written independently of the package.

Everything here uses plain Python floats, ``math.comb`` and explicit loops so it
shares no code path with the vectorized implementation under test.
"""
import itertools
import math


def thermal(mu, n_max):
    return [mu**n / (1 + mu) ** (1 + n) for n in range(n_max + 1)]


def poisson(mu, n_max):
    out, term = [], math.exp(-mu)
    for n in range(n_max + 1):
        out.append(term)
        term *= mu / (n + 1)
    return out


def normalize(p):
    s = sum(p)
    return [x / s for x in p]


def tail_after(weights_fn, mu, n, extra=200):
    """sum_{m > n} w_m, summed term by term (no 1 - cdf cancellation)."""
    return sum(weights_fn(mu, n + extra)[n + 1:])


def falling(n, m):
    out = 1
    for j in range(m):
        out *= n - j
    return out


def g_m(p, m):
    mean = sum(n * x for n, x in enumerate(p))
    return sum(falling(n, m) * x for n, x in enumerate(p)) / mean**m


def joint_g(P, m, n):
    """Joint normalized moment from a nested-list joint distribution."""
    ms = sum(k * P[k][l] for k in range(len(P)) for l in range(len(P[0])))
    mi = sum(l * P[k][l] for k in range(len(P)) for l in range(len(P[0])))
    num = sum(falling(k, m) * P[k][l] * falling(l, n) for k in range(len(P)) for l in range(len(P[0])))
    return num / (ms**m * mi**n)


def binomial_pmf(n, N, eta):
    return math.comb(N, n) * eta**n * (1 - eta) ** (N - n) if 0 <= n <= N else 0.0


def click_prob_enumerated(eta, N):
    """P(at least one of N photons survives), by enumerating all 2^N loss patterns."""
    total = 0.0
    for pattern in itertools.product((0, 1), repeat=N):
        weight = 1.0
        for survived in pattern:
            weight *= eta if survived else 1 - eta
        if any(pattern):
            total += weight
    return total


def thin(p, eta):
    return [sum(binomial_pmf(n, N, eta) * p[N] for N in range(n, len(p))) for n in range(len(p))]


def thin_joint(P, eta_s, eta_i):
    K, L = len(P), len(P[0])
    out = [[0.0] * L for _ in range(K)]
    for a in range(K):
        for b in range(L):
            if P[a][b] == 0:
                continue
            for k in range(a + 1):
                for l in range(b + 1):
                    out[k][l] += binomial_pmf(k, a, eta_s) * binomial_pmf(l, b, eta_i) * P[a][b]
    return out


def mgf(p, mu):
    return sum((1 - mu) ** n * x for n, x in enumerate(p))
