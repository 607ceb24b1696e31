"""Literal, slow transcriptions used as independent oracles in the tests."""

from fractions import Fraction
from functools import lru_cache


def make_psi(ks):
    """ks = (k_{-1}, k_0, k_1, ...); returns psi(n, x) and psi_inv(n, y) by recursion + search."""
    k = lambda n: ks[n + 1]

    @lru_cache(maxsize=None)
    def psi(n, x):
        if n == 1:
            return x
        # level n+1 in the recursive definition, rewritten for level n
        a, b = divmod(x, k(n))
        c, d = divmod(k(n), k(n - 2) * k(n - 1))
        e, f = divmod(b, k(n - 2) * k(n - 1))
        if e < c:
            return (a * c + e) * k(n - 2) * k(n - 1) + psi_inv(n - 1, f)
        return c * k(n - 1) * k(n - 2) * k(n - 1) + a * d + f

    @lru_cache(maxsize=None)
    def psi_inv(n, y):
        size = k(n - 1) * k(n)
        for x in range(size):
            if psi(n, x) == y:
                return x
        raise AssertionError("not a bijection")

    return psi, psi_inv


def phi_table(ks, n):
    psi, psi_inv = make_psi(ks)
    k = lambda m: ks[m + 1]
    return [psi_inv(n, x % (k(n - 1) * k(n))) % k(n) for x in range(k(n + 1))]


def cocycle_list(table):
    m = len(table)
    return [table[(x + 1) % m] - table[x] for x in range(m)]


def naive_norm(table, omega):
    lam = cocycle_list(table)
    return sum(Fraction(1, len(lam)) * omega(abs(v)) for v in lam)
