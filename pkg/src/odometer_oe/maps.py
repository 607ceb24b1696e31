"""Back-and-forth bijections between the finite factors of two odometers.

Level ``n`` works on the interval ``[k_{n-1} k_n]``.  ``psi_1`` is the identity
and ``psi_{n}`` is assembled from ``psi_{n-1}^{-1}``: the interval is cut into
rows of length ``k_n``, each row into ``c`` full blocks of length
``k_{n-2}k_{n-1}`` (green) plus a remainder of length ``d`` (red).  Green
blocks are laid out consecutively and filled through ``psi_{n-1}^{-1}``; red
remainders are stacked at the end.

Everything here is pointwise: one evaluation costs ``O(n)`` big-integer
divisions and no table is ever built.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import math

from .errors import DepthError, InvalidSequence
from .omega import NormValue, OmegaFn, weighted
from .supernatural import BaseSequence


def as_sequence(obj) -> BaseSequence:
    """Accept a ``BaseSequence``, anything carrying one in ``.seq``, or a list of ints."""
    if isinstance(obj, BaseSequence):
        return obj
    if isinstance(obj, (list, tuple)):
        return BaseSequence([int(k) for k in obj])
    return obj.seq


@dataclass(frozen=True)
class EuclideanDecomposition:
    """``x = a*k_n + b``, ``k_n = c*B + d``, ``b = e*B + f`` with ``B = k_{n-2}k_{n-1}``."""

    a: int
    b: int
    c: int
    d: int
    e: int
    f: int

    @property
    def red(self) -> bool:
        return self.e == self.c


@dataclass(frozen=True)
class _Level:
    size: int  # k_{n-1} k_n
    kn: int
    block: int  # k_{n-2} k_{n-1}
    c: int
    d: int
    green: int  # c * k_{n-1} * block


class MapEvaluator:
    """Pointwise evaluator for ``psi_n``, ``psi_n^{-1}`` and ``phi_n`` on one sequence."""

    def __init__(self, seq):
        seq = as_sequence(seq)
        self.seq = seq
        levels: list[Optional[_Level]] = [None]
        for n in range(1, seq.depth + 1):
            kn, km = seq.k(n), seq.k(n - 1)
            block = seq.k(n - 2) * km
            c, d = divmod(kn, block)
            levels.append(_Level(km * kn, kn, block, c, d, c * km * block))
        self._levels = levels

    # -- helpers -----------------------------------------------------------
    def _level(self, n: int) -> _Level:
        if n < 1 or n > self.seq.depth:
            raise DepthError(f"level {n} needs 1 <= n <= depth {self.seq.depth}")
        lv = self._levels[n]
        if n >= 2 and lv.c < 1:
            raise InvalidSequence(f"k_{{n+1}} > k_{{n-1}}k_n fails at n={n - 1}")
        return lv

    def size(self, n: int) -> int:
        """``k_{n-1} k_n``, the size of the domain of ``psi_n``."""
        return self._level(n).size

    def _check(self, n: int, x: int, bound: int) -> None:
        if not 0 <= x < bound:
            raise ValueError(f"point {x} outside [0, {bound}) at level {n}")

    def decompose(self, n: int, x: int) -> EuclideanDecomposition:
        lv = self._level(n)
        if n < 2:
            raise DepthError("the Euclidean decomposition is defined for n >= 2")
        self._check(n, x, lv.size)
        a, b = divmod(x, lv.kn)
        e, f = divmod(b, lv.block)
        return EuclideanDecomposition(a, b, lv.c, lv.d, e, f)

    # -- the bijections ----------------------------------------------------
    def _walk(self, n: int, x: int, inverse: bool) -> int:
        acc = 0
        while n > 1:
            lv = self._levels[n]
            if not inverse:
                a, b = divmod(x, lv.kn)
                e, f = divmod(b, lv.block)
                if e == lv.c:
                    return acc + lv.green + a * lv.d + f
                acc += (a * lv.c + e) * lv.block
                x = f
            else:
                if x >= lv.green:
                    a, f = divmod(x - lv.green, lv.d)
                    return acc + a * lv.kn + lv.c * lv.block + f
                blk, r = divmod(x, lv.block)
                a, e = divmod(blk, lv.c)
                acc += a * lv.kn + e * lv.block
                x = r
            inverse = not inverse
            n -= 1
        return acc + x

    def psi(self, n: int, x: int) -> int:
        lv = self._level(n)
        self._check(n, x, lv.size)
        for m in range(2, n):
            self._level(m)
        return self._walk(n, x, inverse=False)

    def psi_inv(self, n: int, y: int) -> int:
        lv = self._level(n)
        self._check(n, y, lv.size)
        for m in range(2, n):
            self._level(m)
        return self._walk(n, y, inverse=True)

    def mod_kn_psi_inv(self, n: int, y: int) -> int:
        return self.psi_inv(n, y) % self._level(n).kn

    def phi(self, n: int, x: int) -> int:
        """``phi_n : [k_{n+1}] -> [k_n]``."""
        if n + 1 > self.seq.depth:
            raise DepthError(f"phi_{n} needs k_{n + 1}; plan depth is {self.seq.depth}")
        self._check(n, x, self.seq.k(n + 1))
        lv = self._level(n)
        return self.psi_inv(n, x % lv.size) % lv.kn

    # -- cocycles ------------------------------------------------------------
    def psi_cocycle(self, n: int, x: int) -> int:
        m = self.size(n)
        return self.psi(n, (x + 1) % m) - self.psi(n, x)

    def phi_cocycle(self, n: int, x: int) -> int:
        m = self.seq.k(n + 1) if n + 1 <= self.seq.depth else None
        if m is None:
            raise DepthError(f"phi_{n} needs k_{n + 1}")
        self._check(n, x, m)
        return self.phi(n, (x + 1) % m) - self.phi(n, x)

    def phi_cocycle_shortcut(self, n: int, x: int) -> int:
        """Cocycle of ``Mod(k_n) o psi_n^{-1}`` at ``x mod k_{n-1}k_n``.

        Agrees with :meth:`phi_cocycle` except on the final partial block of
        ``[k_{n+1}]`` (and at its wrap point).
        """
        size = self.size(n)
        r = x % size
        return self.mod_kn_psi_inv(n, (r + 1) % size) - self.mod_kn_psi_inv(n, r)

    # -- colouring -----------------------------------------------------------
    def is_red(self, n: int, x: int) -> bool:
        if n < 2:
            return False
        lv = self._level(n)
        return (x % lv.kn) // lv.block == lv.c

    def boundary(self, n: int) -> "BoundarySet":
        return BoundarySet(self, n)


class BoundarySet:
    """Points ``x`` of ``[k_{n-1}k_n]`` where ``x`` and ``x+1`` (cyclically) differ in colour."""

    def __init__(self, ev: MapEvaluator, n: int):
        self.ev = ev
        self.n = n
        self.size = ev.size(n)

    def __contains__(self, x: int) -> bool:
        return self.ev.is_red(self.n, x) != self.ev.is_red(self.n, (x + 1) % self.size)

    @property
    def cardinality(self) -> int:
        if self.n < 2:
            return 0
        lv = self.ev._level(self.n)
        # each row contributes its green->red and red->green transitions
        return 2 * self.ev.seq.k(self.n - 1) if lv.d else 0


@dataclass
class IntervalMap:
    """A map ``[size] -> [codomain]`` given by a table or by a rule."""

    size: int
    codomain: int
    rule: Optional[Callable[[int], int]] = None
    table: Optional[Sequence[int]] = None

    def __post_init__(self):
        if self.table is not None and len(self.table) != self.size:
            raise ValueError(f"table has {len(self.table)} entries, expected {self.size}")
        if self.table is None and self.rule is None:
            raise ValueError("IntervalMap needs a table or a rule")

    def __call__(self, x: int) -> int:
        if not 0 <= x < self.size:
            raise ValueError(f"point {x} outside [0, {self.size})")
        if self.table is not None:
            return int(self.table[x])
        return self.rule(x)


def cocycle(phi: IntervalMap, x: int) -> int:
    """``phi((x + 1) mod m) - phi(x)``."""
    if not 0 <= x < phi.size:
        raise ValueError(f"point {x} outside [0, {phi.size})")
    return phi((x + 1) % phi.size) - phi(x)


# -- functional surface ------------------------------------------------------


def psi_eval(plan, n: int, x: int) -> int:
    return MapEvaluator(plan).psi(n, x)


def psi_inv_eval(plan, n: int, y: int) -> int:
    return MapEvaluator(plan).psi_inv(n, y)


def phi_eval(plan, n: int, x: int) -> int:
    return MapEvaluator(plan).phi(n, x)


def cocycle_of_phi(plan, n: int, x: int) -> int:
    return MapEvaluator(plan).phi_cocycle(n, x)


def psi_map(plan, n: int) -> IntervalMap:
    ev = MapEvaluator(plan)
    m = ev.size(n)
    return IntervalMap(m, m, rule=lambda x: ev.psi(n, x))


def phi_map(plan, n: int) -> IntervalMap:
    ev = MapEvaluator(plan)
    return IntervalMap(ev.seq.k(n + 1), ev.seq.k(n), rule=lambda x: ev.phi(n, x))


def psi_bound_terms(plan, n: int, omega: OmegaFn) -> list[float]:
    """Per-level summands ``(2/k_m) w(k_{m-1}k_m) + (1/(k_{m-2}k_{m-1}) + k_{m-2}k_{m-1}/k_m) w(1)``."""
    seq = as_sequence(plan)
    if n < 1 or n > seq.depth:
        raise DepthError(f"level {n} needs 1 <= n <= depth {seq.depth}")
    out = []
    for m in range(1, n + 1):
        km, kp, kpp = seq.k(m), seq.k(m - 1), seq.k(m - 2)
        crude = weighted(Fraction(2, km), omega, kp * km)
        local = weighted(Fraction(1, kpp * kp) + Fraction(kpp * kp, km), omega, 1)
        out.append(math.fsum((crude, local)))
    return out


def psi_norm_bound(plan, n: int, omega: OmegaFn) -> NormValue:
    return NormValue(math.fsum(psi_bound_terms(plan, n, omega)), "closed-form bound for psi_n")


def phi_norm_bound(plan, n: int, omega: OmegaFn) -> NormValue:
    seq = as_sequence(plan)
    if n + 1 > seq.depth:
        raise DepthError(f"phi_{n} needs k_{n + 1}")
    tail = weighted(Fraction(seq.k(n - 1) * seq.k(n), seq.k(n + 1)), omega, seq.k(n))
    return NormValue(math.fsum([*psi_bound_terms(plan, n, omega), tail]), "closed-form bound for phi_n")
