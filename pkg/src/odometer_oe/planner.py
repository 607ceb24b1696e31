"""Inductive choice of the interleaved base sequence for two target odometers.

Odd entries draw their prime content from the X target, even entries from the
Y target.  Each new entry ``k_{n+1}`` starts from ``k_{n-1}`` times the next
chunk of its target's prime stream and is then enlarged by a filler prime
until growth and both summability budgets hold.  The budgets follow a
geometric schedule ``delta / (3 * 2**(n+2))`` so that a finite plan certifies
every continuation that keeps the schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

from .errors import CapExceeded, NoFillerPrime, NotSublinear
from .omega import OmegaFn, fraction_str, omega_from_json, parse_fraction, weighted
from .supernatural import BaseSequence, SupernaturalNumber, chunk_stream, parity_indices, prime_factors

# Multiplier exponents are searched by doubling up to this count.
MULTIPLIER_CAP = 2**64
# Hard ceiling on candidate size so a runaway search fails instead of exhausting memory.
MAX_BITS = 2**22


def term_II(seq: BaseSequence, omega: OmegaFn, n: int) -> float:
    """``(k_{n-1} k_n / k_{n+1}) * omega(k_n)``, defined for ``n >= 0``."""
    return weighted(Fraction(seq.k(n - 1) * seq.k(n), seq.k(n + 1)), omega, seq.k(n))


def term_III(seq: BaseSequence, omega: OmegaFn, n: int) -> float:
    """``(2 / k_n) * omega(k_{n-1} k_n)``, defined for ``n >= 1``."""
    return weighted(Fraction(2, seq.k(n)), omega, seq.k(n - 1) * seq.k(n))


def schedule(delta: Fraction, n: int) -> Fraction:
    """Per-index budget shared by both series."""
    return delta / (3 * 2 ** (n + 2))


def tail_budget(delta: Fraction, first: int) -> Fraction:
    """``sum_{n >= first} schedule(delta, n)`` in closed form."""
    return delta / (3 * 2 ** (first + 1))


def _target_for(index: int, target_x: SupernaturalNumber, target_y: SupernaturalNumber) -> SupernaturalNumber:
    return target_x if index % 2 else target_y


@dataclass
class SequencePlan:
    seq: BaseSequence
    target_x: SupernaturalNumber
    target_y: SupernaturalNumber
    omega: OmegaFn
    delta: Fraction
    terms_II: list[float] = field(default_factory=list)
    terms_III: list[float] = field(default_factory=list)
    cursors: tuple[int, int] = (0, 0)

    @property
    def depth(self) -> int:
        return self.seq.depth

    def truncate(self, depth: int) -> "SequencePlan":
        """Prefix plan; term lists are recomputed for the shorter sequence."""
        seq = self.seq.truncate(depth)
        return SequencePlan(
            seq, self.target_x, self.target_y, self.omega, self.delta,
            [term_II(seq, self.omega, n) for n in range(0, depth)],
            [term_III(seq, self.omega, n) for n in range(1, depth + 1)],
            self.cursors,
        )

    def to_json(self) -> dict:
        return {
            "ks": self.seq.to_json(),
            "targetX": self.target_x.to_json(),
            "targetY": self.target_y.to_json(),
            "omega": self.omega.to_json(),
            "delta": fraction_str(self.delta),
            "terms_II": [repr(t) for t in self.terms_II],
            "terms_III": [repr(t) for t in self.terms_III],
            "cursors": list(self.cursors),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SequencePlan":
        return cls(
            BaseSequence.from_json(obj["ks"]),
            SupernaturalNumber.from_json(obj.get("targetX", {})),
            SupernaturalNumber.from_json(obj.get("targetY", {})),
            omega_from_json(obj["omega"]),
            parse_fraction(obj["delta"]),
            [float(t) for t in obj.get("terms_II", [])],
            [float(t) for t in obj.get("terms_III", [])],
            tuple(obj.get("cursors", (0, 0))),
        )


class _Stream:
    def __init__(self, sn: SupernaturalNumber):
        self._it: Iterator[int] = chunk_stream(sn)
        self.used = 0

    def take(self) -> Optional[int]:
        p = next(self._it, None)
        if p is not None:
            self.used += 1
        return p


def _fits(ks: list[int], omega: OmegaFn, delta: Fraction, n: int, cand: int) -> bool:
    """Conditions for ``k_{n+1} = cand`` given ``ks`` holding ``k_{-1}..k_n``."""
    k_prev, k_n = ks[-2], ks[-1]
    if cand <= k_prev * k_n or cand <= k_n:
        return False
    budget_II, budget_III = schedule(delta, n), schedule(delta, n + 1)
    if weighted(Fraction(k_prev * k_n, cand), omega, k_n) > budget_II:
        return False
    return weighted(Fraction(2, cand), omega, k_n * cand) <= budget_III


def plan(
    target_x: SupernaturalNumber,
    target_y: SupernaturalNumber,
    omega: OmegaFn,
    delta: Fraction,
    depth: int,
    cap: int = MULTIPLIER_CAP,
) -> SequencePlan:
    """Choose ``k_1 .. k_depth``.

    Raises ``NotSublinear`` when ``omega`` cannot make the third budget vanish,
    ``CapExceeded`` when the multiplier search exceeds ``cap`` and
    ``NoFillerPrime`` when a purely finite target runs out of primes.
    """
    delta = parse_fraction(delta)
    if depth < 2:
        raise ValueError("depth must be at least 2")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if not omega.sublinear:
        raise NotSublinear(
            f"{omega.describe()}: condition III term (2/k_n) omega(k_(n-1) k_n) does not vanish"
        )
    streams = {1: _Stream(target_x), 0: _Stream(target_y)}
    ks = [1, 1]
    for n in range(0, depth):
        idx = n + 1
        target = _target_for(idx, target_x, target_y)
        stream = streams[idx % 2]
        chunk = stream.take()
        if chunk is None:
            raise NoFillerPrime(
                f"k_{idx}: target {target} is exhausted (condition I cannot grow k_{idx} past k_{idx - 2})"
            )
        base = ks[-2] * chunk
        if _fits(ks, omega, delta, n, base):
            ks.append(base)
            continue
        inf = target.infinite_primes
        if inf:
            ks.append(_grow_by(ks, omega, delta, n, base, inf[0], cap))
            continue
        # finite target: keep consuming its stream one prime at a time
        cand = base
        while not _fits(ks, omega, delta, n, cand):
            p = stream.take()
            if p is None:
                raise NoFillerPrime(
                    f"k_{idx}: target {target} is exhausted before growth and conditions II/III are met"
                )
            cand *= p
        ks.append(cand)
    seq = BaseSequence(ks)
    return SequencePlan(
        seq, target_x, target_y, omega, delta,
        [term_II(seq, omega, n) for n in range(0, depth)],
        [term_III(seq, omega, n) for n in range(1, depth + 1)],
        (streams[1].used, streams[0].used),
    )


def _grow_by(ks: list[int], omega: OmegaFn, delta: Fraction, n: int, base: int, p: int, cap: int) -> int:
    """Least ``base * p**e`` meeting the conditions, found by doubling then bisection on ``e``."""
    hi = 1
    while not _fits(ks, omega, delta, n, base * p**hi):
        hi *= 2
        if hi > cap or (hi * p.bit_length() + base.bit_length()) > MAX_BITS:
            cand = base * p ** (hi // 2)
            if cand > ks[-2] * ks[-1] and weighted(Fraction(2, cand), omega, ks[-1] * cand) > schedule(delta, n + 1):
                raise NotSublinear(f"k_{n + 1}: condition III budget unreachable under the multiplier cap")
            raise CapExceeded(f"k_{n + 1}: multiplier search exceeded its cap")
    lo = hi // 2  # base * p**lo fails (or lo == 0, base failed)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _fits(ks, omega, delta, n, base * p**mid):
            hi = mid
        else:
            lo = mid
    return base * p**hi


# -- certification -----------------------------------------------------------


@dataclass
class PlanItem:
    condition: str
    index: int
    passed: bool
    value: str = ""
    bound: str = ""


@dataclass
class PlanCertificate:
    items: list[PlanItem]
    sum_II: float
    sum_III: float

    @property
    def passed(self) -> bool:
        return all(i.passed for i in self.items)

    @property
    def failures(self) -> list[PlanItem]:
        return [i for i in self.items if not i.passed]

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "sum_II": repr(self.sum_II),
            "sum_III": repr(self.sum_III),
            "items": [vars(i) for i in self.items],
        }


def check_plan(p: SequencePlan) -> PlanCertificate:
    """Re-derive every plan invariant from the integers alone."""
    seq, omega, delta = p.seq, p.omega, p.delta
    items: list[PlanItem] = []
    add = items.append
    for name, n, ok in seq.check():
        add(PlanItem(name, n, ok))
    D = seq.depth

    # condition I at finite depth: each parity only uses its target's primes,
    # and never above a finite exponent
    for parity, target in (("odd", p.target_x), ("even", p.target_y)):
        for n in parity_indices(D, parity):
            try:
                fac = prime_factors(seq.k(n))
            except ValueError:
                add(PlanItem(f"I: k_n divides target ({parity})", n, False, "unfactorable"))
                continue
            ok = all(target[q] >= r for q, r in fac.items())
            add(PlanItem(f"I: k_n divides target ({parity})", n, ok, str(seq.k(n)), str(target)))

    t2 = [term_II(seq, omega, n) for n in range(0, D)]
    t3 = [term_III(seq, omega, n) for n in range(1, D + 1)]
    for n, t in enumerate(t2):
        b = schedule(delta, n)
        add(PlanItem("II: term <= delta/(3*2^(n+2))", n, t <= b, repr(t), fraction_str(b)))
    for n, t in enumerate(t3, start=1):
        b = schedule(delta, n)
        add(PlanItem("III: term <= delta/(3*2^(n+2))", n, t <= b, repr(t), fraction_str(b)))
    s2, s3 = math.fsum(t2), math.fsum(t3)
    third = delta / 3
    # finite sums plus the scheduled tail beyond the last index
    add(PlanItem("II: sum + tail < delta/3", D, s2 + float(tail_budget(delta, D)) < third,
                 repr(s2), fraction_str(third)))
    add(PlanItem("III: sum + tail < delta/3", D, s3 + float(tail_budget(delta, D + 1)) < third,
                 repr(s3), fraction_str(third)))
    if p.terms_II or p.terms_III:
        stored = list(p.terms_II) == t2 and list(p.terms_III) == t3
        add(PlanItem("stored terms match recomputation", D, stored))
    return PlanCertificate(items, s2, s3)


def series_bound(p: SequencePlan, omega: Optional[OmegaFn] = None) -> float:
    """Upper bound for the limit cocycle's omega-norm from the plan's integers.

    Finite part: the per-level summands up to the plan depth.  Tail: the
    scheduled budgets for the crude and growth terms, plus ``2 omega(1) /
    (k_{D-1} k_D)`` for the ``omega(1) / (k_{m-2} k_{m-1})`` terms, whose
    denominators at least double each step.
    """
    from .maps import psi_bound_terms

    omega = omega or p.omega
    seq, D = p.seq, p.seq.depth
    finite = math.fsum(psi_bound_terms(seq, D, omega))
    scheduled = float(tail_budget(p.delta, D + 1) + tail_budget(p.delta, D))
    local = weighted(Fraction(2, seq.k(D - 1) * seq.k(D)), omega, 1)
    return math.fsum((finite, scheduled, local))
