"""Supernatural numbers and base sequences of odometers.

A supernatural number ``prod q**r_q`` (with ``r_q`` possibly infinite) is the
complete isomorphism invariant of a Z-odometer.  Base sequences are the
integer towers ``k_{-1}, k_0, k_1, ...`` that the coupling maps are built on.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import InvalidSequence

INFINITY = math.inf

Exponent = Union[int, float]

# Witness bases that make Miller-Rabin deterministic below this bound.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_LIMIT = 3_317_044_064_679_887_385_961_981


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    for p in _MR_BASES:
        if q % p == 0:
            return q == p
    if q >= _MR_LIMIT:
        raise ValueError(f"primality of {q} is beyond the deterministic range")
    d, s = q - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, q)
        if x in (1, q - 1):
            continue
        for _ in range(s - 1):
            x = x * x % q
            if x == q - 1:
                break
        else:
            return False
    return True


def valuation(k: int, q: int) -> int:
    """Largest ``r`` with ``q**r`` dividing ``k``."""
    if k < 1:
        raise ValueError(f"valuation needs k >= 1, got {k}")
    if not is_prime(q):
        raise ValueError(f"{q} is not prime")
    r = 0
    while k % q == 0:
        k //= q
        r += 1
    return r


def prime_factors(k: int) -> dict[int, int]:
    """Trial-division factorization; fine for the small-prime towers used here."""
    out: dict[int, int] = {}
    p = 2
    while k > 1 and p * p <= k:
        if p > 1_000_000:
            raise ValueError(f"cofactor {k} has no prime factor below 10^6")
        while k % p == 0:
            out[p] = out.get(p, 0) + 1
            k //= p
        p += 1 if p == 2 else 2
    if k > 1:
        out[k] = out.get(k, 0) + 1
    return out


def _factor_over(k: int, primes: Iterable[int]) -> tuple[dict[int, int], int]:
    """Strip the given primes from ``k``; returns the exponents and the cofactor."""
    out: dict[int, int] = {}
    for p in primes:
        r = 0
        while k % p == 0:
            k //= p
            r += 1
        if r:
            out[p] = r
    return out, k


@dataclass(frozen=True)
class SupernaturalNumber:
    """Formal product of prime powers; exponents may be ``INFINITY``."""

    exponents: tuple[tuple[int, Exponent], ...] = ()

    def __init__(self, exponents: Mapping[int, Exponent] | Iterable[tuple[int, Exponent]] = ()):
        items = dict(exponents)
        clean: dict[int, Exponent] = {}
        for q, r in items.items():
            q = int(q)
            if not is_prime(q):
                raise ValueError(f"{q} is not prime")
            if r != INFINITY:
                if int(r) != r or r < 0:
                    raise ValueError(f"exponent of {q} must be a natural number or INFINITY")
                r = int(r)
            if r != 0:
                clean[q] = r
        object.__setattr__(self, "exponents", tuple(sorted(clean.items())))

    def __getitem__(self, q: int) -> Exponent:
        return self.as_dict().get(q, 0)

    def as_dict(self) -> dict[int, Exponent]:
        return dict(self.exponents)

    @property
    def primes(self) -> list[int]:
        return [q for q, _ in self.exponents]

    @property
    def infinite_primes(self) -> list[int]:
        return [q for q, r in self.exponents if r == INFINITY]

    @property
    def is_finite(self) -> bool:
        return not self.infinite_primes

    def value(self) -> int:
        if not self.is_finite:
            raise ValueError("supernatural number with an infinite exponent has no integer value")
        return math.prod(q**r for q, r in self.exponents)

    def admits(self, k: int) -> bool:
        """True when ``k`` divides this supernatural number."""
        exps, rest = _factor_over(k, self.primes)
        return rest == 1 and all(r <= self[q] for q, r in exps.items())

    def to_json(self) -> dict[str, int | str]:
        return {str(q): ("inf" if r == INFINITY else r) for q, r in self.exponents}

    @classmethod
    def from_json(cls, obj: Mapping[str, int | str]) -> "SupernaturalNumber":
        return cls({int(q): (INFINITY if r in ("inf", "INF", "∞") else int(r)) for q, r in obj.items()})

    @classmethod
    def parse(cls, text: str) -> "SupernaturalNumber":
        """Accept JSON (``{"2": "inf"}``) or shorthand like ``2^inf*3^2`` or ``1``."""
        text = text.strip()
        if text.startswith("{"):
            return cls.from_json(json.loads(text))
        if text in ("", "1"):
            return cls()
        exps: dict[int, Exponent] = {}
        for part in re.split(r"[*·.]", text):
            m = re.fullmatch(r"\s*(\d+)\s*(?:\^\s*(inf|∞|\d+))?\s*", part)
            if not m:
                raise ValueError(f"cannot parse supernatural factor {part!r}")
            q = int(m.group(1))
            r_txt = m.group(2) or "1"
            r: Exponent = INFINITY if r_txt in ("inf", "∞") else int(r_txt)
            prev = exps.get(q, 0)
            exps[q] = prev + r
        return cls(exps)

    def __str__(self) -> str:
        if not self.exponents:
            return "1"
        return "*".join(f"{q}^{'inf' if r == INFINITY else r}" for q, r in self.exponents)


class BaseSequence:
    """Integers ``k_{-1}, k_0, k_1, ..., k_depth`` addressed by their signed index (``k(-1)`` and ``k(0)`` are 1).

    ``seq.k(n)`` returns ``k_n`` for ``n >= -1``.  Construction only checks the
    shape (positive integers, two leading ones); ``check()`` reports the growth
    and divisibility invariants so that broken sequences can still be audited.
    """

    __slots__ = ("_ks",)

    def __init__(self, ks: Sequence[int]):
        ks = tuple(int(k) for k in ks)
        if len(ks) < 2 or ks[0] != 1 or ks[1] != 1:
            raise InvalidSequence("k_{-1} = k_0 = 1 is required")
        if any(k < 1 for k in ks):
            raise InvalidSequence("entries must be positive integers")
        self._ks = ks

    @classmethod
    def from_tail(cls, tail: Sequence[int]) -> "BaseSequence":
        """Build from ``k_1, k_2, ...``."""
        return cls((1, 1, *tail))

    @property
    def ks(self) -> tuple[int, ...]:
        return self._ks

    @property
    def depth(self) -> int:
        return len(self._ks) - 2

    def k(self, n: int) -> int:
        if n < -1 or n > self.depth:
            raise IndexError(f"k_{n} is not available (depth {self.depth})")
        return self._ks[n + 1]

    def truncate(self, depth: int) -> "BaseSequence":
        return BaseSequence(self._ks[: depth + 2])

    def check(self) -> list[tuple[str, int, bool]]:
        """Per-index invariant outcomes ``(condition, index, passed)``."""
        out: list[tuple[str, int, bool]] = []
        for n in range(0, self.depth):
            out.append(("k_{n+1} > k_{n-1}k_n", n, self.k(n + 1) > self.k(n - 1) * self.k(n)))
        for n in range(1, self.depth):
            out.append(("k_n < k_{n+1}", n, self.k(n) < self.k(n + 1)))
        for n in range(-1, self.depth - 1):
            out.append(("k_n | k_{n+2}", n, self.k(n + 2) % self.k(n) == 0))
        return out

    def violations(self) -> list[str]:
        return [f"{name} fails at n={n}" for name, n, ok in self.check() if not ok]

    def validate(self) -> "BaseSequence":
        bad = self.violations()
        if bad:
            raise InvalidSequence("; ".join(bad))
        return self

    def to_json(self) -> list[str]:
        return [str(k) for k in self._ks]

    @classmethod
    def from_json(cls, arr: Sequence[str | int]) -> "BaseSequence":
        return cls([int(a) for a in arr])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, BaseSequence) and other._ks == self._ks

    def __hash__(self) -> int:
        return hash(self._ks)

    def __repr__(self) -> str:
        return f"BaseSequence({list(self._ks)!r})"


def parity_indices(depth: int, parity: str) -> list[int]:
    if parity not in ("odd", "even"):
        raise ValueError("parity must be 'odd' or 'even'")
    start = 1 if parity == "odd" else 2
    return list(range(start, depth + 1, 2))


def supernatural_of_prefix(
    seq: BaseSequence, parity: str, complete: bool = False
) -> tuple[SupernaturalNumber, dict[int, str]]:
    """Max valuations over the listed entries of one parity.

    Without ``complete`` every exponent is only a lower bound on the limit,
    hence flagged ``"at-least"``.
    """
    exps: dict[int, int] = {}
    for n in parity_indices(seq.depth, parity):
        for q, r in prime_factors(seq.k(n)).items():
            exps[q] = max(exps.get(q, 0), r)
    flag = "exact" if complete else "at-least"
    return SupernaturalNumber(exps), {q: flag for q in sorted(exps)}


def chunk_stream(sn: SupernaturalNumber) -> Iterator[int]:
    """Primes whose running product converges to ``sn``.

    Round ``r`` emits, smallest first, every prime whose exponent is at least
    ``r``; finite primes therefore appear exactly ``r_q`` times and infinite ones
    interleave forever.
    """
    items = sn.exponents
    r = 1
    while True:
        live = [q for q, e in items if e >= r]
        if not live:
            return
        yield from live
        r += 1
