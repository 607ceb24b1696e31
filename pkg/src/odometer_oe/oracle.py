"""Brute-force enumeration oracle for small plans.

Tables are assembled bottom-up from the block layout with numpy (row-major
reshapes, inverse by scatter), independently of the top-down pointwise walk in
:mod:`odometer_oe.maps`.  Every closed-form bound and every evaluator is then
checked against the tables.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import CapExceeded, DepthError
from .maps import IntervalMap, MapEvaluator, as_sequence, phi_norm_bound, psi_norm_bound
from .omega import Constant, Log, OmegaFn, Power, norm_from_counts
from .supernatural import BaseSequence

DEFAULT_CAP = 2**24
# float slack for norm-vs-bound comparisons; the measures themselves are exact
NORM_RTOL = 1e-12

MAP_IDS = ("psi", "psi_inv", "phi", "mod_kn_psi_inv")


def plan_hash(seq) -> str:
    seq = as_sequence(seq)
    blob = json.dumps(seq.to_json(), separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


class TableBuilder:
    """Caches oracle tables of ``psi_n`` / ``psi_n^{-1}`` for one sequence."""

    def __init__(self, seq, cap: int = DEFAULT_CAP):
        self.seq = as_sequence(seq)
        self.cap = cap
        self._psi: dict[int, np.ndarray] = {}
        self._inv: dict[int, np.ndarray] = {}

    def _need(self, size: int, what: str) -> None:
        if size > self.cap:
            raise CapExceeded(f"{what} has {size} points, above the enumeration cap {self.cap}")

    def psi(self, n: int) -> np.ndarray:
        if n in self._psi:
            return self._psi[n]
        seq = self.seq
        if n < 1 or n > seq.depth:
            raise DepthError(f"level {n} needs 1 <= n <= depth {seq.depth}")
        rows, width = seq.k(n - 1), seq.k(n)
        size = rows * width
        self._need(size, f"psi_{n}")
        if n == 1:
            table = np.arange(size, dtype=np.int64)
        else:
            block = seq.k(n - 2) * seq.k(n - 1)
            c, d = divmod(width, block)
            if c < 1:
                raise DepthError(f"growth k_{n} > k_{n - 2}k_{n - 1} fails; psi_{n} undefined")
            prev_inv = self.psi_inv(n - 1)
            grid = np.empty((rows, width), dtype=np.int64)
            # green: row a, block e lands on target block a*c + e, filled by psi_{n-1}^{-1}
            start = (np.arange(rows * c, dtype=np.int64) * block).reshape(rows, c, 1)
            grid[:, : c * block] = (start + prev_inv.reshape(1, 1, block)).reshape(rows, c * block)
            # red: the d-long remainders of all rows, stacked after the green part
            if d:
                tail = c * rows * block + np.arange(rows * d, dtype=np.int64).reshape(rows, d)
                grid[:, c * block :] = tail
            table = grid.reshape(size)
        self._psi[n] = table
        return table

    def psi_inv(self, n: int) -> np.ndarray:
        if n in self._inv:
            return self._inv[n]
        fwd = self.psi(n)
        inv = np.full(fwd.size, -1, dtype=np.int64)
        inv[fwd] = np.arange(fwd.size, dtype=np.int64)
        self._inv[n] = inv
        return inv

    def mod_kn_psi_inv(self, n: int) -> np.ndarray:
        return self.psi_inv(n) % self.seq.k(n)

    def phi(self, n: int) -> np.ndarray:
        if n + 1 > self.seq.depth:
            raise DepthError(f"phi_{n} needs k_{n + 1}")
        dom = self.seq.k(n + 1)
        self._need(dom, f"phi_{n}")
        inv = self.psi_inv(n)
        return inv[np.arange(dom, dtype=np.int64) % inv.size] % self.seq.k(n)

    def table(self, n: int, map_id: str) -> np.ndarray:
        if map_id not in MAP_IDS:
            raise ValueError(f"unknown map id {map_id!r}")
        return getattr(self, map_id)(n)


def build_table(plan, n: int, map_id: str, cap: int = DEFAULT_CAP) -> IntervalMap:
    """Materialize one map by iterating the pointwise evaluator over its domain."""
    seq = as_sequence(plan)
    ev = MapEvaluator(seq)
    if map_id == "phi":
        if n + 1 > seq.depth:
            raise DepthError(f"phi_{n} needs k_{n + 1}")
        size, codomain, fn = seq.k(n + 1), seq.k(n), ev.phi
    elif map_id in ("psi", "psi_inv", "mod_kn_psi_inv"):
        size = ev.size(n)
        codomain = seq.k(n) if map_id == "mod_kn_psi_inv" else size
        fn = getattr(ev, map_id)
    else:
        raise ValueError(f"unknown map id {map_id!r}")
    if size > cap:
        raise CapExceeded(f"{map_id}_{n} has {size} points, above the enumeration cap {cap}")
    return IntervalMap(size, codomain, table=tuple(fn(n, x) for x in range(size)))


def cocycle_table(table: np.ndarray) -> np.ndarray:
    return np.roll(table, -1) - table


def exact_norm(table: np.ndarray, omega: OmegaFn):
    vals, counts = np.unique(np.abs(cocycle_table(table)), return_counts=True)
    return norm_from_counts(zip(vals.tolist(), counts.tolist()), table.size, omega)


# -- reports -----------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class Check:
    level: int
    name: str
    passed: bool
    value: str = ""
    bound: str = ""
    detail: str = ""


@dataclass
class VerificationReport:
    plan_hash: str
    ks: list[str]
    omegas: list[str]
    checks: list[Check] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def find(self, level: int, name: str) -> Check:
        for c in self.checks:
            if c.level == level and c.name == name:
                return c
        raise KeyError((level, name))

    def merge(self, other: "VerificationReport") -> "VerificationReport":
        return VerificationReport(
            self.plan_hash, self.ks, self.omegas, self.checks + other.checks, self.skipped + other.skipped
        )

    def to_json(self) -> dict:
        return {
            "plan_hash": self.plan_hash,
            "ks": self.ks,
            "omegas": self.omegas,
            "passed": self.passed,
            "checks": [asdict(c) for c in self.checks],
            "skipped": self.skipped,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["plan_hash", "level", "check", "passed", "value", "bound", "detail"])
        for c in self.checks:
            w.writerow([self.plan_hash, c.level, c.name, int(c.passed), c.value, c.bound, c.detail])
        return buf.getvalue()


def _norm_ok(value: float, bound: float) -> bool:
    return value <= bound * (1 + NORM_RTOL) + 1e-300


def _points(idx: np.ndarray, limit: int = 8) -> str:
    pts = idx.tolist()
    shown = ",".join(map(str, pts[:limit]))
    return "{" + shown + (",..." if len(pts) > limit else "") + "}"


def _mismatch(table: np.ndarray, fn, n: int) -> int:
    return sum(1 for x, t in enumerate(table.tolist()) if fn(n, x) != t)


def verify_level(
    plan,
    n: int,
    omegas: OmegaFn | Sequence[OmegaFn],
    cap: int = DEFAULT_CAP,
    builder: Optional[TableBuilder] = None,
    pointwise: bool = True,
) -> VerificationReport:
    """Enumerate level ``n`` and compare every property with its bound.

    ``builder`` may be supplied (possibly with doctored tables) to reuse or
    mutate tables; ``pointwise`` toggles the evaluator-vs-table comparison.
    """
    seq = as_sequence(plan)
    if isinstance(omegas, OmegaFn):
        omegas = [omegas]
    tb = builder or TableBuilder(seq, cap)
    ev = MapEvaluator(seq)
    rep = VerificationReport(plan_hash(seq), seq.to_json(), [w.describe() for w in omegas])
    add = rep.checks.append
    kn, km = seq.k(n), seq.k(n - 1)
    size = km * kn

    psi = tb.psi(n)
    inv = tb.psi_inv(n)
    mod_inv = tb.mod_kn_psi_inv(n)
    has_phi = n + 1 <= seq.depth

    bij = bool(np.array_equal(np.sort(psi), np.arange(size)))
    add(Check(n, "bijection", bij, detail=f"|domain|={size}"))
    ends = psi[0] == 0 and psi[size - 1] == size - 1
    add(Check(n, "endpoints", bool(ends), _fmt(int(psi[0])) + "," + _fmt(int(psi[size - 1])), f"0,{size - 1}"))

    if pointwise:
        miss = _mismatch(psi, ev.psi, n) + _mismatch(inv, ev.psi_inv, n) + _mismatch(mod_inv, ev.mod_kn_psi_inv, n)
        if has_phi:
            miss += _mismatch(tb.phi(n), ev.phi, n)
        add(Check(n, "table_vs_recursion", miss == 0, str(miss), "0"))

    if n >= 2:
        block = seq.k(n - 2) * km
        prev_inv = tb.psi_inv(n - 1)
        x = np.arange(size, dtype=np.int64)
        lhs = prev_inv[(x % kn) % block]
        rhs = psi % block
        defect = np.nonzero(lhs != rhs)[0]
        measure = Fraction(defect.size, size)
        bound = Fraction(block, kn)
        red = (x % kn) // block == kn // block
        red_measure = Fraction(kn % block, kn)
        add(Check(n, "diagram_defect", measure <= bound, _fmt(measure), _fmt(bound),
                  f"set={_points(defect)};red_measure={_fmt(red_measure)}"))
        add(Check(n, "defect_in_red", bool(red[defect].all()), str(int((~red[defect]).sum())), "0"))
        colour = red.astype(np.int8)
        boundary = int(np.count_nonzero(colour != np.roll(colour, -1)))
        card = ev.boundary(n).cardinality
        add(Check(n, "boundary_cardinality", boundary == card, str(boundary), str(card)))

    for w in omegas:
        bound = psi_norm_bound(seq, n, w).value
        for label, table in (("psi", psi), ("psi_inv", inv), ("mod_kn_psi_inv", mod_inv)):
            val = exact_norm(table, w).value
            add(Check(n, f"norm_{label}[{w.describe()}]", _norm_ok(val, bound), _fmt(val), _fmt(bound)))

    if has_phi:
        kn1 = seq.k(n + 1)
        phi = tb.phi(n)
        fibers = np.bincount(phi, minlength=kn)
        top = Fraction(int(fibers.max()), kn1)
        fbound = (1 + Fraction(km * kn, kn1)) * Fraction(1, kn)
        add(Check(n, "fiber_max", top <= fbound, _fmt(top), _fmt(fbound)))

        lam = cocycle_table(phi)
        short = cocycle_table(mod_inv)[np.arange(kn1) % size]
        off = np.nonzero(lam != short)[0]
        allowed = set() if kn1 % size == 0 else {kn1 - 1}
        add(Check(n, "phi_shortcut", set(off.tolist()) <= allowed, str(off.size), str(len(allowed)),
                  f"mismatch={_points(off)}"))

        for w in omegas:
            val = exact_norm(phi, w).value
            bound = phi_norm_bound(seq, n, w).value
            add(Check(n, f"norm_phi[{w.describe()}]", _norm_ok(val, bound), _fmt(val), _fmt(bound)))

        if n >= 2:
            prev_phi = tb.phi(n - 1)
            comp = prev_phi[phi]
            target = np.arange(kn1, dtype=np.int64) % km
            bad = np.nonzero(comp != target)[0]
            measure = Fraction(bad.size, kn1)
            bound = Fraction(seq.k(n - 2) * km, kn) + Fraction(km * kn, kn1)
            add(Check(n, "composition_defect", measure <= bound, _fmt(measure), _fmt(bound),
                      f"set={_points(bad)}"))
    return rep


def sequence_checks(seq: BaseSequence) -> list[Check]:
    return [Check(n, name, ok) for name, n, ok in seq.check()]


def _verify_task(args) -> VerificationReport:
    ks, n, omega_json, cap, pointwise = args
    from .omega import omega_from_json

    seq = BaseSequence(ks)
    omegas = [omega_from_json(o) for o in omega_json]
    try:
        return verify_level(seq, n, omegas, cap=cap, pointwise=pointwise)
    except CapExceeded as exc:
        return VerificationReport(plan_hash(seq), seq.to_json(), [w.describe() for w in omegas],
                                  skipped=[f"level {n}: {exc}"])


def _run(tasks: list, threads: int) -> list[VerificationReport]:
    if threads <= 1 or len(tasks) <= 1:
        return [_verify_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_verify_task, tasks))


def verify_plan(
    plan,
    omegas: Sequence[OmegaFn],
    cap: int = DEFAULT_CAP,
    threads: int = 1,
    pointwise: bool = True,
) -> VerificationReport:
    """Sequence invariants plus :func:`verify_level` at every level that fits under ``cap``."""
    seq = as_sequence(plan)
    rep = VerificationReport(plan_hash(seq), seq.to_json(), [w.describe() for w in omegas])
    rep.checks.extend(sequence_checks(seq))
    levels = range(1, seq.depth + 1)
    if not rep.passed:
        return rep
    tasks = [(seq.ks, n, [w.to_json() for w in omegas], cap, pointwise) for n in levels]
    for part in _run(tasks, threads):
        rep = rep.merge(part)
    return rep


# -- fuzzing -----------------------------------------------------------------

SMALL_PRIMES = (2, 3, 5, 7)
FUZZ_OMEGAS: tuple[OmegaFn, ...] = (Power(Fraction(1, 2)), Power(Fraction(1, 3)), Log(), Constant(1.0))


def random_sequence(rng: random.Random, depth_cap: int, size_cap: int, cap: int = DEFAULT_CAP) -> BaseSequence:
    """Random tower with ``k_n | k_{n+2}`` and ``k_{n+1} > k_{n-1}k_n``.

    Multipliers come from {2,3,5,7}; growth is forced by doubling.  The tower
    stops early once an entry would exceed ``size_cap`` or a level would not
    fit under ``cap``.
    """
    ks = [1, 1]
    depth = rng.randint(2, max(2, depth_cap))
    while len(ks) - 2 < depth:
        prev2, prev1 = ks[-2], ks[-1]
        k = prev2 * rng.choice(SMALL_PRIMES)
        if rng.random() < 0.3:
            k *= rng.choice(SMALL_PRIMES)
        while k <= prev2 * prev1 or k <= prev1:
            k *= 2
        if k > size_cap or k * prev1 > cap:
            break
        ks.append(k)
    if len(ks) < 4:
        # always return something verifiable: the smallest valid pair
        ks = [1, 1, 2, 3]
    return BaseSequence(ks)


@dataclass
class FuzzSummary:
    seed: int
    count: int
    reports: list[VerificationReport]

    @property
    def violations(self) -> list[tuple[str, Check]]:
        return [(r.plan_hash, c) for r in self.reports for c in r.failures]

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def n_checks(self) -> int:
        return sum(len(r.checks) for r in self.reports)


def fuzz_plans(
    seed: int,
    count: int,
    depth_cap: int = 4,
    size_cap: int = 5000,
    omegas: Sequence[OmegaFn] = FUZZ_OMEGAS,
    cap: int = DEFAULT_CAP,
    threads: int = 1,
    pointwise: bool = True,
) -> FuzzSummary:
    rng = random.Random(seed)
    seqs = [random_sequence(rng, depth_cap, size_cap, cap) for _ in range(count)]
    tasks = [(s.ks, n, [w.to_json() for w in omegas], cap, pointwise) for s in seqs for n in range(1, s.depth + 1)]
    parts = _run(tasks, threads)
    reports = []
    i = 0
    for s in seqs:
        rep = VerificationReport(plan_hash(s), s.to_json(), [w.describe() for w in omegas])
        rep.checks.extend(sequence_checks(s))
        for _ in range(s.depth):
            rep = rep.merge(parts[i])
            i += 1
        reports.append(rep)
    return FuzzSummary(seed, count, reports)
