"""Finite-depth view of the limit maps between the two odometers.

A point of X (resp. Y) is represented by its residues along the odd (resp.
even) indices of the plan, sampled uniformly at the deepest available index.
Stage ``j`` of the X-to-Y map is ``phi_{2j}`` applied to the residue at index
``2j+1``; for Y-to-X it is ``phi_{2j+1}`` at index ``2j+2``.

Sampling uses a counter-style generator keyed by ``(seed, sample index)`` so
that results do not depend on how samples are split across workers.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import DepthError
from .maps import MapEvaluator, as_sequence
from .omega import OmegaFn
from .supernatural import BaseSequence

PARITIES = ("X", "Y")


def sample_rng(seed: int, index: int) -> random.Random:
    return random.Random(f"odometer-oe:{seed}:{index}")


def chain_indices(depth: int, parity: str) -> list[int]:
    if parity not in PARITIES:
        raise ValueError("parity must be 'X' (odd chain) or 'Y' (even chain)")
    start = 1 if parity == "X" else 2
    return list(range(start, depth + 1, 2))


def stage_levels(depth: int, parity: str) -> list[int]:
    """Levels ``n`` of the maps ``phi_n`` usable on this chain (domain index ``n+1``)."""
    return [i - 1 for i in chain_indices(depth, parity) if i - 1 >= 1]


@dataclass(frozen=True)
class LimitPoint:
    parity: str
    indices: tuple[int, ...]
    residues: tuple[int, ...]

    def residue(self, index: int) -> int:
        return self.residues[self.indices.index(index)]

    def successor(self, moduli: Sequence[int]) -> "LimitPoint":
        """The odometer's +1 (adding with carry) on every finite factor."""
        return LimitPoint(self.parity, self.indices,
                          tuple((r + 1) % m for r, m in zip(self.residues, moduli)))

    def coherent(self, moduli: Sequence[int]) -> bool:
        return all(b % m == a for a, b, m in zip(self.residues, self.residues[1:], moduli))


def sample_point(plan, parity: str, seed: int, index: int = 0) -> LimitPoint:
    seq = as_sequence(plan)
    if seq.depth < 3:
        raise DepthError("sampling needs plan depth >= 3")
    idx = chain_indices(seq.depth, parity)
    top = sample_rng(seed, index).randrange(seq.k(idx[-1]))
    return LimitPoint(parity, tuple(idx), tuple(top % seq.k(i) for i in idx))


def phi_e_approx(plan, p: LimitPoint, n: int, ev: Optional[MapEvaluator] = None) -> int:
    """``phi_{2n}(x_{2n+1})``, a residue in ``[k_{2n}]``."""
    if p.parity != "X":
        raise ValueError("phi_e acts on points of X")
    ev = ev or MapEvaluator(plan)
    if 2 * n + 1 not in p.indices:
        raise DepthError(f"point has no residue at index {2 * n + 1}")
    return ev.phi(2 * n, p.residue(2 * n + 1))


def phi_o_approx(plan, p: LimitPoint, n: int, ev: Optional[MapEvaluator] = None) -> int:
    """``phi_{2n+1}(y_{2n+2})``, a residue in ``[k_{2n+1}]``."""
    if p.parity != "Y":
        raise ValueError("phi_o acts on points of Y")
    ev = ev or MapEvaluator(plan)
    if 2 * n + 2 not in p.indices:
        raise DepthError(f"point has no residue at index {2 * n + 2}")
    return ev.phi(2 * n + 1, p.residue(2 * n + 2))


def empirical_cocycle(plan, p: LimitPoint, n: int, ev: Optional[MapEvaluator] = None) -> int:
    """Cocycle of the stage-``n`` map at the point (X: ``phi_{2n}``, Y: ``phi_{2n+1}``)."""
    ev = ev or MapEvaluator(plan)
    level = 2 * n if p.parity == "X" else 2 * n + 1
    return ev.phi_cocycle(level, p.residue(level + 1))


@dataclass
class StabilizationRecord:
    sample: int
    parity: str
    stable_index: int  # first stage from which every later stage coheres
    final_stage: int
    final_residue: int
    cocycles: list[int]

    @property
    def stabilized(self) -> bool:
        """Coherent through the deepest stage (at least the last pair agrees)."""
        return self.stable_index < self.final_stage

    @property
    def status(self) -> str:
        return f"stable-through-depth-{self.final_stage}" if self.stabilized else "unstable-at-depth"


def _stages(depth: int, parity: str) -> list[int]:
    if parity == "X":
        return list(range(1, (depth - 1) // 2 + 1))
    return list(range(0, (depth - 2) // 2 + 1))


def _record(ev: MapEvaluator, parity: str, seed: int, index: int) -> StabilizationRecord:
    seq = ev.seq
    p = sample_point(seq, parity, seed, index)
    stages = _stages(seq.depth, parity)
    levels = [2 * j if parity == "X" else 2 * j + 1 for j in stages]
    values = [ev.phi(lv, p.residue(lv + 1)) for lv in levels]
    cocycles = [ev.phi_cocycle(lv, p.residue(lv + 1)) for lv in levels]
    stable = stages[-1]
    for i in range(len(stages) - 2, -1, -1):
        if values[i + 1] % seq.k(levels[i]) != values[i]:
            break
        stable = stages[i]
    return StabilizationRecord(index, parity, stable, stages[-1], values[-1], cocycles)


@dataclass
class StabilizationProfile:
    records: list[StabilizationRecord]
    curve: dict[str, list[tuple[int, float]]] = field(default_factory=dict)

    @property
    def fraction_stabilized(self) -> float:
        if not self.records:
            return 1.0
        return sum(r.stabilized for r in self.records) / len(self.records)


def _chunks(n: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, n))
    step = -(-n // parts) if n else 0
    return [(i, min(n, i + step)) for i in range(0, n, step)] if n else []


def _records_task(args):
    ks, parity, seed, lo, hi = args
    ev = MapEvaluator(BaseSequence(ks))
    return [_record(ev, parity, seed, i) for i in range(lo, hi)]


def _map(fn, tasks, threads: int):
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def stabilization_profile(
    plan, samples: int, seed: int, parities: Sequence[str] = PARITIES, threads: int = 1
) -> StabilizationProfile:
    seq = as_sequence(plan)
    if seq.depth < 5:
        raise DepthError("stabilization needs plan depth >= 5")
    records: list[StabilizationRecord] = []
    curve: dict[str, list[tuple[int, float]]] = {}
    for parity in parities:
        tasks = [(seq.ks, parity, seed, lo, hi) for lo, hi in _chunks(samples, threads)]
        recs = [r for part in _map(_records_task, tasks, threads) for r in part]
        records.extend(recs)
        stages = _stages(seq.depth, parity)
        if recs:
            curve[parity] = [(j, sum(r.stable_index <= j for r in recs) / len(recs)) for j in stages]
    return StabilizationProfile(records, curve)


@dataclass
class NormEstimate:
    parity: str
    level: int
    samples: int
    mean: float
    stderr: float
    values: list[float] = field(default_factory=list, repr=False)

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.mean - target) <= k * self.stderr

    def below(self, bound: float, k: float = 3.0) -> bool:
        return self.mean <= bound + k * self.stderr


def _norm_task(args):
    ks, parity, level, omega_json, seed, lo, hi = args
    from .omega import omega_from_json

    seq = BaseSequence(ks)
    ev = MapEvaluator(seq)
    omega = omega_from_json(omega_json)
    idx = chain_indices(seq.depth, parity)
    top_index = idx[-1]
    out = []
    for i in range(lo, hi):
        top = sample_rng(seed, i).randrange(seq.k(top_index))
        lam = ev.phi_cocycle(level, top % seq.k(level + 1))
        out.append(omega.eval(abs(lam)))
    return out


def monte_carlo_norm(
    plan,
    omega: OmegaFn,
    samples: int,
    seed: int,
    parity: str = "X",
    level: Optional[int] = None,
    threads: int = 1,
) -> NormEstimate:
    """Mean of ``omega(|cocycle|)`` of ``phi_level`` over uniform points of the chain.

    ``level`` defaults to the deepest stage of the chain.  The point is drawn at
    the deepest chain index and reduced, which is exactly uniform on
    ``[k_{level+1}]``.
    """
    seq = as_sequence(plan)
    levels = stage_levels(seq.depth, parity)
    if level is None:
        if not levels:
            raise DepthError("plan too shallow for this chain")
        level = levels[-1]
    if level not in levels:
        raise DepthError(f"phi_{level} is not a stage of chain {parity}")
    tasks = [(seq.ks, parity, level, omega.to_json(), seed, lo, hi) for lo, hi in _chunks(samples, threads)]
    values = [v for part in _map(_norm_task, tasks, threads) for v in part]
    return summarize(parity, level, values)


def summarize(parity: str, level: int, values: list[float]) -> NormEstimate:
    """Sample mean and its standard error."""
    if not values:
        return NormEstimate(parity, level, 0, 0.0, 0.0, [])
    mean = math.fsum(values) / len(values)
    se = float(np.std(values, ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
    return NormEstimate(parity, level, len(values), mean, se, list(values))


def incoherence_fraction(plan, parity: str, stage: int, cap: int = 2**24) -> tuple[Fraction, Fraction]:
    """Exact fraction of points where stages ``stage`` and ``stage+1`` disagree, with its bound.

    Enumerates the domain of the deeper stage; the bound is the sum of the two
    composition-defect bounds ``k_{m-1}k_m/k_{m+1} + k_m k_{m+1}/k_{m+2}`` at the
    shallower level ``m``.
    """
    from .oracle import TableBuilder

    seq = as_sequence(plan)
    m = 2 * stage if parity == "X" else 2 * stage + 1
    tb = TableBuilder(seq, cap)
    deep = tb.phi(m + 2)
    shallow = tb.phi(m)
    x = np.arange(deep.size, dtype=np.int64)
    bad = np.count_nonzero(deep % seq.k(m) != shallow[x % seq.k(m + 1)])
    bound = Fraction(seq.k(m - 1) * seq.k(m), seq.k(m + 1)) + Fraction(seq.k(m) * seq.k(m + 1), seq.k(m + 2))
    return Fraction(int(bad), deep.size), bound


def round_trip_fraction(plan, parity: str, stage: int, cap: int = 2**24) -> tuple[Fraction, Fraction]:
    """Exact measure where the return map after the forward map misses the identity residue."""
    from .oracle import TableBuilder

    seq = as_sequence(plan)
    m = 2 * stage if parity == "X" else 2 * stage + 1
    tb = TableBuilder(seq, cap)
    fwd = tb.phi(m)
    back = tb.phi(m - 1)
    x = np.arange(fwd.size, dtype=np.int64)
    bad = np.count_nonzero(back[fwd] != x % seq.k(m - 1))
    bound = Fraction(seq.k(m - 2) * seq.k(m - 1), seq.k(m)) + Fraction(seq.k(m - 1) * seq.k(m), seq.k(m + 1))
    return Fraction(int(bad), fwd.size), bound
