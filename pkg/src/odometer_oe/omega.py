"""Non-decreasing weight functions omega and the norms they induce.

Values of omega are floats; the measures they are weighted by stay exact
``Fraction`` objects until the final product.  Arguments may be integers with
hundreds of digits, so every family also exposes ``log_eval`` and products are
formed in log space whenever the direct route would overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .errors import CapExceeded, NotSublinear, OmegaOverflow


def _log(n: int) -> float:
    # math.log accepts arbitrarily large ints exactly
    return math.log(n)


def parse_fraction(text: str | int | Fraction) -> Fraction:
    if isinstance(text, Fraction):
        return text
    return Fraction(str(text).strip())


def fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


class OmegaFn:
    """Base class; subclasses are frozen dataclasses with a ``family`` tag."""

    family: str = ""

    def eval(self, n: int) -> float:
        if n < 0:
            raise ValueError("omega is defined on non-negative integers")
        lv = self.log_eval(n)
        if lv == -math.inf:
            return 0.0
        if lv > 709.0:
            raise OmegaOverflow(f"{self.describe()} at n with {len(str(n))} digits overflows a float")
        return math.exp(lv)

    def log_eval(self, n: int) -> float:
        raise NotImplementedError

    def __call__(self, n: int) -> float:
        return self.eval(n)

    @property
    def sublinear(self) -> bool:
        return True

    def to_json(self) -> dict:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Power(OmegaFn):
    p: Fraction
    family = "power"

    def __post_init__(self):
        object.__setattr__(self, "p", parse_fraction(self.p))
        if not 0 < self.p <= 1:
            raise ValueError("Power needs 0 < p <= 1")

    def eval(self, n: int) -> float:
        if self.p == 1:
            if n < 0:
                raise ValueError("omega is defined on non-negative integers")
            try:
                return float(n)
            except OverflowError as exc:
                raise OmegaOverflow(str(exc)) from None
        if self.p == Fraction(1, 2) and 0 <= n < 2**52:
            return math.sqrt(n)
        return super().eval(n)

    def log_eval(self, n: int) -> float:
        if n == 0:
            return -math.inf
        return float(self.p) * _log(n)

    @property
    def sublinear(self) -> bool:
        return self.p < 1

    def to_json(self) -> dict:
        return {"family": "power", "p": fraction_str(self.p)}

    def describe(self) -> str:
        return f"power:{self.p}"


# (n+e) log(n+e) / n stays above e for n >= 1, which keeps PowerLog monotone
# whenever q >= -e*p.
@dataclass(frozen=True)
class PowerLog(OmegaFn):
    p: Fraction
    q: Fraction
    family = "powerlog"

    def __post_init__(self):
        object.__setattr__(self, "p", parse_fraction(self.p))
        object.__setattr__(self, "q", parse_fraction(self.q))
        if not 0 < self.p <= 1:
            raise ValueError("PowerLog needs 0 < p <= 1")
        if self.q < 0 and -self.q > math.e * self.p:
            raise ValueError("PowerLog with q < -e*p is not non-decreasing")

    def log_eval(self, n: int) -> float:
        if n == 0:
            return -math.inf
        ln = _log(n)
        shifted = math.log(n + math.e) if n < 2**60 else ln
        return float(self.p) * ln + float(self.q) * math.log(shifted)

    @property
    def sublinear(self) -> bool:
        return self.p < 1 or self.q < 0

    def to_json(self) -> dict:
        return {"family": "powerlog", "p": fraction_str(self.p), "q": fraction_str(self.q)}

    def describe(self) -> str:
        return f"powerlog:{self.p},{self.q}"


@dataclass(frozen=True)
class Log(OmegaFn):
    """``n -> log(1 + n)``."""

    family = "log"

    def eval(self, n: int) -> float:
        if n < 0:
            raise ValueError("omega is defined on non-negative integers")
        return math.log1p(n) if n < 2**53 else _log(n + 1)

    def log_eval(self, n: int) -> float:
        v = self.eval(n)
        return math.log(v) if v > 0 else -math.inf

    def to_json(self) -> dict:
        return {"family": "log"}

    def describe(self) -> str:
        return "log"


@dataclass(frozen=True)
class Constant(OmegaFn):
    c: float = 1.0
    family = "constant"

    def __post_init__(self):
        object.__setattr__(self, "c", float(self.c))
        if not (self.c >= 0 and math.isfinite(self.c)):
            raise ValueError("Constant needs a finite c >= 0")

    def eval(self, n: int) -> float:
        if n < 0:
            raise ValueError("omega is defined on non-negative integers")
        return self.c

    def log_eval(self, n: int) -> float:
        return math.log(self.c) if self.c > 0 else -math.inf

    def to_json(self) -> dict:
        return {"family": "constant", "c": repr(self.c)}

    def describe(self) -> str:
        return f"const:{self.c!r}"


@dataclass(frozen=True)
class Table(OmegaFn):
    """Explicit values ``omega(0), omega(1), ...`` extended by the last one."""

    values: tuple[float, ...] = field(default=(0.0,))
    family = "table"

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("Table needs at least one value")
        if any(v < 0 or not math.isfinite(v) for v in vals):
            raise ValueError("Table values must be finite and non-negative")
        if any(b < a for a, b in zip(vals, vals[1:])):
            raise ValueError("Table values must be non-decreasing")
        object.__setattr__(self, "values", vals)

    def eval(self, n: int) -> float:
        if n < 0:
            raise ValueError("omega is defined on non-negative integers")
        return self.values[min(n, len(self.values) - 1)]

    def log_eval(self, n: int) -> float:
        v = self.eval(n)
        return math.log(v) if v > 0 else -math.inf

    def to_json(self) -> dict:
        return {"family": "table", "values": [repr(v) for v in self.values]}

    def describe(self) -> str:
        return "table:" + ",".join(repr(v) for v in self.values)


def omega_from_json(obj: dict) -> OmegaFn:
    fam = obj["family"]
    if fam == "power":
        return Power(parse_fraction(obj["p"]))
    if fam == "powerlog":
        return PowerLog(parse_fraction(obj["p"]), parse_fraction(obj["q"]))
    if fam == "log":
        return Log()
    if fam == "constant":
        return Constant(float(obj["c"]))
    if fam == "table":
        return Table(tuple(float(v) for v in obj["values"]))
    raise ValueError(f"unknown omega family {fam!r}")


def parse_omega(text: str) -> OmegaFn:
    """CLI shorthand: ``power:1/2``, ``powerlog:1/2,-1``, ``log``, ``const:1``, ``table:0,1,1.5``."""
    text = text.strip()
    if text.startswith("{"):
        import json

        return omega_from_json(json.loads(text))
    fam, _, arg = text.partition(":")
    fam = fam.lower()
    if fam == "power":
        return Power(parse_fraction(arg))
    if fam == "powerlog":
        p, q = arg.split(",")
        return PowerLog(parse_fraction(p), parse_fraction(q))
    if fam == "log":
        return Log()
    if fam in ("const", "constant"):
        return Constant(float(arg or 1))
    if fam == "table":
        return Table(tuple(float(v) for v in arg.split(",")))
    raise ValueError(f"unknown omega {text!r}")


def weighted(weight: Fraction, omega: OmegaFn, n: int) -> float:
    """``weight * omega(n)`` as a float, without overflowing on huge ``n``."""
    if weight == 0:
        return 0.0
    try:
        w = float(weight)
    except OverflowError:
        w = math.inf
    if 1e-300 < w < 1e300:
        try:
            return w * omega.eval(n)
        except OmegaOverflow:
            pass
    lv = omega.log_eval(n)
    if lv == -math.inf:
        return 0.0
    out = math.exp(_log(weight.numerator) - _log(weight.denominator) + lv)
    if math.isinf(out):
        raise OmegaOverflow(f"weighted {omega.describe()} overflows")
    return out


@dataclass(frozen=True)
class NormValue:
    """Non-negative float built from exact rational weights and float omega values."""

    value: float
    note: str = "exact-rational weights x float omega"

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value >= 0):
            raise ValueError(f"norm value must be finite and non-negative, got {self.value}")

    def __float__(self) -> float:
        return self.value


def norm_from_counts(counts: Iterable[tuple[int, int]], size: int, omega: OmegaFn) -> NormValue:
    """Exact omega-norm of a cocycle from ``(|value|, multiplicity)`` pairs over ``[size]``."""
    terms = [weighted(Fraction(mult, size), omega, v) for v, mult in counts if mult]
    return NormValue(math.fsum(terms), "exact enumeration: rational counts x float omega")


def sublinearity_threshold(omega: OmegaFn, eps: float, cap: int = 2**64) -> int:
    """Least power of two ``N <= cap`` with ``omega(N)/N < eps``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not omega.sublinear:
        raise NotSublinear(f"{omega.describe()}: omega(n)/n does not tend to 0")
    target = math.log(eps)
    n = 1
    while n <= cap:
        if omega.log_eval(n) - _log(n) < target:
            return n
        n *= 2
    raise CapExceeded(f"{omega.describe()}: omega(n)/n >= {eps} for every power of two up to {cap}")
