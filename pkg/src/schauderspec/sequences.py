"""Scalar sequence rules and strictly increasing index sequences.

Rules are lazy descriptions of infinite (or finite) sequences indexed
from 1.  Named families keep rational parameters exact, so window
equality checks elsewhere in the package stay exact rather than
floating point.  Each named family also knows enough about its own
tail to answer the three questions the certificate machinery asks:

* ``limit()`` -- the limit of the sequence, when the family determines it;
* ``tail_abs_sum(start)`` -- an upper bound on ``sum_{n>=start} |a_n|``,
  ``math.inf`` when the tail provably diverges, ``None`` when unknown;
* ``attains_zero()`` -- whether some term is exactly zero.

A rule built from a bare callable still evaluates, but answers ``None``
to the tail questions; downstream verdicts then degrade from certified
to numeric instead of silently overclaiming.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

Scalar = Union[int, float, complex, Fraction]

#: Probe cap used by zero-freeness searches on rules with vanishing tails.
_ZERO_SCAN_CAP = 200_000


def conjugate(z: Scalar) -> Scalar:
    """Complex conjugate that leaves exact reals exact."""
    if isinstance(z, complex):
        return z.conjugate()
    return z


def log_abs(z: Scalar) -> float:
    """log|z|, safe for exact rationals far outside float range."""
    if isinstance(z, Fraction):
        if z == 0:
            raise ValueError("log of zero")
        return math.log(abs(z.numerator)) - math.log(z.denominator)
    if isinstance(z, int):
        if z == 0:
            raise ValueError("log of zero")
        return math.log(abs(z))
    a = abs(z)
    if a == 0.0:
        raise ValueError("log of zero")
    return math.log(a)


def _abs_exact(z: Scalar):
    """|z| staying in exact arithmetic for real inputs."""
    if isinstance(z, complex):
        return abs(z)
    return -z if z < 0 else z


class ScalarRule:
    """A lazily evaluated scalar sequence ``n >= 1``."""

    def value(self, n: int) -> Scalar:
        raise NotImplementedError

    def values(self, count: int, start: int = 1) -> list:
        return [self.value(n) for n in range(start, start + count)]

    def length(self) -> Optional[int]:
        """Number of terms for finite rules, ``None`` for infinite ones."""
        return None

    def limit(self) -> Optional[Scalar]:
        return None

    def tail_abs_sum(self, start: int) -> Optional[float]:
        return None

    def attains_zero(self) -> Optional[bool]:
        return None

    def abs_nonincreasing(self) -> Optional[bool]:
        """Whether ``|value(n)|`` is nonincreasing in ``n``, if known."""
        return None

    def describe(self) -> str:
        return type(self).__name__


@dataclass(frozen=True)
class ConstantRule(ScalarRule):
    c: Scalar

    def value(self, n: int) -> Scalar:
        if n < 1:
            raise ValueError("rule index must be >= 1")
        return self.c

    def limit(self):
        return self.c

    def tail_abs_sum(self, start: int):
        return 0.0 if self.c == 0 else math.inf

    def attains_zero(self):
        return self.c == 0

    def abs_nonincreasing(self):
        return True

    def describe(self):
        return f"constant {self.c}"


@dataclass(frozen=True)
class GeometricRule(ScalarRule):
    """``a_n = scale * ratio**n``."""

    scale: Scalar
    ratio: Scalar

    def value(self, n: int) -> Scalar:
        if n < 1:
            raise ValueError("rule index must be >= 1")
        return self.scale * self.ratio ** n

    def limit(self):
        if self.scale == 0:
            return 0
        r = abs(self.ratio)
        if r < 1:
            return 0
        if self.ratio == 1:
            return self.scale
        return None

    def tail_abs_sum(self, start: int):
        if self.scale == 0:
            return 0.0
        r = abs(self.ratio)
        if r == 0:
            return 0.0
        if r >= 1:
            return math.inf
        # |scale| r^start / (1 - r), in log space to dodge underflow
        log_head = log_abs(self.scale) + start * math.log(r)
        return math.exp(log_head) / (1.0 - r)

    def attains_zero(self):
        if self.scale == 0 or self.ratio == 0:
            return True
        return False

    def abs_nonincreasing(self):
        return abs(self.ratio) <= 1

    def describe(self):
        return f"{self.scale} * ({self.ratio})^n"


@dataclass(frozen=True)
class PowerLawRule(ScalarRule):
    """``a_n = scale / n**exponent`` with ``exponent >= 0``."""

    scale: Scalar
    exponent: Union[int, float] = 1

    def __post_init__(self):
        if self.exponent < 0:
            raise ValueError("exponent must be >= 0")

    def value(self, n: int) -> Scalar:
        if n < 1:
            raise ValueError("rule index must be >= 1")
        p = self.exponent
        if isinstance(p, int) and isinstance(self.scale, (int, Fraction)):
            return self.scale * Fraction(1, n ** p)
        return self.scale / n ** p

    def limit(self):
        if self.scale == 0 or self.exponent > 0:
            return 0
        return self.scale

    def tail_abs_sum(self, start: int):
        if self.scale == 0:
            return 0.0
        p = self.exponent
        if p <= 1:
            return math.inf
        s = max(start, 1)
        # sum_{n>=s} n^-p  <=  s^-p + integral_s^inf x^-p dx
        bound = s ** (-p) + s ** (1 - p) / (p - 1)
        return float(abs(self.scale)) * bound

    def attains_zero(self):
        return self.scale == 0

    def abs_nonincreasing(self):
        return True

    def describe(self):
        return f"{self.scale} / n^{self.exponent}"


@dataclass(frozen=True)
class AffineRule(ScalarRule):
    """``a_n = base + inner(n)``; covers rules like ``alpha (1 - r^n)``."""

    base: Scalar
    inner: ScalarRule

    def value(self, n: int) -> Scalar:
        return self.base + self.inner.value(n)

    def limit(self):
        il = self.inner.limit()
        if il is None:
            return None
        return self.base + il

    def tail_abs_sum(self, start: int):
        if self.base == 0:
            return self.inner.tail_abs_sum(start)
        il = self.inner.limit()
        if il is not None and self.base + il != 0:
            return math.inf
        return None

    def attains_zero(self):
        if self.base == 0:
            return self.inner.attains_zero()
        if self.inner.limit() != 0 or self.inner.abs_nonincreasing() is not True:
            return None
        # |inner| shrinks below |base| eventually; only finitely many
        # indices can cancel the base, and those are checked exactly.
        target = _abs_exact(self.base)
        n = 1
        while n <= _ZERO_SCAN_CAP:
            v = self.inner.value(n)
            if _abs_exact(v) < target:
                break
            if self.base + v == 0:
                return True
            n += 1
        else:
            return None
        return False

    def abs_nonincreasing(self):
        return None

    def describe(self):
        return f"{self.base} + {self.inner.describe()}"


@dataclass(frozen=True)
class ScaledRule(ScalarRule):
    factor: Scalar
    inner: ScalarRule

    def value(self, n: int) -> Scalar:
        return self.factor * self.inner.value(n)

    def length(self):
        return self.inner.length()

    def limit(self):
        il = self.inner.limit()
        if il is None:
            return None
        return self.factor * il

    def tail_abs_sum(self, start: int):
        if self.factor == 0:
            return 0.0
        it = self.inner.tail_abs_sum(start)
        if it is None:
            return None
        return float(abs(self.factor)) * it

    def attains_zero(self):
        if self.factor == 0:
            return True
        return self.inner.attains_zero()

    def abs_nonincreasing(self):
        return self.inner.abs_nonincreasing()

    def describe(self):
        return f"{self.factor} * ({self.inner.describe()})"


@dataclass(frozen=True)
class OffsetRule(ScalarRule):
    """``a_n = inner(n + offset)`` -- drops the first ``offset`` terms."""

    inner: ScalarRule
    offset: int

    def __post_init__(self):
        if self.offset < 0:
            raise ValueError("offset must be >= 0")

    def value(self, n: int) -> Scalar:
        if n < 1:
            raise ValueError("rule index must be >= 1")
        return self.inner.value(n + self.offset)

    def length(self):
        il = self.inner.length()
        return None if il is None else max(il - self.offset, 0)

    def limit(self):
        return self.inner.limit()

    def tail_abs_sum(self, start: int):
        return self.inner.tail_abs_sum(start + self.offset)

    def attains_zero(self):
        # a zero confined to the dropped prefix is skipped, so a True
        # from the inner rule does not transfer
        az = self.inner.attains_zero()
        return False if az is False else None

    def abs_nonincreasing(self):
        return self.inner.abs_nonincreasing()

    def describe(self):
        return f"({self.inner.describe()}) shifted by {self.offset}"


@dataclass(frozen=True)
class RepeatedRule(ScalarRule):
    """Each inner term repeated ``times`` in a row."""

    inner: ScalarRule
    times: int = 2

    def __post_init__(self):
        if self.times < 1:
            raise ValueError("times must be >= 1")

    def value(self, n: int) -> Scalar:
        if n < 1:
            raise ValueError("rule index must be >= 1")
        return self.inner.value((n + self.times - 1) // self.times)

    def length(self):
        il = self.inner.length()
        return None if il is None else il * self.times

    def limit(self):
        return self.inner.limit()

    def tail_abs_sum(self, start: int):
        it = self.inner.tail_abs_sum((start + self.times - 1) // self.times)
        if it is None:
            return None
        return self.times * it

    def attains_zero(self):
        return self.inner.attains_zero()

    def abs_nonincreasing(self):
        return self.inner.abs_nonincreasing()

    def describe(self):
        return f"({self.inner.describe()}) each repeated {self.times}x"


@dataclass(frozen=True)
class ExplicitThenRule(ScalarRule):
    """Explicit prefix, then an optional rule-based tail.

    With ``tail=None`` the rule is finite; such rules are only legal
    inside finite cells of block direct sums.
    """

    prefix: tuple
    tail: Optional[ScalarRule] = None

    def value(self, n: int) -> Scalar:
        if n < 1:
            raise ValueError("rule index must be >= 1")
        if n <= len(self.prefix):
            return self.prefix[n - 1]
        if self.tail is None:
            raise ValueError(
                f"finite rule of length {len(self.prefix)} probed at {n}"
            )
        return self.tail.value(n - len(self.prefix))

    def length(self):
        if self.tail is None:
            return len(self.prefix)
        tl = self.tail.length()
        return None if tl is None else len(self.prefix) + tl

    def limit(self):
        if self.tail is None:
            return None
        return self.tail.limit()

    def tail_abs_sum(self, start: int):
        head = sum(
            float(abs(v)) for i, v in enumerate(self.prefix, 1) if i >= start
        )
        if self.tail is None:
            return head
        rest = self.tail.tail_abs_sum(max(start - len(self.prefix), 1))
        if rest is None:
            return None
        return head + rest

    def attains_zero(self):
        if any(v == 0 for v in self.prefix):
            return True
        if self.tail is None:
            return False
        return self.tail.attains_zero()

    def abs_nonincreasing(self):
        pre = [_abs_exact(v) for v in self.prefix]
        if any(pre[i] < pre[i + 1] for i in range(len(pre) - 1)):
            return False
        if self.tail is None:
            return True
        ti = self.tail.abs_nonincreasing()
        if ti is not True:
            return ti
        if pre and _abs_exact(self.tail.value(1)) > pre[-1]:
            return False
        return True

    def describe(self):
        tail = "end" if self.tail is None else self.tail.describe()
        return f"prefix {list(self.prefix)} then {tail}"


class CallableRule(ScalarRule):
    """Catch-all rule backed by a Python callable; no tail certificates."""

    def __init__(self, fn: Callable[[int], Scalar], description: str = "",
                 limit_hint: Optional[Scalar] = None):
        self._fn = fn
        self._description = description or "callable rule"
        self._limit_hint = limit_hint

    def value(self, n: int) -> Scalar:
        if n < 1:
            raise ValueError("rule index must be >= 1")
        return self._fn(n)

    def limit(self):
        return self._limit_hint

    def describe(self):
        return self._description


class MergedAbsDecreasingRule(ScalarRule):
    """Lazy merge of |.|-nonincreasing streams, largest magnitude first.

    Sources may be finite tuples (sorted here) or infinite rules whose
    magnitudes are nonincreasing.  The merged sequence is again
    |.|-nonincreasing; it backs the multiplicity-expansion paths.
    """

    def __init__(self, finite_parts: Sequence[Sequence[Scalar]] = (),
                 rule_parts: Sequence[ScalarRule] = ()):
        self._finite = [
            sorted(part, key=_abs_exact, reverse=True) for part in finite_parts
        ]
        for rule in rule_parts:
            if rule.abs_nonincreasing() is False:
                raise ValueError("rule source is not |.|-nonincreasing")
        self._rules = list(rule_parts)
        self._cache: list = []
        self._finite_pos = [0] * len(self._finite)
        self._rule_pos = [1] * len(self._rules)

    def _head(self, kind: str, i: int):
        if kind == "finite":
            pos = self._finite_pos[i]
            if pos >= len(self._finite[i]):
                return None
            return self._finite[i][pos]
        rule = self._rules[i]
        n = self._rule_pos[i]
        ln = rule.length()
        if ln is not None and n > ln:
            return None
        return rule.value(n)

    def _pull(self):
        best = None
        for kind, count in (("finite", len(self._finite)), ("rule", len(self._rules))):
            for i in range(count):
                head = self._head(kind, i)
                if head is None:
                    continue
                key = _abs_exact(head)
                if best is None or key > best[0]:
                    best = (key, kind, i, head)
        if best is None:
            raise ValueError("merged rule exhausted: all sources finite")
        _, kind, i, head = best
        if kind == "finite":
            self._finite_pos[i] += 1
        else:
            self._rule_pos[i] += 1
        self._cache.append(head)

    def value(self, n: int) -> Scalar:
        if n < 1:
            raise ValueError("rule index must be >= 1")
        while len(self._cache) < n:
            self._pull()
        return self._cache[n - 1]

    def length(self):
        total = sum(len(part) for part in self._finite)
        for rule in self._rules:
            ln = rule.length()
            if ln is None:
                return None
            total += ln
        return total

    def limit(self):
        if self._rules and all(r.limit() == 0 for r in self._rules):
            return 0
        return None

    def attains_zero(self):
        verdicts = [r.attains_zero() for r in self._rules]
        if any(any(v == 0 for v in part) for part in self._finite):
            return True
        if any(v is True for v in verdicts):
            return True
        if all(v is False for v in verdicts):
            return False
        return None

    def abs_nonincreasing(self):
        return True

    def describe(self):
        parts = [f"explicit {part}" for part in self._finite]
        parts += [r.describe() for r in self._rules]
        return "merge(" + "; ".join(parts) + ")"


# ---------------------------------------------------------------------------
# Strictly increasing index sequences (subsets of N written in order)
# ---------------------------------------------------------------------------


class IndexSequence:
    """A strictly increasing sequence of positive integers."""

    kind: str = "closed-form"

    def elem(self, n: int) -> int:
        raise NotImplementedError

    def position_of(self, value: int) -> Optional[int]:
        """The ``n`` with ``elem(n) == value``, or ``None``."""
        raise NotImplementedError

    def length(self) -> Optional[int]:
        return None

    def elems(self, count: int, start: int = 1) -> list:
        return [self.elem(n) for n in range(start, start + count)]

    def describe(self) -> str:
        return type(self).__name__


@dataclass(frozen=True)
class ArithmeticSequence(IndexSequence):
    start: int
    step: int

    kind = "arithmetic"

    def __post_init__(self):
        if self.start < 1 or self.step < 1:
            raise ValueError("arithmetic sequence needs start, step >= 1")

    def elem(self, n: int) -> int:
        if n < 1:
            raise ValueError("sequence index must be >= 1")
        return self.start + (n - 1) * self.step

    def position_of(self, value: int):
        if value < self.start:
            return None
        q, r = divmod(value - self.start, self.step)
        return q + 1 if r == 0 else None

    def describe(self):
        return f"{{{self.start}, {self.start + self.step}, ...}} step {self.step}"


@dataclass(frozen=True)
class ExplicitPrefixSequence(IndexSequence):
    """Explicit increasing prefix, then an optional rule-based tail.

    With ``tail=None`` the sequence is finite (legal for spread pieces
    recovered from a window and for finite block cells).
    """

    prefix: tuple
    tail: Optional[IndexSequence] = None

    kind = "explicit-prefix-then-rule"

    def __post_init__(self):
        if not self.prefix and self.tail is None:
            raise ValueError("empty sequence")
        for a, b in zip(self.prefix, self.prefix[1:]):
            if b <= a:
                raise ValueError("prefix must be strictly increasing")
        if self.prefix and self.prefix[0] < 1:
            raise ValueError("sequence elements must be >= 1")
        if self.tail is not None and self.prefix:
            if self.tail.elem(1) <= self.prefix[-1]:
                raise ValueError("tail must continue increasing past prefix")

    def elem(self, n: int) -> int:
        if n < 1:
            raise ValueError("sequence index must be >= 1")
        if n <= len(self.prefix):
            return self.prefix[n - 1]
        if self.tail is None:
            raise ValueError(
                f"finite sequence of length {len(self.prefix)} probed at {n}"
            )
        return self.tail.elem(n - len(self.prefix))

    def position_of(self, value: int):
        lo, hi = 0, len(self.prefix)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.prefix[mid] < value:
                lo = mid + 1
            else:
                hi = mid
        if lo < len(self.prefix) and self.prefix[lo] == value:
            return lo + 1
        if self.tail is None:
            return None
        pos = self.tail.position_of(value)
        return None if pos is None else pos + len(self.prefix)

    def length(self):
        if self.tail is None:
            return len(self.prefix)
        tl = self.tail.length()
        return None if tl is None else len(self.prefix) + tl

    def describe(self):
        tail = "end" if self.tail is None else self.tail.describe()
        return f"{list(self.prefix)} then {tail}"


class ClosedFormSequence(IndexSequence):
    """Sequence given by a closed-form callable ``n -> elem``."""

    kind = "closed-form"

    def __init__(self, fn: Callable[[int], int], description: str = ""):
        self._fn = fn
        self._description = description or "closed-form sequence"

    def elem(self, n: int) -> int:
        if n < 1:
            raise ValueError("sequence index must be >= 1")
        return self._fn(n)

    def position_of(self, value: int):
        # elem is strictly increasing with elem(n) >= n, so binary search
        # over [1, value] is exhaustive.
        lo, hi = 1, max(value, 1)
        while lo <= hi:
            mid = (lo + hi) // 2
            e = self.elem(mid)
            if e == value:
                return mid
            if e < value:
                lo = mid + 1
            else:
                hi = mid - 1
        return None

    def describe(self):
        return self._description


def naturals() -> ArithmeticSequence:
    return ArithmeticSequence(1, 1)


def odds() -> ArithmeticSequence:
    return ArithmeticSequence(1, 2)


def evens() -> ArithmeticSequence:
    return ArithmeticSequence(2, 2)
