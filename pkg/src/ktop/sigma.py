"""Semidecidable truth values as monotone fuel probes, partial values, N-infinity."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Any, Callable, Generic, Optional, TypeVar

from .errors import ContractViolation
from .kernel import pair

V = TypeVar("V")


# ---------------------------------------------------------------------------
# Search outcomes


@dataclass(frozen=True)
class Accepted:
    fuel: int


@dataclass(frozen=True)
class Found:
    value: Any
    fuel: int
    index: int | None = None
    certificate: Any = None


@dataclass(frozen=True)
class Exhausted:
    """The search ran out of budget.  This is not evidence of falsity."""

    budget: int

    def __bool__(self) -> bool:
        return False


# ---------------------------------------------------------------------------
# Semi


class Semi:
    """A semidecidable truth value, realised by a monotone probe on fuel.

    ``probe(f)`` is True when acceptance has been witnessed by stage ``f``;
    once True it stays True at every larger fuel.
    """

    __slots__ = ("_probe", "name")

    def __init__(self, probe: Callable[[int], bool], name: str | None = None):
        self._probe = probe
        self.name = name

    def probe(self, fuel: int) -> bool:
        return bool(self._probe(fuel))

    __call__ = probe

    def __and__(self, other: "Semi") -> "Semi":
        return and_(self, other)

    def __or__(self, other: "Semi") -> "Semi":
        return or_(self, other)

    def __repr__(self) -> str:
        return f"Semi({self.name or '?'})"

    @classmethod
    def scan(cls, check: Callable[[int], bool], name: str | None = None) -> "Semi":
        """Monotone closure of an arbitrary per-stage check: accept at f iff
        ``check(g)`` held for some g <= f."""
        return cls(_Scan(check), name)


class _Scan:
    def __init__(self, check):
        self.check = check
        self.first: int | None = None
        self.checked = -1
        self.lock = threading.Lock()

    def __call__(self, fuel: int) -> bool:
        with self.lock:
            if self.first is not None:
                return self.first <= fuel
            while self.checked < fuel:
                self.checked += 1
                if self.check(self.checked):
                    self.first = self.checked
                    return True
            return False


def top() -> Semi:
    return Semi(lambda f: True, "top")


def bot() -> Semi:
    return Semi(lambda f: False, "bot")


def and_(a: Semi, b: Semi) -> Semi:
    return Semi(lambda f: a.probe(f) and b.probe(f), f"({a.name} & {b.name})")


def or_(a: Semi, b: Semi) -> Semi:
    return Semi(lambda f: a.probe(f) or b.probe(f), f"({a.name} | {b.name})")


def _max_second(i: int, limit: int) -> int:
    """Largest g with pair(i, g) <= limit (caller ensures pair(i, 0) <= limit)."""
    lo, hi = 0, limit
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if pair(i, mid) <= limit:
            lo = mid
        else:
            hi = mid - 1
    return lo


def least_dovetail(pred: Callable[[int, int], bool], budget: int) -> tuple[int, int] | None:
    """Least ``k <= budget`` with ``pred(*unpair(k))``, for ``pred`` monotone in its
    second argument.  Agrees with a linear scan of k = 0, 1, 2, ... ."""
    best: int | None = None
    best_pair = None
    i = 0
    while True:
        limit = budget if best is None else min(budget, best - 1)
        if pair(i, 0) > limit:
            break
        gmax = _max_second(i, limit)
        if pred(i, gmax):
            lo, hi = 0, gmax
            while lo < hi:
                mid = (lo + hi) // 2
                if pred(i, mid):
                    hi = mid
                else:
                    lo = mid + 1
            best, best_pair = pair(i, lo), (i, lo)
        i += 1
    return best_pair


def least_dovetail_galloping(pred, budget: int) -> tuple[int, int] | None:
    """:func:`least_dovetail` with geometrically growing horizons; cheap when
    the answer is small."""
    horizon = 16
    while True:
        hit = least_dovetail(pred, min(horizon, budget))
        if hit is not None or horizon >= budget:
            return hit
        horizon *= 4


def join(seq: Callable[[int], Semi]) -> Semi:
    """Countable join, dovetailed: accepts at f iff ``seq(i)`` accepts at g
    for some ``pair(i, g) <= f``."""
    cache: dict[int, Semi] = {}

    def member(i: int) -> Semi:
        if i not in cache:
            cache[i] = seq(i)
        return cache[i]

    def probe(f: int) -> bool:
        i = 0
        while pair(i, 0) <= f:
            if member(i).probe(_max_second(i, f)):
                return True
            i += 1
        return False

    return Semi(probe, "join")


def markov_run(s: Semi, budget: int) -> Accepted | Exhausted:
    """Least accepting fuel <= budget, found by galloping then bisection."""
    if s.probe(0):
        return Accepted(0)
    lo, hi = 0, 1
    while True:
        hi = min(hi, budget)
        if s.probe(hi):
            break
        if hi >= budget:
            return Exhausted(budget)
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if s.probe(mid):
            hi = mid
        else:
            lo = mid
    return Accepted(hi)


# ---------------------------------------------------------------------------
# Partial values


class Lifted(Generic[V]):
    """A partial value whose definedness is semidecidable.

    ``probe(f)`` returns ``None`` while pending; once a value appears it is
    returned at every larger fuel.
    """

    def __init__(self, probe: Callable[[int], Optional[V]], name: str | None = None):
        self._probe = probe
        self.name = name

    def probe(self, fuel: int) -> Optional[V]:
        return self._probe(fuel)

    def defined(self) -> Semi:
        return Semi(lambda f: self._probe(f) is not None, f"defined({self.name})")

    def resolve(self, budget: int) -> Found | Exhausted:
        hit = markov_run(self.defined(), budget)
        if isinstance(hit, Exhausted):
            return hit
        return Found(self._probe(hit.fuel), hit.fuel)

    @classmethod
    def scan(cls, check: Callable[[int], Optional[V]], name: str | None = None) -> "Lifted[V]":
        """Stable closure of a per-stage check: the value from the least stage
        at which ``check`` produced one."""
        memo = _Scan(lambda g: check(g) is not None)

        def probe(f: int):
            return check(memo.first) if memo(f) else None

        return cls(probe, name)


def extraction(phi: Callable[[int], Semi], exists_evidence: Semi | None = None) -> Lifted[int]:
    """A partial natural resolving to a witness of ``phi``.

    The witness is the n of the least ``pair(n, g)`` with ``phi(n)``
    accepting at fuel g; it appears at exactly that stage.  When
    ``exists_evidence`` is omitted it is the dovetailed join of ``phi``; it
    is kept on the result as ``.evidence``.
    """
    cache: dict[int, Semi] = {}

    def member(n: int) -> Semi:
        if n not in cache:
            cache[n] = phi(n)
        return cache[n]

    def probe(f: int):
        hit = least_dovetail(lambda n, g: member(n).probe(g), f)
        return None if hit is None else hit[0]

    out = Lifted(probe, "extraction")
    out.evidence = exists_evidence if exists_evidence is not None else join(member)
    return out


# ---------------------------------------------------------------------------
# N-infinity


class OmegaBar:
    """An antimonotone binary sequence: a point of the one-point
    compactification of N.  ``bit(n) == 1`` iff ``n < t``."""

    def __init__(self, bit: Callable[[int], int], name: str | None = None,
                 finite: int | None = None, trusted: bool = False):
        self._bit = bit
        self._memo: list[int] = []
        self._lock = threading.Lock()
        self._trusted = trusted
        self.name = name
        self.finite_value = finite

    @classmethod
    def of(cls, n: int) -> "OmegaBar":
        """The element n-bar: n ones followed by zeros."""
        return cls(lambda i: 1 if i < n else 0, name=str(n), finite=n, trusted=True)

    @classmethod
    def infinity(cls) -> "OmegaBar":
        return cls(lambda i: 1, name="inf", trusted=True)

    def bit(self, n: int) -> int:
        if self._trusted:
            return self._bit(n)
        with self._lock:
            memo = self._memo
            while len(memo) <= n:
                b = 1 if self._bit(len(memo)) else 0
                if b and memo and memo[-1] == 0:
                    raise ContractViolation(
                        f"sequence {self.name} is not antimonotone at {len(memo)}")
                memo.append(b)
            return memo[n]

    def gt(self, n: int) -> bool:
        """Decide ``n < t``."""
        return self.bit(n) == 1

    def le(self, n: int) -> bool:
        """Decide ``t <= n``."""
        return self.bit(n) == 0

    def __repr__(self) -> str:
        return f"OmegaBar({self.name or '?'})"


INFINITY = OmegaBar.infinity()


def omega_lt_infty(t: OmegaBar) -> Semi:
    """The semidecidable truth value ``t < infinity``: accepts at f iff some
    bit at position <= f is zero."""
    return Semi(lambda f: t.bit(f) == 0, f"{t.name} < inf")


def retraction(alpha: Callable[[int], int]) -> OmegaBar:
    """Running minimum of a binary sequence, which is always antimonotone."""
    memo = [1]

    def bit(n: int) -> int:
        while len(memo) <= n + 1:
            k = len(memo) - 1
            memo.append(min(memo[-1], 1 if alpha(k) else 0))
        return memo[n + 1]

    return OmegaBar(bit, name="r(alpha)", trusted=True)
