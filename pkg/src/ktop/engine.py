"""Monotone enumeration machines, finite-support certificates, WSO searches,
and overt subsets.

A semidecidable subset of a countably based space is represented by a
:class:`MonotoneMachine` read through the neighborhood filter: the machine
watches the finite set of base indices enumerated so far and accepts once
that finite information suffices.  Acceptance is monotone in both the
observed set and the fuel, which is exactly Scott continuity.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional

from .errors import ContractViolation, InvalidCertificate, PremiseFailed
from .sigma import INFINITY, Exhausted, Found, OmegaBar, Semi, least_dovetail_galloping
from .spaces import ScottPoint


class MonotoneMachine:
    """Acceptor on finite observed sets: ``step(observed, fuel) -> bool``."""

    def __init__(self, step: Callable[[frozenset, int], bool], name: str | None = None):
        self._step = step
        self.name = name

    def step(self, observed: Iterable[int], fuel: int) -> bool:
        return bool(self._step(frozenset(observed), fuel))

    def __and__(self, other: "MonotoneMachine") -> "MonotoneMachine":
        return MonotoneMachine(lambda o, f: self._step(o, f) and other._step(o, f),
                               f"({self.name} AND {other.name})")

    def __or__(self, other: "MonotoneMachine") -> "MonotoneMachine":
        return MonotoneMachine(lambda o, f: self._step(o, f) or other._step(o, f),
                               f"({self.name} OR {other.name})")

    def __repr__(self) -> str:
        return f"MonotoneMachine({self.name or '?'})"

    @classmethod
    def has(cls, needed: Iterable[int], after: int = 0) -> "MonotoneMachine":
        """Accept once every element of ``needed`` is observed and fuel >= ``after``."""
        need = frozenset(needed)
        label = "HAS {" + ",".join(map(str, sorted(need))) + "}"
        if after:
            label += f" AFTER FUEL {after}"
        return cls(lambda o, f: need <= o and f >= after, label)

    @classmethod
    def always(cls) -> "MonotoneMachine":
        return cls(lambda o, f: True, "ALWAYS")

    @classmethod
    def never(cls) -> "MonotoneMachine":
        return cls(lambda o, f: False, "NEVER")

    @classmethod
    def any_of(cls, pred: Callable[[int], bool], name: str | None = None) -> "MonotoneMachine":
        """Accept once some observed index satisfies ``pred``."""
        return cls(lambda o, f: any(pred(i) for i in o), name)


@dataclass(frozen=True)
class SupportCertificate:
    """A finite support on which the machine accepts at ``fuel``.

    ``trace`` lists (index, stage of first observation) for the support.
    """

    support: frozenset
    fuel: int
    trace: tuple = ()

    def replay(self, m: MonotoneMachine) -> bool:
        return m.step(self.support, self.fuel)

    def sorted_support(self) -> list[int]:
        return sorted(self.support)


def accepts(m: MonotoneMachine, s: ScottPoint, budget: int) -> SupportCertificate | Exhausted:
    """Feed the enumeration of ``s`` to ``m`` and stop at the least stage that accepts.

    Stage f means the first f enumeration steps have been consumed and the
    fuel is f.  Galloping plus bisection finds the least stage, which is
    sound because acceptance is monotone in the stage.
    """
    seen: dict[int, bool] = {}

    def at(f: int) -> bool:
        if f not in seen:
            seen[f] = m.step(s.observed(f), f)
            ok = seen[f]
            for g, v in seen.items():
                if (g < f and v and not ok) or (g > f and ok and not v):
                    raise ContractViolation(f"{m!r} is not monotone between stages {g} and {f}")
        return seen[f]

    if at(0):
        f = 0
    else:
        lo, hi = 0, 1
        while True:
            hi = min(hi, budget)
            if at(hi):
                break
            if hi >= budget:
                return Exhausted(budget)
            lo, hi = hi, hi * 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if at(mid):
                hi = mid
            else:
                lo = mid
        f = hi
    # spot-check: acceptance must persist at a later stage
    at(min(budget, 2 * f + 1))
    trace = tuple(s.trace(f))
    return SupportCertificate(frozenset(v for v, _ in trace), f, trace)


def shrink_support(m: MonotoneMachine, c: SupportCertificate) -> SupportCertificate:
    """Greedy single-element removal down to an inclusion-minimal support.

    One pass suffices: if dropping e failed against a support S, it also
    fails against every subset of S, by monotonicity.
    """
    if not c.replay(m):
        raise InvalidCertificate(f"certificate does not replay on {m!r}")
    support = set(c.support)
    for e in sorted(c.support):
        trial = support - {e}
        if m.step(trial, c.fuel):
            support = trial
    trace = tuple(t for t in c.trace if t[0] in support)
    return SupportCertificate(frozenset(support), c.fuel, trace)


def check_monotone(m: MonotoneMachine, universe: Iterable[int], rng: random.Random,
                   trials: int = 50, max_fuel: int = 64) -> None:
    """Spot-check monotonicity on random subset/superset and fuel pairs."""
    pool = sorted(set(universe))
    for _ in range(trials):
        big = set(rng.sample(pool, rng.randint(0, len(pool))))
        small = set(rng.sample(sorted(big), rng.randint(0, len(big)))) if big else set()
        f1 = rng.randint(0, max_fuel)
        f2 = rng.randint(f1, max_fuel)
        if m.step(small, f1) and not m.step(big, f2):
            raise ContractViolation(
                f"{m!r} accepts {sorted(small)} at {f1} but not {sorted(big)} at {f2}")


def wso_search(f: Callable[[OmegaBar], ScottPoint], m: MonotoneMachine,
               budget: int) -> Found | Exhausted:
    """Find a finite n with ``m`` accepting ``f(n)``, given that it accepts ``f(inf)``.

    The run on ``f(inf)`` yields a certificate; the scan then replays ``m``
    on each ``f(n)`` at the certificate's fuel.  If the replay scan finds
    nothing, a full dovetail over (n, fuel) takes over.
    """
    cert = accepts(m, f(INFINITY), budget)
    if isinstance(cert, Exhausted):
        raise PremiseFailed(f"{m!r} does not accept f(inf) within {budget}")
    cache: dict[int, ScottPoint] = {}

    def point(n: int) -> ScottPoint:
        if n not in cache:
            cache[n] = f(OmegaBar.of(n))
        return cache[n]

    replay_limit = min(budget, 4 * cert.fuel + 64)
    for n in range(replay_limit + 1):
        if m.step(point(n).observed(cert.fuel), cert.fuel):
            return Found(n, cert.fuel, certificate=cert)
        if len(cache) > 256:
            cache.clear()
    hit = least_dovetail_galloping(lambda n, g: m.step(point(n).observed(g), g), budget)
    if hit is None:
        return Exhausted(budget)
    return Found(hit[0], hit[1], certificate=cert)


def initial_segments(t: OmegaBar) -> ScottPoint:
    """t -> {k : k < t}, the standard map from N-infinity into Sigma^N."""
    return ScottPoint.below(t)


class OvertSubset:
    """A subset given by an enumeration of its points, with skips (``None``)."""

    def __init__(self, enumerate: Callable[[int], Any], name: str | None = None):
        self._enumerate = enumerate
        self.name = name
        self._cache: dict[int, Any] = {}

    def enumerate(self, n: int):
        if n not in self._cache:
            self._cache[n] = self._enumerate(n)
        return self._cache[n]

    @classmethod
    def from_list(cls, points: list) -> "OvertSubset":
        pts = list(points)
        return cls(lambda n: pts[n] if n < len(pts) else None, name=f"list[{len(pts)}]")

    @classmethod
    def empty(cls) -> "OvertSubset":
        return cls(lambda n: None, name="empty")

    def __repr__(self) -> str:
        return f"OvertSubset({self.name or '?'})"


def overt_exists(t: OvertSubset, phi: Callable[[Any], Semi], budget: int) -> Found | Exhausted:
    """First hit of ``phi`` over the enumerated points, in pair(index, fuel) order."""
    semis: dict[int, Optional[Semi]] = {}

    def pred(i: int, g: int) -> bool:
        if i not in semis:
            p = t.enumerate(i)
            semis[i] = None if p is None else phi(p)
        s = semis[i]
        return s is not None and s.probe(g)

    hit = least_dovetail_galloping(pred, budget)
    if hit is None:
        return Exhausted(budget)
    i, g = hit
    return Found(t.enumerate(i), g, index=i)
