"""Sobriety as an algorithm: recover points from neighborhood-filter oracles.

A :class:`FilterOracle` answers ``query(i, fuel)``, a fuel-monotone claim
that the hidden point lies in basic open ``i``.  For dyadic reals the point
is rebuilt as a chain of formally nested accepted balls of radius 2**-k.
For algebraic cpos it is the directed set of accepted compacts.  The
bounded checker tests the join, top and meet laws that characterise the
filters coming from genuine points.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from .errors import BudgetExhausted
from .kernel import pair, run, unpair, unzigzag, zigzag
from .sigma import Exhausted, Semi, least_dovetail_galloping
from .spaces import (AlgebraicCpo, CpoPoint, DyadicReal, Space, ball, ball_index,
                     formal_ball_inclusion)


class FilterOracle:
    """``query(i, fuel) -> bool``, monotone in fuel."""

    def __init__(self, query: Callable[[int, int], bool], name: str | None = None):
        self._query = query
        self.name = name

    def query(self, i: int, fuel: int) -> bool:
        return bool(self._query(i, fuel))

    __call__ = query

    def __repr__(self) -> str:
        return f"FilterOracle({self.name or '?'})"


def point_oracle(space: Space, x) -> FilterOracle:
    """The genuine filter of ``x``: index i is accepted iff x lies in B_i."""
    cache: dict[int, Semi] = {}
    lock = threading.Lock()

    def query(i: int, fuel: int) -> bool:
        with lock:
            s = cache.get(i)
            if s is None:
                s = cache[i] = space.base_member(i, x)
        return s.probe(fuel)

    return FilterOracle(query, name=f"nbh({x!r})")


def program_oracle(code: int) -> FilterOracle:
    """A kernel program as an oracle: accept i at fuel g when the program,
    run for g steps on some input pair(i, h) with h <= g, halts with a
    nonzero output."""

    def query(i: int, fuel: int) -> bool:
        return any(run(code, pair(i, h), fuel) not in (None, 0) for h in range(fuel + 1))

    return FilterOracle(query, name=f"program({code})")


def reject_all() -> FilterOracle:
    return FilterOracle(lambda i, f: False, name="reject")


# ---------------------------------------------------------------------------
# Dyadic reals


def _level_candidates(prev: Fraction, k: int):
    """Centres c with |c - prev| < 2**-k, coarse ones first, without repeats.

    Every such centre nests B(c, 2**-k) formally inside B(prev, 2**-(k-1)).
    """
    seen: set[Fraction] = set()
    j = 1
    while True:
        scale = Fraction(1, 1 << (k + j))
        order = [0]
        for m in range(1, 1 << j):
            order += [m, -m]
        for m in order:
            c = prev + m * scale
            if c not in seen:
                seen.add(c)
                yield c
        j += 1


class _Lazy:
    """Memoised prefix of a generator, indexable by position."""

    def __init__(self, gen):
        self.gen = gen
        self.items: list = []

    def __getitem__(self, n: int):
        while len(self.items) <= n:
            self.items.append(next(self.gen))
        return self.items[n]


@dataclass(frozen=True)
class ChainLink:
    index: int
    center: Fraction
    radius: Fraction
    fuel: int


class RecoveredReal(DyadicReal):
    """A real rebuilt from a filter oracle.

    ``approx(k)`` is the centre of the k-th accepted ball; levels beyond
    those searched up front are found on demand with the same per-level
    budget, raising :class:`BudgetExhausted` if the search fails.
    """

    def __init__(self, oracle: FilterOracle, level_budget: int):
        self.oracle = oracle
        self.level_budget = level_budget
        self.chain: list[ChainLink] = []
        self._lock = threading.RLock()
        super().__init__(self._center, name=f"recovered({oracle.name})")

    def _center(self, k: int) -> Fraction:
        return self.link(k).center

    def link(self, k: int) -> ChainLink:
        with self._lock:
            while len(self.chain) <= k:
                nxt = _search_level(self.oracle, self.chain, self.level_budget)
                if nxt is None:
                    raise BudgetExhausted(
                        f"no nested accepted ball at level {len(self.chain)}", self.level_budget)
                self.chain.append(nxt)
            return self.chain[k]

    def certificate(self) -> list[ChainLink]:
        return list(self.chain)


def _search_level(p: FilterOracle, chain: list[ChainLink], budget: int) -> ChainLink | None:
    k = len(chain)
    if k == 0:
        def index(n: int) -> int:
            return pair(n, 0)
    else:
        cands = _Lazy(_level_candidates(chain[-1].center, k))

        def index(n: int) -> int:
            return ball_index(cands[n], k)

    hit = least_dovetail_galloping(lambda n, g: p.query(index(n), g), budget)
    if hit is None:
        return None
    i = index(hit[0])
    c, r = ball(i)
    return ChainLink(i, c, r, hit[1])


def recover_real(p: FilterOracle, budget: int, precision: int = 10) -> RecoveredReal | Exhausted:
    """Rebuild a dyadic real from its claimed neighbourhood filter.

    Levels 0..precision are searched eagerly, each within ``budget``
    dovetail stages.  An oracle with no accepted nested ball at some level
    yields :class:`Exhausted`; a wrong point is never returned.
    """
    x = RecoveredReal(p, budget)
    try:
        x.link(precision)
    except BudgetExhausted:
        return Exhausted(budget)
    return x


def verify_chain(chain: Sequence[ChainLink], p: FilterOracle | None = None) -> bool:
    """Re-check a recovery certificate: radii 2**-k, formal nesting, and
    (given the oracle) acceptance of each ball at its recorded fuel."""
    for k, link in enumerate(chain):
        if ball(link.index) != (link.center, link.radius) or link.radius != Fraction(1, 1 << k):
            return False
        if k and not formal_ball_inclusion((link.center, link.radius),
                                           (chain[k - 1].center, chain[k - 1].radius)):
            return False
        if p is not None and not p.query(link.index, link.fuel):
            return False
    return True


# ---------------------------------------------------------------------------
# Algebraic cpos


def recover_cpo_point(p: FilterOracle, cpo: AlgebraicCpo, budget: int) -> CpoPoint:
    """The point enumerating every compact whose up-set ``p`` accepts.

    Stage pair(i, g) emits i when ``p`` accepts the up-set of i at fuel g.
    Stages past ``budget`` emit nothing, so the enumeration is total.
    """

    def enum(k: int) -> Optional[int]:
        if k > budget:
            return None
        i, g = unpair(k)
        if cpo.size is not None and i >= cpo.size:
            return None
        return i if p.query(i, g) else None

    return CpoPoint(enum, name=f"recovered({p.name})")


def cpo_value(point: CpoPoint, cpo: AlgebraicCpo, fuel: int) -> int:
    """Supremum of the compacts enumerated by ``point`` within ``fuel`` stages
    (finite cpos only)."""
    return cpo.sup(point.observed(fuel))


def cpo_oracle(cpo: AlgebraicCpo, z: int) -> FilterOracle:
    """The filter of compact ``z``: accept the up-set of i iff i <= z."""
    return FilterOracle(lambda i, f: cpo.leq(i, z), name=f"up-filter({z})")


# ---------------------------------------------------------------------------
# Bounded sigma-homomorphism checker


@dataclass(frozen=True)
class LawVerdict:
    sample: int
    law: str          # "join", "top" or "meet"
    status: str       # "pass", "fail" or "inconclusive"
    detail: str = ""


@dataclass
class FilterLawReport:
    verdicts: list[LawVerdict] = field(default_factory=list)

    @property
    def failures(self) -> list[LawVerdict]:
        return [v for v in self.verdicts if v.status == "fail"]

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> dict[str, int]:
        out = {"pass": 0, "fail": 0, "inconclusive": 0}
        for v in self.verdicts:
            out[v.status] += 1
        return out


def _k(p: FilterOracle, t: Iterable[int], fuel: int) -> bool:
    """K(S, T) at bounded fuel: some index of T is accepted."""
    return any(p.query(i, fuel) for i in t)


def _covers(space: Space, t: Iterable[int], y, fuel: int) -> bool:
    return any(space.base_member(i, y).probe(fuel) for i in t)


def _compare(p, lhs, rhs, fuel):
    """pass when both sides agree at ``fuel``, inconclusive when they only
    agree at 4 * fuel, fail otherwise."""
    if lhs(fuel) == rhs(fuel):
        return "pass", ""
    if lhs(4 * fuel) == rhs(4 * fuel):
        return "inconclusive", f"sides agree only at fuel {4 * fuel}"
    return "fail", f"sides disagree at fuel {fuel} and {4 * fuel}"


def check_filter_laws(p: FilterOracle, space: Space, samples: Sequence[tuple], fuel: int,
                      points: Sequence | None = None, seed: int = 0,
                      horizon: int = 256) -> FilterLawReport:
    """Spot-check the laws singling out genuine point filters.

    For each sample ``(T, T1, T2)`` of finite index sets:

    * join: if T and T1 cover the same sample points, K(T) == K(T1);
    * top: some index below ``horizon`` is accepted (K(S, N) with N truncated);
    * meet: if T and T1 overlap exactly on T2 at the sample points,
      K(T) and K(T1) == K(T2).

    Premises are evaluated at fuel ``horizon`` on ``points`` (by default 64
    seeded samples of the space) together with the space's witness points for
    the indices in the sample, so small balls are not missed.  A premise refuted there makes the law hold
    vacuously, recorded as a pass.
    """
    report = FilterLawReport()
    if not samples:
        return report
    if points is None:
        points = space.sample_points(random.Random(seed), 64)

    def cover(t, pts):
        return [_covers(space, t, y, horizon) for y in pts]

    if any(p.query(i, fuel) for i in range(horizon)):
        top = ("pass", "")
    elif any(p.query(i, 4 * fuel) for i in range(horizon)):
        top = ("inconclusive", f"first accepted index below {horizon} needs fuel {4 * fuel}")
    else:
        top = ("fail", f"no index below {horizon} accepted at fuel {4 * fuel}")
    for n, (t, t1, t2) in enumerate(samples):
        t, t1, t2 = list(t), list(t1), list(t2)
        pts = list(points) + space.witness_points(t + t1 + t2)
        c, c1, c2 = cover(t, pts), cover(t1, pts), cover(t2, pts)

        if c == c1:
            status, detail = _compare(p, lambda f: _k(p, t, f), lambda f: _k(p, t1, f), fuel)
        else:
            status, detail = "pass", "premise refuted on sample points"
        report.verdicts.append(LawVerdict(n, "join", status, detail))

        report.verdicts.append(LawVerdict(n, "top", *top))

        if [a and b for a, b in zip(c, c1)] == c2:
            status, detail = _compare(p, lambda f: _k(p, t, f) and _k(p, t1, f),
                                      lambda f: _k(p, t2, f), fuel)
        else:
            status, detail = "pass", "premise refuted on sample points"
        report.verdicts.append(LawVerdict(n, "meet", status, detail))
    return report


def real_law_samples(rng: random.Random, n: int) -> list[tuple[list[int], list[int], list[int]]]:
    """Random samples for the reals whose premises genuinely hold.

    Join samples add a sub-ball to a random family.  Meet samples use two
    balls of radius r whose centres are r apart; their overlap is the ball
    of radius r/2 midway.
    """
    out = []
    for s in range(n):
        p = rng.randint(0, 4)
        r = Fraction(1, 1 << p)
        c = Fraction(rng.randint(-16, 16), 8)
        if s % 2 == 0:
            t = [ball_index(c, p)] + [ball_index(Fraction(rng.randint(-16, 16), 8), rng.randint(0, 4))
                                      for _ in range(rng.randint(0, 2))]
            sub = ball_index(c + r / 4, p + 1)
            out.append((t, t + [sub], t))
        else:
            out.append(([ball_index(c, p)], [ball_index(c + r, p)], [ball_index(c + r / 2, p + 1)]))
    return out


def single_ball_oracle(index: int) -> FilterOracle:
    """An oracle accepting exactly one index; not a point filter."""
    return FilterOracle(lambda i, f: i == index, name=f"only({index})")


def meet_violation_sample(index: int) -> tuple[list[int], list[int], list[int]]:
    """A triple on which :func:`single_ball_oracle` breaks the meet law:
    another code of the same ball as ``index``."""
    c, r = ball(index)
    code, prec = unpair(index)
    zm, j = unpair(code)
    other = pair(pair(zigzag(unzigzag(zm) * 2), j + 1), prec)
    assert ball(other) == (c, r)
    return [index], [index], [other]
