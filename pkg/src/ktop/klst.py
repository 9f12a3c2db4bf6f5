"""Regularity witnesses, separation witnesses, and modulus-of-continuity extraction.

The modulus extractor follows the separation route: around f(x) build an
inner ball S and an outer region T that cannot meet it; pull S back to a
monotone machine on the domain's neighbourhood filter, pull T back to an
overt set of dense dyadics, and ask for a finite family of basic balls
around x that the machine accepts and no enumerated point of the pulled
back T enters.  The intersection of that family gives delta.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

from .engine import MonotoneMachine, OvertSubset, SupportCertificate, accepts, shrink_support
from .errors import BadBound, ContradictionDetected, PremiseFailed
from .expr import Expr
from .sigma import Exhausted, Semi
from .spaces import DyadicReal, RealSpace, Space, ball, dense

Ball = tuple[Fraction, Fraction]


def _floor_to(q: Fraction, m: int) -> Fraction:
    return Fraction((q.numerator << m) // q.denominator, 1 << m)


def _ceil_to(q: Fraction, m: int) -> Fraction:
    return Fraction(-((-q.numerator << m) // q.denominator), 1 << m)


def _pow2_at_most(q: Fraction) -> int:
    """Least k with 2**-k <= q (q > 0)."""
    k = 0
    while Fraction(1, 1 << k) > q:
        k += 1
    return k


@dataclass(frozen=True)
class RegularityWitness:
    """Inner ball S around x and outer region T = {z : |z - y| > t}.

    S and T are disjoint and B(y, r) together with T covers the line.
    """

    inner: Ball
    center: Fraction
    radius: Fraction
    q_upper: Fraction
    t: Fraction

    def in_inner(self, z: Fraction) -> bool:
        c, s = self.inner
        return abs(Fraction(z) - c) < s

    def in_outer(self, z: Fraction) -> bool:
        return abs(Fraction(z) - self.center) > self.t

    def outer_member(self, z: DyadicReal) -> Semi:
        """Semidecide |z - y| > t from approximations."""
        y, t = self.center, self.t
        return Semi.scan(lambda k: abs(z.approx(k) - y) - Fraction(1, 1 << k) > t, "in T")

    def outer_cover(self, n: int) -> Optional[int]:
        """n-th member of the countable ball cover of T, or None (skip).

        Ball index pair(c, p) belongs when |dense(c) - y| > 2**-p + t.
        """
        c, r = ball(n)
        return n if abs(c - self.center) > r + self.t else None


def regularity_witness(x: DyadicReal, y, r, q_upper) -> RegularityWitness:
    """Separate x from the outside of B(y, r) given q_upper >= d(x, y).

    The radii (r - q)/3 and (2r + q)/3 are rounded to the coarsest dyadic
    grid 2**-m for which the inner radius stays positive and the outer
    bound stays below r: inner rounded down, outer rounded up.
    """
    y, r, q = Fraction(y), Fraction(r), Fraction(q_upper)
    if q >= r:
        raise BadBound(f"distance bound {q} is not below the radius {r}")
    if q < 0:
        raise BadBound("distance bound is negative")
    m = 0
    while True:
        s = _floor_to((r - q) / 3, m)
        t = _ceil_to((2 * r + q) / 3, m)
        if s > 0 and t < r:
            break
        m += 1
    if x.exact is not None:
        if abs(x.exact - y) > q:
            raise BadBound(f"d(x, y) = {abs(x.exact - y)} exceeds the bound {q}")
        inner = (x.exact, s)
    else:
        k = _pow2_at_most(s / 4)
        a, e = x.approx(k), Fraction(1, 1 << k)
        if abs(a - y) - e > q:
            raise BadBound(f"approximation at precision {k} shows d(x, y) > {q}")
        # |x - a| <= e <= s/4, so x is inside and the ball stays inside B(x, s)
        inner = (a, s - e)
    return RegularityWitness(inner, y, r, q, t)


@dataclass(frozen=True)
class SeparationWitness:
    indices: frozenset
    certificate: SupportCertificate
    depth: int = 0

    def sorted_indices(self) -> list[int]:
        return sorted(self.indices)


def spreen_witness(x: Any, S: MonotoneMachine, T: OvertSubset, space: Space, budget: int,
                   depth: int = 200, shrink: bool = True,
                   check_fuel: int = 64) -> SeparationWitness:
    """A finite family of basic opens containing x whose intersection misses T.

    The family is the support on which ``S`` accepts the neighbourhood
    filter of x.  T's first ``depth`` enumerated points are checked against
    the intersection (membership probed at ``check_fuel``); a hit refutes
    the caller's claim that S and T are disjoint.
    """
    cert = accepts(S, space.nbh(x), budget)
    if isinstance(cert, Exhausted):
        raise PremiseFailed(f"{S!r} does not accept the neighbourhood filter within {budget}")
    if shrink:
        cert = shrink_support(S, cert)
    members = sorted(cert.support)
    for n in range(depth):
        z = T.enumerate(n)
        if z is None:
            continue
        if all(space.base_member(i, z).probe(check_fuel) for i in members):
            raise ContradictionDetected(
                z, f"T point {z!r} lies in the witness {members}; S and T are not disjoint")
    return SeparationWitness(frozenset(members), cert, depth)


# ---------------------------------------------------------------------------
# Modulus of continuity


def _intersection(indices) -> tuple[Fraction, Fraction] | None:
    """Open interval cut out by the dyadic balls with these indices."""
    lo = hi = None
    for i in indices:
        c, r = ball(i)
        lo = c - r if lo is None else max(lo, c - r)
        hi = c + r if hi is None else min(hi, c + r)
    if lo is None:
        return None
    return lo, hi


def preimage_machine(f: Expr, target: Ball) -> MonotoneMachine:
    """f^{-1}(B(c, s)) over the dyadic-ball base: accept once the observed
    balls pin x to an interval whose enclosure under f lies inside the ball.

    Monotone because enclosures shrink when the interval does.
    """
    c, s = target

    def step(observed, fuel):
        iv = _intersection(observed)
        if iv is None:
            return False
        if iv[0] >= iv[1]:
            return True  # empty intersection: vacuously inside
        lo, hi = f.enclose(*iv)
        return c - s < lo and hi < c + s

    return MonotoneMachine(step, f"preimage of B({c},{s})")


def preimage_overt(f: Expr, w: RegularityWitness) -> OvertSubset:
    """Dense dyadics d with f(d) in T, as an overt set (others are skips)."""

    def enum(n: int):
        d = dense(n)
        return DyadicReal.from_fraction(d) if w.in_outer(f.exact(d)) else None

    return OvertSubset(enum, name="preimage of T")


@dataclass(frozen=True)
class Modulus:
    at: Any
    epsilon: Fraction
    delta: Fraction
    trace: dict = field(default_factory=dict, compare=False)


def modulus(f: Expr, x: DyadicReal, eps, budget: int, depth: int = 200) -> Modulus | Exhausted:
    """delta > 0 with |z - x| < delta implying |f(z) - f(x)| < eps."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    fx = f.apply(x)
    if fx.exact is not None:
        y, q = fx.exact, Fraction(0)
    else:
        k = _pow2_at_most(eps / 8)
        y, q = fx.approx(k), Fraction(1, 1 << k)
    w = regularity_witness(fx, y, eps, q)
    space = RealSpace()
    try:
        sep = spreen_witness(x, preimage_machine(f, w.inner), preimage_overt(f, w), space,
                             budget, depth=depth)
    except PremiseFailed:
        return Exhausted(budget)
    delta = _delta_from(sep.indices, x)
    return Modulus(x, eps, delta, {"regularity": w, "witness": sep})


def _delta_from(indices, x: DyadicReal) -> Fraction:
    """min over the balls of (radius - distance to centre), under-approximated."""
    if not indices:
        return Fraction(1)
    k = 0
    while True:
        a, e = (x.exact, Fraction(0)) if x.exact is not None else (x.approx(k), Fraction(1, 1 << k))
        gaps = []
        for i in indices:
            c, r = ball(i)
            gaps.append(r - abs(a - c) - e)
        d = min(gaps)
        if d > 0:
            return d
        if x.exact is not None:
            raise BadBound("witness ball does not contain the point")
        k += 1


@dataclass(frozen=True)
class GridReport:
    checked: int
    violations: list


def grid_check(f: Expr, x, eps, delta, pitch: int = 12) -> GridReport:
    """Exact check of |f(g) - f(x)| < eps at every g = m / 2**pitch with |g - x| < delta."""
    x = Fraction(x.exact if isinstance(x, DyadicReal) else x)
    if not (x.denominator & (x.denominator - 1) == 0):
        raise ValueError("grid check needs a dyadic point")
    eps, delta = Fraction(eps), Fraction(delta)
    fx = f.exact(x)
    scale = 1 << pitch
    lo = (x - delta) * scale
    hi = (x + delta) * scale
    m = lo.numerator // lo.denominator
    bad, n = [], 0
    while Fraction(m) < hi:
        g = Fraction(m, scale)
        if abs(g - x) < delta:
            n += 1
            if not abs(f.exact(g) - fx) < eps:
                bad.append(g)
        m += 1
    return GridReport(n, bad)
