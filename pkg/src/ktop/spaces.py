"""Countably based represented spaces.

Every space exposes a countable base of semidecidable membership tests,
``base_member(i, x)``, together with ``base_refine`` (the pointwise-base
law) and the basic neighborhood filter ``nbh(x)``, an enumeration of the
indices i with x in B_i.

Base index codings:

* Cantor space: prefix ``a`` has index ``int('1' + a, 2) - 1``.
* Baire space: prefix ``[a0, ..., an]`` has index ``encode_seq(prefix)``.
* dyadic reals: ``pair(c, p)`` is the ball B(dense(c), 2**-p), where
  ``dense(pair(zigzag(m), j)) = m / 2**j``.
* Scott domain of sets of naturals: a finite set F has index
  ``sum(2**e for e in F)``.
* algebraic cpos: index i is the basic open up-set of compact element i.
"""

from __future__ import annotations

import random
import threading
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Any, Callable, Iterable, Optional

from .errors import NotDirected
from .kernel import decode_seq, encode_seq, pair, unpair, unzigzag, zigzag
from .sigma import Lifted, Semi

# ---------------------------------------------------------------------------
# Memoised streams


class _Stream:
    """Pure user function on naturals, memoised on a growing prefix."""

    def __init__(self, fn: Callable[[int], Any]):
        self.fn = fn
        self.values: list = []
        self.lock = threading.Lock()

    def __call__(self, n: int):
        with self.lock:
            vals = self.values
            while len(vals) <= n:
                vals.append(self.fn(len(vals)))
            return vals[n]

    def prefix(self, n: int) -> list:
        if n > 0:
            self(n - 1)
        return self.values[:n]


# ---------------------------------------------------------------------------
# Scott points (elements of Sigma^N)


def set_code(finite: Iterable[int]) -> int:
    code = 0
    for e in set(finite):
        code |= 1 << e
    return code


def code_set(code: int) -> frozenset[int]:
    out, e = [], 0
    while code:
        if code & 1:
            out.append(e)
        code >>= 1
        e += 1
    return frozenset(out)


class ScottPoint:
    """A set of naturals given by an enumeration that may skip (``None``)."""

    def __init__(self, enum: Callable[[int], Optional[int]], name: str | None = None):
        self._enum = _Stream(enum)
        self.name = name
        self._first_seen: dict[int, int] = {}
        self._scanned = 0
        self._lock = threading.Lock()

    def enum(self, n: int) -> Optional[int]:
        return self._enum(n)

    def _scan_to(self, fuel: int) -> None:
        with self._lock:
            while self._scanned < fuel:
                v = self._enum(self._scanned)
                if v is not None and v not in self._first_seen:
                    self._first_seen[v] = self._scanned
                self._scanned += 1

    def observed(self, fuel: int) -> frozenset[int]:
        """Values produced by the first ``fuel`` enumeration steps."""
        self._scan_to(fuel)
        return frozenset(v for v, at in self._first_seen.items() if at < fuel)

    def trace(self, fuel: int) -> list[tuple[int, int]]:
        """(value, step of first appearance) for the first ``fuel`` steps, in order."""
        self._scan_to(fuel)
        return sorted(((v, at) for v, at in self._first_seen.items() if at < fuel),
                      key=lambda t: t[1])

    def first_seen(self, value: int, fuel: int) -> int | None:
        self._scan_to(fuel)
        at = self._first_seen.get(value)
        return at if at is not None and at < fuel else None

    def __repr__(self) -> str:
        return f"ScottPoint({self.name or '?'})"

    @classmethod
    def finite(cls, values: Iterable[int]) -> "ScottPoint":
        vals = sorted(set(values))
        return cls(lambda n: vals[n] if n < len(vals) else None,
                   name="{" + ",".join(map(str, vals)) + "}")

    @classmethod
    def naturals(cls) -> "ScottPoint":
        return cls(lambda n: n, name="naturals")

    @classmethod
    def evens(cls) -> "ScottPoint":
        return cls(lambda n: 2 * n, name="evens")

    @classmethod
    def progression(cls, start: int, step: int) -> "ScottPoint":
        return cls(lambda n: start + step * n, name=f"{start}+{step}n")

    @classmethod
    def primes(cls) -> "ScottPoint":
        return cls(lambda n: n if _is_prime(n) else None, name="primes")

    @classmethod
    def below(cls, t) -> "ScottPoint":
        """{k : k < t} for t in N-infinity."""
        return cls(lambda k: k if t.gt(k) else None, name=f"below({t.name})")


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


# ---------------------------------------------------------------------------
# Space interface


class Space(ABC):
    name = "space"

    @abstractmethod
    def base_member(self, i: int, x) -> Semi:
        ...

    @abstractmethod
    def base_refine(self, i: int, j: int, x) -> Lifted[int]:
        ...

    def nbh_enumerate(self, x) -> Callable[[int], Optional[int]]:
        """Enumeration of the basic neighborhood filter: stage pair(i, g)
        emits i when x is witnessed in B_i at fuel g."""
        cache: dict[int, Semi] = {}
        lock = threading.Lock()

        def enum(k: int) -> Optional[int]:
            i, g = unpair(k)
            with lock:
                semi = cache.get(i)
                if semi is None:
                    semi = cache[i] = self.base_member(i, x)
            return i if semi.probe(g) else None

        return enum

    def nbh(self, x) -> ScottPoint:
        return ScottPoint(self.nbh_enumerate(x), name=f"nbh({x!r})")

    embed = nbh

    def sample_points(self, rng: random.Random, n: int) -> list:
        raise NotImplementedError

    def witness_points(self, indices: Iterable[int]) -> list:
        """Points characteristic of the given basic opens (none by default)."""
        return []

    def describe_index(self, i: int) -> str:
        return str(i)


def nbh(x, space: Space) -> ScottPoint:
    return space.nbh(x)


def embed(x, space: Space) -> ScottPoint:
    """The universal embedding into Sigma^N; the same map as :func:`nbh`."""
    return space.nbh(x)


# ---------------------------------------------------------------------------
# Cantor and Baire space


class CantorPoint:
    def __init__(self, stream: Callable[[int], int], name: str | None = None):
        self.stream = _Stream(lambda n: 1 if stream(n) else 0)
        self.name = name

    def prefix(self, n: int) -> str:
        return "".join(map(str, self.stream.prefix(n)))

    @classmethod
    def eventually(cls, head: str, cycle: str = "0") -> "CantorPoint":
        """The sequence ``head`` followed by ``cycle`` repeated forever."""
        if not cycle:
            raise ValueError("empty cycle")
        return cls(lambda n: int(head[n]) if n < len(head) else int(cycle[(n - len(head)) % len(cycle)]),
                   name=f"{head}({cycle})*")

    def __repr__(self) -> str:
        return f"CantorPoint({self.name or self.prefix(8) + '...'})"


def prefix_code(a: str) -> int:
    return int("1" + a, 2) - 1


def code_prefix(i: int) -> str:
    return bin(i + 1)[3:]


class CantorSpace(Space):
    name = "cantor"

    def base_member(self, i: int, x: CantorPoint) -> Semi:
        a = code_prefix(i)
        inside = x.prefix(len(a)) == a
        n = len(a)
        return Semi(lambda f: inside and f >= n, f"{x!r} in [{a}]")

    def base_refine(self, i: int, j: int, x: CantorPoint) -> Lifted[int]:
        a, b = code_prefix(i), code_prefix(j)
        longer = a if len(a) >= len(b) else b
        ok = x.prefix(len(longer)) == longer and longer.startswith(a) and longer.startswith(b)
        n = len(longer)
        return Lifted(lambda f: prefix_code(longer) if ok and f >= n else None)

    def sample_points(self, rng, n):
        pts = []
        for _ in range(n):
            head = "".join(rng.choice("01") for _ in range(rng.randint(0, 12)))
            cycle = "".join(rng.choice("01") for _ in range(rng.randint(1, 3)))
            pts.append(CantorPoint.eventually(head, cycle))
        return pts

    def describe_index(self, i):
        return f"[{code_prefix(i)}]"


class BairePoint:
    def __init__(self, stream: Callable[[int], int], name: str | None = None):
        self.stream = _Stream(stream)
        self.name = name

    def prefix(self, n: int) -> list[int]:
        return self.stream.prefix(n)

    def __repr__(self) -> str:
        return f"BairePoint({self.name or self.prefix(5)})"


class BaireSpace(Space):
    name = "baire"

    @staticmethod
    def _prefix(i: int) -> list[int] | None:
        return decode_seq(i)

    def base_member(self, i: int, x: BairePoint) -> Semi:
        a = self._prefix(i)
        if a is None:
            return Semi(lambda f: False, "malformed prefix code")
        inside = x.prefix(len(a)) == a
        n = len(a)
        return Semi(lambda f: inside and f >= n, f"{x!r} in {a}")

    def base_refine(self, i, j, x):
        a, b = self._prefix(i), self._prefix(j)
        if a is None or b is None:
            return Lifted(lambda f: None)
        longer = a if len(a) >= len(b) else b
        ok = x.prefix(len(longer)) == longer and longer[:len(a)] == a and longer[:len(b)] == b
        n = len(longer)
        return Lifted(lambda f: encode_seq(longer) if ok and f >= n else None)

    def sample_points(self, rng, n):
        pts = []
        for _ in range(n):
            head = [rng.randint(0, 5) for _ in range(rng.randint(0, 6))]
            pts.append(BairePoint(lambda k, h=head: h[k] if k < len(h) else 0, name=str(head)))
        return pts


# ---------------------------------------------------------------------------
# Dyadic reals


def is_dyadic(q: Fraction) -> bool:
    d = q.denominator
    return d & (d - 1) == 0


def dense(c: int) -> Fraction:
    """The c-th element of the dense sequence of dyadic rationals."""
    zm, j = unpair(c)
    return Fraction(unzigzag(zm), 1 << j)


def center_code(q: Fraction) -> int:
    q = Fraction(q)
    if not is_dyadic(q):
        raise ValueError(f"{q} is not a dyadic rational")
    j = q.denominator.bit_length() - 1
    return pair(zigzag(q.numerator), j)


def ball(i: int) -> tuple[Fraction, Fraction]:
    c, p = unpair(i)
    return dense(c), Fraction(1, 1 << p)


def ball_index(center: Fraction, precision: int) -> int:
    return pair(center_code(center), precision)


def formal_ball_inclusion(b1: tuple[Fraction, Fraction], b2: tuple[Fraction, Fraction]) -> bool:
    """Decidable, sound inclusion test: |c1 - c2| + r1 < r2."""
    (c1, r1), (c2, r2) = b1, b2
    return abs(Fraction(c1) - Fraction(c2)) + Fraction(r1) < Fraction(r2)


class DyadicReal:
    """A real number given by dyadic approximations with |approx(k) - x| <= 2**-k.

    ``exact`` holds the value when it is known to be a dyadic rational.
    """

    def __init__(self, approx: Callable[[int], Fraction], exact: Fraction | None = None,
                 name: str | None = None):
        self._approx = _Stream(lambda k: Fraction(approx(k)))
        self.exact = exact
        self.name = name

    def approx(self, k: int) -> Fraction:
        return self._approx(k)

    @classmethod
    def from_fraction(cls, q) -> "DyadicReal":
        q = Fraction(q)
        if is_dyadic(q):
            return cls(lambda k: q, exact=q, name=str(q))
        # floor(q * 2**k) / 2**k has error below 2**-k
        return cls(lambda k: Fraction((q.numerator << k) // q.denominator, 1 << k), name=str(q))

    def __repr__(self) -> str:
        return f"DyadicReal({self.name or float(self.approx(20))})"


def ball_member(x: DyadicReal, center, radius) -> Semi:
    """Semidecide d(x, center) < radius: accept at fuel k once some
    approximation at precision <= k satisfies |approx - center| + 2**-k < radius."""
    center, radius = Fraction(center), Fraction(radius)
    if radius <= 0:
        raise ValueError("ball radius must be positive")
    if x.exact is not None:
        d = abs(x.exact - center)
        return Semi(lambda k: d + Fraction(1, 1 << k) < radius, f"{x!r} in B({center},{radius})")
    return Semi.scan(lambda k: abs(x.approx(k) - center) + Fraction(1, 1 << k) < radius,
                     f"{x!r} in B({center},{radius})")


class RealSpace(Space):
    """The real line with the base of dyadic balls B(dense(c), 2**-p)."""

    name = "reals"

    def base_member(self, i: int, x: DyadicReal) -> Semi:
        c, r = ball(i)
        return ball_member(x, c, r)

    def base_refine(self, i: int, j: int, x: DyadicReal) -> Lifted[int]:
        bi, bj = ball(i), ball(j)
        mi, mj = self.base_member(i, x), self.base_member(j, x)

        def check(g: int) -> Optional[int]:
            if not (mi.probe(g) and mj.probe(g)):
                return None
            c = _round(x.approx(g + 2), g + 2)
            # |x - c| < 2**-(g+1) <= 2**-p for every p <= g + 1
            for p in range(g + 2):
                r = Fraction(1, 1 << p)
                if formal_ball_inclusion((c, r), bi) and formal_ball_inclusion((c, r), bj):
                    return ball_index(c, p)
            return None

        return Lifted.scan(check, "refine")

    def sample_points(self, rng, n):
        return [DyadicReal.from_fraction(Fraction(rng.randint(-4096, 4096), 1024)) for _ in range(n)]

    def witness_points(self, indices):
        """Centre and two points just inside the edge of each ball."""
        out = []
        for i in indices:
            c, r = ball(i)
            for q in (c, c - r + r / 64, c + r - r / 64):
                out.append(DyadicReal.from_fraction(q))
        return out

    def describe_index(self, i):
        c, r = ball(i)
        return f"B({c},{r})"


def _round(q: Fraction, k: int) -> Fraction:
    """Nearest multiple of 2**-k (error at most 2**-(k+1))."""
    scaled = q * (1 << k)
    return Fraction(round(scaled), 1 << k)


# ---------------------------------------------------------------------------
# Scott domain Sigma^N as a space


class ScottSpace(Space):
    """Sigma^N with the Scott topology: index F (a finite set code) is up(F)."""

    name = "scott"

    def base_member(self, i: int, s: ScottPoint) -> Semi:
        needed = code_set(i)
        return Semi(lambda f: needed <= s.observed(f), f"{sorted(needed)} <= {s!r}")

    def base_refine(self, i: int, j: int, s: ScottPoint) -> Lifted[int]:
        mi, mj = self.base_member(i, s), self.base_member(j, s)
        return Lifted(lambda f: (i | j) if mi.probe(f) and mj.probe(f) else None)

    def sample_points(self, rng, n):
        return [ScottPoint.finite(rng.sample(range(12), rng.randint(0, 6))) for _ in range(n)]

    def describe_index(self, i):
        return "up{" + ",".join(map(str, sorted(code_set(i)))) + "}"


# ---------------------------------------------------------------------------
# omega-algebraic cpos


class AlgebraicCpo:
    """Compact elements indexed by naturals, with a decidable order.

    ``size`` is the number of compacts (``None`` when countably infinite).
    """

    def __init__(self, leq: Callable[[int, int], bool], size: int | None = None,
                 bottom: int = 0, label: Callable[[int], Any] = lambda i: i, name: str = "cpo"):
        self.leq = leq
        self.size = size
        self.bottom = bottom
        self.label = label
        self.name = name

    def compacts(self) -> range:
        if self.size is None:
            raise ValueError("cpo has infinitely many compacts")
        return range(self.size)

    def sup(self, indices: Iterable[int]) -> int:
        """Least upper bound of a finite set of compacts (finite cpos only)."""
        idx = list(indices) or [self.bottom]
        ubs = [z for z in self.compacts() if all(self.leq(i, z) for i in idx)]
        least = [z for z in ubs if all(self.leq(z, u) for u in ubs)]
        if not least:
            raise NotDirected(f"no least upper bound for {idx}")
        return least[0]

    def below(self, z: int) -> frozenset[int]:
        return frozenset(c for c in self.compacts() if self.leq(c, z))


def powerset_cpo(n: int) -> AlgebraicCpo:
    """Subsets of {0, ..., n-1} under inclusion; compact i is the subset with bitmask i."""
    return AlgebraicCpo(lambda a, b: a & ~b == 0, size=1 << n, bottom=0,
                        label=code_set, name=f"P({n})")


def scott_cpo() -> AlgebraicCpo:
    """Sigma^N as an algebraic cpo: compacts are finite sets (bitmask codes)."""
    return AlgebraicCpo(lambda a, b: a & ~b == 0, size=None, bottom=0,
                        label=code_set, name="Sigma^N")


class CpoPoint:
    """An element of an algebraic cpo, enumerated as a directed set of compacts."""

    def __init__(self, enum: Callable[[int], Optional[int]], name: str | None = None):
        self.scott = ScottPoint(enum, name)
        self.name = name

    def enum(self, n: int) -> Optional[int]:
        return self.scott.enum(n)

    def observed(self, fuel: int) -> frozenset[int]:
        return self.scott.observed(fuel)

    @classmethod
    def principal(cls, c: int) -> "CpoPoint":
        return cls(lambda n: c, name=f"<{c}>")

    def __repr__(self) -> str:
        return f"CpoPoint({self.name or '?'})"


class CpoSpace(Space):
    def __init__(self, cpo: AlgebraicCpo):
        self.cpo = cpo
        self.name = f"cpo:{cpo.name}"

    def base_member(self, i: int, y: CpoPoint) -> Semi:
        leq = self.cpo.leq
        if self.cpo.size is not None and i >= self.cpo.size:
            return Semi(lambda f: False, "no such compact")
        return Semi.scan(lambda f: f > 0 and _enum_leq(leq, i, y, f - 1), f"{i} <= {y!r}")

    def base_refine(self, i: int, j: int, y: CpoPoint) -> Lifted[int]:
        leq = self.cpo.leq

        def check(f: int):
            for n in range(f):
                e = y.enum(n)
                if e is not None and leq(i, e) and leq(j, e):
                    return e
            return None

        return Lifted.scan(check, "refine")

    def sample_points(self, rng, n):
        if self.cpo.size is None:
            raise NotImplementedError
        return [CpoPoint.principal(rng.randrange(self.cpo.size)) for _ in range(n)]


def _enum_leq(leq, i, y: CpoPoint, n: int) -> bool:
    e = y.enum(n)
    return e is not None and leq(i, e)


def cpo_sup(chain: Callable[[int], int], cpo: AlgebraicCpo,
            chooser: Callable[[int, int], int] | None = None) -> CpoPoint:
    """Supremum of a countable directed family ``chain`` of compacts.

    Builds the cofinal chain c_0 = 0, c_{n+1} = s(c_n, n) from the upper-bound
    chooser s (default ``max``, which is correct for monotone chains) and
    returns the point enumerating ``chain(c_n)``.  Every chooser answer is
    checked; a wrong one raises :class:`NotDirected` when it is reached.
    """
    s = chooser or max
    idx = [0]
    lock = threading.Lock()

    def enum(n: int) -> int:
        with lock:
            while len(idx) <= n:
                m = len(idx) - 1
                nxt = s(idx[m], m)
                top = chain(nxt)
                if not (cpo.leq(chain(idx[m]), top) and cpo.leq(chain(m), top)):
                    raise NotDirected(f"chooser({idx[m]}, {m}) = {nxt} is not an upper bound")
                idx.append(nxt)
            return chain(idx[n])

    return CpoPoint(enum, name="sup")
