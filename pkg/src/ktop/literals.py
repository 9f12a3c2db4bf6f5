"""Textual point literals and the acceptance-machine mini-language.

Point literals:

* Cantor space: ``bits:0010`` (followed by zeros) or ``bits:001(01)*``
  (eventually periodic).
* reals: ``p/q`` or an integer, or any closed term of the expression
  language such as ``1/4 + 1/8``.
* Sigma^N: ``{2,4,6}``, ``{}``, ``{1,4,...}`` (arithmetic progression from
  the last two listed elements), ``evens``, ``primes``, ``naturals``.

Machines::

    ACCEPT ALWAYS | ACCEPT NEVER | ACCEPT WHEN cond
    cond   := term ("OR" term)*
    term   := factor ("AND" factor)*
    factor := "HAS" "{" n ("," n)* "}" ["AFTER" "FUEL" n] | "(" cond ")"

Keywords are case-insensitive.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .engine import MonotoneMachine
from .errors import ParseError
from .expr import is_closed, parse_expr
from .spaces import CantorPoint, DyadicReal, ScottPoint

_BITS = re.compile(r"bits:([01]*)(?:\(([01]+)\)\*)?$")
_SET = re.compile(r"\{\s*(.*?)\s*\}$")


def parse_cantor(text: str) -> CantorPoint:
    m = _BITS.match(text.strip())
    if m is None:
        raise ParseError(f"not a bit-sequence literal: {text!r}", 1, 1)
    return CantorPoint.eventually(m.group(1), m.group(2) or "0")


def parse_real(text: str) -> DyadicReal:
    s = text.strip()
    m = re.fullmatch(r"(-?\d+)\s*/\s*(\d+)", s)
    if m:
        if int(m.group(2)) == 0:
            raise ParseError("zero denominator", 1, m.start(2) + 1)
        q = Fraction(int(m.group(1)), int(m.group(2)))
        return DyadicReal.from_fraction(q)
    term = parse_expr(s)
    if not is_closed(term):
        raise ParseError("a point literal cannot mention x", 1, 1)
    return DyadicReal.from_fraction(term.exact(Fraction(0)))


def parse_scott(text: str) -> ScottPoint:
    s = text.strip()
    builtins = {"evens": ScottPoint.evens, "primes": ScottPoint.primes,
                "naturals": ScottPoint.naturals}
    if s in builtins:
        return builtins[s]()
    m = _SET.match(s)
    if m is None:
        raise ParseError(f"not a set literal: {text!r}", 1, 1)
    body = m.group(1)
    if not body:
        return ScottPoint.finite([])
    parts = [p.strip() for p in body.split(",")]
    if parts[-1] == "...":
        nums = _naturals(parts[:-1], text)
        if len(nums) < 2 or nums[1] <= nums[0]:
            raise ParseError("a progression needs two increasing elements before '...'", 1, 1)
        step = nums[1] - nums[0]
        if any(b - a != step for a, b in zip(nums, nums[1:])):
            raise ParseError("listed elements do not form a progression", 1, 1)
        return ScottPoint.progression(nums[0], step)
    return ScottPoint.finite(_naturals(parts, text))


def _naturals(parts, text) -> list[int]:
    out = []
    for p in parts:
        if not p.isdigit():
            col = text.find(p) + 1
            raise ParseError(f"expected a natural number, got {p!r}", 1, max(col, 1))
        out.append(int(p))
    return out


def parse_point(text: str, space: str):
    """Dispatch on the space name: ``cantor``, ``reals`` or ``scott``."""
    if space == "cantor":
        return parse_cantor(text)
    if space == "reals":
        return parse_real(text)
    if space == "scott":
        return parse_scott(text)
    raise ParseError(f"unknown space {space!r}", 1, 1)


# ---------------------------------------------------------------------------
# Machine language

_MTOKEN = re.compile(r"\s*(?:([A-Za-z]+)|(\d+)|([{}(),]))")


def _mtokens(text: str):
    toks, pos = [], 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _MTOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", 1, pos + 1)
        kind = ("word", "num", "sym")[m.lastindex - 1]
        val = m.group(m.lastindex)
        toks.append((kind, val.upper() if kind == "word" else val, m.start(m.lastindex) + 1))
        pos = m.end()
    toks.append(("end", "", len(text) + 1))
    return toks


class _MachineParser:
    def __init__(self, text: str):
        self.toks = _mtokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str, val: str | None = None):
        t = self.take()
        if t[0] != kind or (val is not None and t[1] != val):
            want = val or kind
            got = t[1] or "end of input"
            raise ParseError(f"expected {want}, got {got}", 1, t[2])
        return t

    def machine(self) -> MonotoneMachine:
        self.expect("word", "ACCEPT")
        t = self.take()
        if t[:2] == ("word", "ALWAYS"):
            m = MonotoneMachine.always()
        elif t[:2] == ("word", "NEVER"):
            m = MonotoneMachine.never()
        elif t[:2] == ("word", "WHEN"):
            m = self.cond()
        else:
            raise ParseError("expected ALWAYS, NEVER or WHEN", 1, t[2])
        self.expect("end")
        return m

    def cond(self) -> MonotoneMachine:
        m = self.term()
        while self.peek()[:2] == ("word", "OR"):
            self.take()
            m = m | self.term()
        return m

    def term(self) -> MonotoneMachine:
        m = self.factor()
        while self.peek()[:2] == ("word", "AND"):
            self.take()
            m = m & self.factor()
        return m

    def factor(self) -> MonotoneMachine:
        t = self.peek()
        if t[:2] == ("sym", "("):
            self.take()
            m = self.cond()
            self.expect("sym", ")")
            return m
        self.expect("word", "HAS")
        self.expect("sym", "{")
        need = [int(self.expect("num")[1])]
        while self.peek()[:2] == ("sym", ","):
            self.take()
            need.append(int(self.expect("num")[1]))
        self.expect("sym", "}")
        after = 0
        if self.peek()[:2] == ("word", "AFTER"):
            self.take()
            self.expect("word", "FUEL")
            after = int(self.expect("num")[1])
        return MonotoneMachine.has(need, after)


def parse_machine(text: str) -> MonotoneMachine:
    m = _MachineParser(text).machine()
    m.source = text.strip()
    return m
