"""A small expression language for real functions of one variable ``x``.

Grammar::

    expr := rat | "x" | expr op expr | fn "(" expr "," expr ")"
          | "abs" "(" expr ")" | "(" expr ")"
    op   := "+" | "-" | "*"          (``*`` binds tighter; left associative)
    fn   := "min" | "max"
    rat  := int | int "/" pow2       (int may carry a leading "-")

Every term maps dyadics to dyadics, so evaluation is exact on dyadic
inputs.  Interval enclosures give an approximation transformer for
arbitrary :class:`DyadicReal` inputs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError
from .spaces import DyadicReal, is_dyadic

Interval = tuple[Fraction, Fraction]


class Expr:
    def exact(self, q: Fraction) -> Fraction:
        raise NotImplementedError

    def enclose(self, lo: Fraction, hi: Fraction) -> Interval:
        """Closed interval containing f([lo, hi])."""
        raise NotImplementedError

    def __call__(self, q) -> Fraction:
        return self.exact(Fraction(q))

    def apply(self, x: DyadicReal) -> DyadicReal:
        """f(x) as a DyadicReal with |approx(k) - f(x)| <= 2**-k."""
        if x.exact is not None:
            return DyadicReal.from_fraction(self.exact(x.exact))

        def approx(k: int) -> Fraction:
            m = k + 1
            target = Fraction(1, 1 << k)
            while True:
                a, e = x.approx(m), Fraction(1, 1 << m)
                lo, hi = self.enclose(a - e, a + e)
                if hi - lo <= target:
                    return (lo + hi) / 2
                m += 1 + (m - k)  # widen the gap geometrically

        return DyadicReal(approx, name=f"{self}({x!r})")


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction

    def exact(self, q):
        return self.value

    def enclose(self, lo, hi):
        return self.value, self.value

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Var(Expr):
    def exact(self, q):
        return q

    def enclose(self, lo, hi):
        return lo, hi

    def __str__(self):
        return "x"


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def exact(self, q):
        a, b = self.left.exact(q), self.right.exact(q)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        return a * b

    def enclose(self, lo, hi):
        a1, a2 = self.left.enclose(lo, hi)
        b1, b2 = self.right.enclose(lo, hi)
        if self.op == "+":
            return a1 + b1, a2 + b2
        if self.op == "-":
            return a1 - b2, a2 - b1
        products = (a1 * b1, a1 * b2, a2 * b1, a2 * b2)
        return min(products), max(products)

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    args: tuple[Expr, ...]

    def exact(self, q):
        vals = [a.exact(q) for a in self.args]
        if self.fn == "abs":
            return abs(vals[0])
        return min(vals) if self.fn == "min" else max(vals)

    def enclose(self, lo, hi):
        ivs = [a.enclose(lo, hi) for a in self.args]
        if self.fn == "abs":
            a, b = ivs[0]
            if a >= 0:
                return a, b
            if b <= 0:
                return -b, -a
            return Fraction(0), max(-a, b)
        pick = min if self.fn == "min" else max
        return pick(i[0] for i in ivs), pick(i[1] for i in ivs)

    def __str__(self):
        return f"{self.fn}({', '.join(map(str, self.args))})"


# ---------------------------------------------------------------------------
# Parser

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_]\w*)|(.))")


def _tokens(text: str):
    text = text.replace("−", "-")
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.lastindex is None:
            break
        kind = ("num", "name", "sym")[m.lastindex - 1]
        out.append((kind, m.group(m.lastindex), m.start(m.lastindex)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg: str, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, 1, tok[2] + 1)

    def expect(self, sym: str):
        t = self.take()
        if t[1] != sym or t[0] == "num":
            self.fail(f"expected {sym!r}", t)

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "sym":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.atom()
        while self.peek()[1] == "*" and self.peek()[0] == "sym":
            self.take()
            node = BinOp("*", node, self.atom())
        return node

    def atom(self) -> Expr:
        kind, val, _ = t = self.peek()
        if kind == "sym" and val == "-" and self.toks[self.i + 1][0] == "num":
            self.take()
            return self.rat(negative=True)
        if kind == "num":
            return self.rat()
        if kind == "name":
            self.take()
            if val == "x":
                return Var()
            if val == "abs":
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call("abs", (arg,))
            if val in ("min", "max"):
                self.expect("(")
                a = self.expr()
                self.expect(",")
                b = self.expr()
                self.expect(")")
                return Call(val, (a, b))
            self.fail(f"unknown name {val!r}", t)
        if kind == "sym" and val == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        self.fail("unexpected end of input" if kind == "end" else f"unexpected {val!r}", t)

    def rat(self, negative: bool = False) -> Const:
        t = self.take()
        num = int(t[1])
        if self.peek()[1] == "/" and self.peek()[0] == "sym":
            self.take()
            d = self.take()
            if d[0] != "num":
                self.fail("expected a power of two after '/'", d)
            q = Fraction(num, int(d[1])) if int(d[1]) else None
            if q is None or not is_dyadic(Fraction(1, int(d[1]))):
                self.fail(f"denominator {d[1]} is not a power of two", d)
        else:
            q = Fraction(num)
        return Const(-q if negative else q)


def is_closed(e: Expr) -> bool:
    """True when the term does not mention x."""
    if isinstance(e, Var):
        return False
    if isinstance(e, BinOp):
        return is_closed(e.left) and is_closed(e.right)
    if isinstance(e, Call):
        return all(is_closed(a) for a in e.args)
    return True


def parse_expr(text: str) -> Expr:
    """Parse a term of the expression language, raising ParseError with the
    1-based column of the offending token."""
    p = _Parser(text)
    node = p.expr()
    if p.peek()[0] != "end":
        p.fail(f"unexpected {p.peek()[1]!r}")
    return node
