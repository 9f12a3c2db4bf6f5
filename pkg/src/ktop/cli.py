"""Command-line entry point ``ktop``.

Every subcommand produces a :class:`Result`.  Text mode prints it for
people; ``--json`` prints one object ``{status, value, certificate,
fuel_used}``.  Certificates carry enough of the invocation to be checked
again later with ``ktop --verify FILE``.

Exit codes: 0 success, 2 usage error, 3 budget exhausted, 4 premise or
contract failure (including a certificate that does not re-check).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from . import kernel
from .engine import OvertSubset, accepts, initial_segments, shrink_support, wso_search
from .errors import (BadBound, BudgetExhausted, ContractViolation, ContradictionDetected,
                     InvalidCertificate, KtopError, NotDirected, ParseError, PremiseFailed,
                     UsageError)
from .expr import parse_expr
from .klst import grid_check, modulus, spreen_witness
from .literals import parse_machine, parse_point
from .sigma import Exhausted, OmegaBar, markov_run
from .sober import ChainLink, point_oracle, program_oracle, recover_real, verify_chain
from .spaces import (CantorPoint, CantorSpace, DyadicReal, RealSpace, ScottSpace, ball,
                     ball_member)

DEFAULT_BUDGET = 10**6
EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_PREMISE = 0, 2, 3, 4

SPACES = {"cantor": CantorSpace, "reals": RealSpace, "scott": ScottSpace}


@dataclass
class Invocation:
    subcommand: str
    action: str | None
    flags: dict
    budget: int
    mode: str = "text"
    seed: int = 0


@dataclass
class Result:
    status: str
    value: Any = None
    certificate: dict | None = None
    fuel_used: int | None = None
    lines: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return {"ok": EXIT_OK, "budget_exhausted": EXIT_BUDGET}.get(self.status, EXIT_PREMISE)


# ---------------------------------------------------------------------------
# Argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _common() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    s = argparse.SUPPRESS
    p.add_argument("--budget", type=int, default=s, help="search budget (default 10^6)")
    p.add_argument("--json", action="store_true", default=s, help="emit one JSON object")
    p.add_argument("--config", default=s, help="flat key=value file with budget/seed/json")
    p.add_argument("--seed", type=int, default=s, help="seed for randomized choices")
    return p


def _build_parser() -> argparse.ArgumentParser:
    common = _common()
    root = _Parser(prog="ktop", parents=[common],
                   description="Executable effective topology: searches with certificates.")
    root.add_argument("--verify", metavar="FILE", help="re-check a JSON result written earlier")
    sub = root.add_subparsers(dest="subcommand", parser_class=_Parser)

    def leaf(parent, name, help_text):
        return parent.add_parser(name, parents=[common], help=help_text)

    k = sub.add_parser("kernel", help="register-machine kernel").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    r = leaf(k, "run", "run a program for a bounded number of steps")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--code", type=int)
    src.add_argument("--program", metavar="FILE")
    r.add_argument("--input", type=int, default=0)
    r.add_argument("--fuel", type=int)
    e = leaf(k, "encode", "assemble a program file to its code")
    e.add_argument("file")
    d = leaf(k, "decode", "disassemble a code")
    d.add_argument("code", type=int)
    s = leaf(k, "smn", "specialise the first argument of a program")
    s.add_argument("--code", type=int, required=True)
    s.add_argument("--x", type=int, required=True)
    f = leaf(k, "fixpoint", "fixed point of a program transformer")
    tsrc = f.add_mutually_exclusive_group(required=True)
    tsrc.add_argument("--transformer", choices=["identity", "prepend-noop", "constant"])
    tsrc.add_argument("--code", type=int)
    f.add_argument("--fuel", type=int, default=10**5)

    sg = sub.add_parser("sigma", help="semidecidable truth values").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    pr = leaf(sg, "probe", "least fuel at which a real is seen inside a ball")
    pr.add_argument("--point", required=True)
    pr.add_argument("--center", required=True)
    pr.add_argument("--radius", required=True)

    sp = sub.add_parser("spaces", help="represented spaces").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    nb = leaf(sp, "nbh", "basic neighbourhood indices observed within a fuel")
    nb.add_argument("--space", choices=sorted(SPACES), required=True)
    nb.add_argument("--point", required=True)
    nb.add_argument("--fuel", type=int, default=64)

    su = leaf(sub, "support", "finite support on which a machine accepts a set")
    su.add_argument("--machine", required=True)
    su.add_argument("--point", required=True, help="set literal, e.g. naturals or {2,5}")
    su.add_argument("--no-shrink", action="store_true")

    w = leaf(sub, "wso", "least finite n accepted, from acceptance at infinity")
    w.add_argument("--machine", required=True)

    so = sub.add_parser("sober", help="point recovery").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    rc = leaf(so, "recover", "rebuild a real from a neighbourhood oracle")
    rc.add_argument("--oracle", required=True, help='"point 1/3" or "program N"')
    rc.add_argument("--precision", type=int, default=10)

    def separate_args(p):
        p.add_argument("--space", choices=["cantor", "reals"], required=True)
        p.add_argument("--point", required=True)
        p.add_argument("--machine", required=True)
        p.add_argument("--avoid", required=True,
                       help="bit:K=V (cantor), from:N (reals), list:P1;P2, or none")
        p.add_argument("--depth", type=int, default=200)

    def modulus_args(p):
        p.add_argument("--fn", required=True)
        p.add_argument("--at", required=True)
        p.add_argument("--eps", required=True)
        p.add_argument("--grid", type=int, default=12)
        p.add_argument("--depth", type=int, default=200)

    separate_args(leaf(sub, "spreen", "separation witness"))
    modulus_args(leaf(sub, "modulus", "modulus of continuity"))
    kl = sub.add_parser("klst", help="aliases for modulus and spreen").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    modulus_args(leaf(kl, "modulus", "modulus of continuity"))
    separate_args(leaf(kl, "separate", "separation witness"))
    return root


def read_config(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment; quotes optional."""
    out = {}
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line or line.startswith("["):
            raise UsageError(f"{path}:{n}: expected key = value")
        key, val = (part.strip() for part in line.split("=", 1))
        out[key] = val.strip("\"'")
    unknown = set(out) - {"budget", "seed", "json"}
    if unknown:
        raise UsageError(f"{path}: unknown keys {sorted(unknown)}")
    return out


def parse_args(argv: list[str]) -> Invocation:
    ns = vars(_build_parser().parse_args(argv))
    verify = ns.pop("verify", None)
    sub, action = ns.pop("subcommand", None), ns.pop("action", None)
    if verify is not None:
        sub, action = "verify", None
        ns["file"] = verify
    elif sub is None:
        raise UsageError("a subcommand is required\n" + _build_parser().format_usage())
    if sub == "klst":
        sub, action = ("modulus", None) if action == "modulus" else ("spreen", None)

    cfg = read_config(ns.pop("config")) if "config" in ns else {}
    budget = DEFAULT_BUDGET
    try:
        if "KTOP_BUDGET" in os.environ:
            budget = int(os.environ["KTOP_BUDGET"])
        if "budget" in cfg:
            budget = int(cfg["budget"])
        seed = int(cfg.get("seed", 0))
    except ValueError as exc:
        raise UsageError(f"bad number: {exc}") from None
    budget = ns.pop("budget", budget)
    seed = ns.pop("seed", seed)
    as_json = ns.pop("json", cfg.get("json", "false").lower() in ("1", "true", "yes"))
    if budget <= 0:
        raise UsageError("--budget must be positive")
    return Invocation(sub, action, ns, budget, "json" if as_json else "text", seed)


# ---------------------------------------------------------------------------
# Rendering


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (set, frozenset)):
        return sorted(_jsonable(x) for x in v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def render(result: Result, mode: str) -> str:
    if mode == "json":
        return json.dumps({"status": result.status, "value": _jsonable(result.value),
                           "certificate": _jsonable(result.certificate),
                           "fuel_used": result.fuel_used}, sort_keys=True)
    lines = [f"status: {result.status}"]
    if result.value is not None:
        lines.append(f"value: {_jsonable(result.value)}")
    if result.fuel_used is not None:
        lines.append(f"fuel used: {result.fuel_used}")
    lines += result.lines
    return "\n".join(lines)


def _exhausted(budget: int, what: str) -> Result:
    return Result("budget_exhausted", fuel_used=budget, lines=[f"{what} within {budget}"])


# ---------------------------------------------------------------------------
# Handlers


def _kernel(inv: Invocation) -> Result:
    f, a = inv.flags, inv.action
    if a == "run":
        if f["program"] is not None:
            code = kernel.encode(kernel.assemble(_read(f["program"])))
        else:
            code = f["code"]
        fuel = f["fuel"] if f["fuel"] is not None else inv.budget
        steps = kernel.halting_time(code, f["input"], fuel)
        if steps is None:
            return _exhausted(fuel, "program did not halt")
        out = kernel.run(code, f["input"], fuel)
        cert = {"kind": "run", "code": code, "input": f["input"], "fuel": fuel}
        return Result("ok", out, cert, steps, [f"halted after {steps} steps"])
    if a == "encode":
        text = _read(f["file"])
        code = kernel.encode(kernel.assemble(text))
        return Result("ok", code, {"kind": "encode", "program": text}, None)
    if a == "decode":
        text = kernel.disassemble(kernel.decode(f["code"]))
        return Result("ok", text, {"kind": "decode", "code": f["code"]}, None)
    if a == "smn":
        out = kernel.smn(f["code"], f["x"])
        return Result("ok", out, {"kind": "smn", "code": f["code"], "x": f["x"]}, None)
    # fixpoint
    t = f["code"] if f["code"] is not None else kernel.encode(_TRANSFORMERS[f["transformer"]]())
    n = kernel.kleene_fixed_point(t, min(f["fuel"], inv.budget))
    cert = {"kind": "fixpoint", "transformer": t, "fuel": min(f["fuel"], inv.budget)}
    return Result("ok", n, cert, None, [f"fixed point has {n.bit_length()} bits"])


_TRANSFORMERS = {"identity": kernel.identity_transformer,
                 "prepend-noop": kernel.prepend_noop_transformer,
                 "constant": kernel.constant_output_transformer}


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def _sigma(inv: Invocation) -> Result:
    f = inv.flags
    x = parse_point(f["point"], "reals")
    c, r = _dyadic(f["center"]), _dyadic(f["radius"])
    if r <= 0:
        raise UsageError("--radius must be positive")
    hit = markov_run(ball_member(x, c, r), inv.budget)
    if isinstance(hit, Exhausted):
        return _exhausted(inv.budget, "no acceptance")
    cert = {"kind": "ball_probe", "point": f["point"], "center": f["center"],
            "radius": f["radius"]}
    return Result("ok", True, cert, hit.fuel, [f"accepted at fuel {hit.fuel}"])


def _dyadic(text: str) -> Fraction:
    x = parse_point(text, "reals")
    if x.exact is None:
        raise UsageError(f"{text} is not a dyadic rational")
    return x.exact


def _spaces(inv: Invocation) -> Result:
    f = inv.flags
    space = SPACES[f["space"]]()
    x = parse_point(f["point"], f["space"])
    fuel = min(f["fuel"], inv.budget)
    seen = sorted(space.nbh(x).observed(fuel))
    cert = {"kind": "nbh", "space": f["space"], "point": f["point"], "fuel": fuel}
    return Result("ok", seen, cert, fuel, [f"{i}: {space.describe_index(i)}" for i in seen])


def _support(inv: Invocation) -> Result:
    f = inv.flags
    m = parse_machine(f["machine"])
    s = parse_point(f["point"], "scott")
    c = accepts(m, s, inv.budget)
    if isinstance(c, Exhausted):
        return _exhausted(inv.budget, "machine did not accept")
    if not f["no_shrink"]:
        c = shrink_support(m, c)
    cert = {"kind": "support", "machine": f["machine"], "point": f["point"],
            "support": sorted(c.support), "fuel": c.fuel}
    return Result("ok", sorted(c.support), cert, c.fuel, [f"trace: {list(c.trace)}"])


def _wso(inv: Invocation) -> Result:
    m = parse_machine(inv.flags["machine"])
    hit = wso_search(initial_segments, m, inv.budget)
    if isinstance(hit, Exhausted):
        return _exhausted(inv.budget, "no finite n found")
    cert = {"kind": "wso", "machine": inv.flags["machine"], "n": hit.value, "fuel": hit.fuel,
            "support": sorted(hit.certificate.support)}
    return Result("ok", hit.value, cert, hit.fuel,
                  [f"support at infinity: {sorted(hit.certificate.support)}"])


def _oracle(spec: str):
    kind, _, arg = spec.strip().partition(" ")
    if kind == "point":
        return point_oracle(RealSpace(), parse_point(arg, "reals"))
    if kind == "program":
        try:
            return program_oracle(int(arg))
        except ValueError:
            raise UsageError(f"bad program index {arg!r}") from None
    raise UsageError(f"unknown oracle {spec!r}; use 'point Q' or 'program N'")


def _sober(inv: Invocation) -> Result:
    f = inv.flags
    p = _oracle(f["oracle"])
    x = recover_real(p, inv.budget, f["precision"])
    if isinstance(x, Exhausted):
        return _exhausted(inv.budget, "no nested accepted ball")
    chain = x.certificate()[: f["precision"] + 1]
    cert = {"kind": "recover", "oracle": f["oracle"],
            "chain": [{"index": l.index, "fuel": l.fuel} for l in chain]}
    lines = [f"level {k}: B({l.center}, {l.radius}) index {l.index} at fuel {l.fuel}"
             for k, l in enumerate(chain)]
    return Result("ok", chain[-1].center, cert, max(l.fuel for l in chain), lines)


def _avoid(spec: str, space: str) -> OvertSubset:
    kind, _, arg = spec.partition(":")
    try:
        if kind == "none":
            return OvertSubset.empty()
        if kind == "list":
            return OvertSubset.from_list([parse_point(p, space) for p in arg.split(";") if p])
        if kind == "from" and space == "reals":
            start = int(arg)
            return OvertSubset(lambda n: DyadicReal.from_fraction(start + n), name=spec)
        if kind == "bit" and space == "cantor":
            k, v = (int(t) for t in arg.split("="))
            return OvertSubset(lambda n: _bits_with(n, k, v), name=spec)
    except ValueError:
        pass
    raise UsageError(f"bad --avoid {spec!r} for space {space}")


def _bits_with(n: int, k: int, v: int) -> CantorPoint:
    """The finitely supported sequence with bits of n, bit k forced to v."""
    return CantorPoint(lambda j: v if j == k else (n >> j) & 1, name=f"n{n}")


def _spreen(inv: Invocation) -> Result:
    f = inv.flags
    space = SPACES[f["space"]]()
    x = parse_point(f["point"], f["space"])
    m = parse_machine(f["machine"])
    w = spreen_witness(x, m, _avoid(f["avoid"], f["space"]), space, inv.budget, depth=f["depth"])
    idx = w.sorted_indices()
    cert = {"kind": "separation", "space": f["space"], "point": f["point"],
            "machine": f["machine"], "avoid": f["avoid"], "indices": idx,
            "fuel": w.certificate.fuel, "depth": f["depth"]}
    return Result("ok", idx, cert, w.certificate.fuel,
                  [f"{i}: {space.describe_index(i)}" for i in idx])


def _modulus(inv: Invocation) -> Result:
    f = inv.flags
    fn = parse_expr(f["fn"])
    x = parse_point(f["at"], "reals")
    eps = _dyadic(f["eps"])
    if eps <= 0:
        raise UsageError("--eps must be positive")
    res = modulus(fn, x, eps, inv.budget, depth=f["depth"])
    if isinstance(res, Exhausted):
        return _exhausted(inv.budget, "no separating family")
    wit = res.trace["witness"]
    lines = [f"delta: {res.delta}",
             "witness: " + ", ".join(RealSpace().describe_index(i) for i in wit.sorted_indices())]
    grid = None
    if x.exact is not None:
        g = grid_check(fn, x, eps, res.delta, f["grid"])
        grid = len(g.violations)
        lines.append(f"grid check at pitch 2^-{f['grid']}: {g.checked} points, "
                     f"{grid} violations")
    cert = {"kind": "modulus", "fn": f["fn"], "at": f["at"], "eps": str(eps),
            "delta": str(res.delta), "grid": f["grid"], "indices": wit.sorted_indices()}
    status = "ok" if not grid else "contract_violation"
    return Result(status, res.delta, cert, wit.certificate.fuel, lines)


# ---------------------------------------------------------------------------
# Certificate verification


def _check(cert: dict, value, fuel_used) -> bool:
    kind = cert.get("kind")
    if kind == "run":
        return (kernel.run(cert["code"], cert["input"], cert["fuel"]) == value
                and kernel.halting_time(cert["code"], cert["input"], cert["fuel"]) == fuel_used)
    if kind == "encode":
        return kernel.encode(kernel.assemble(cert["program"])) == value
    if kind == "decode":
        return kernel.disassemble(kernel.decode(cert["code"])) == value
    if kind == "smn":
        return kernel.smn(cert["code"], cert["x"]) == value
    if kind == "fixpoint":
        fuel = cert["fuel"]
        if kernel.kleene_fixed_point(cert["transformer"], fuel) != value:
            return False
        image = kernel.run(cert["transformer"], value, fuel)
        return all(kernel.run(value, i, fuel) == kernel.run(image, i, fuel) for i in range(3))
    if kind == "ball_probe":
        s = ball_member(parse_point(cert["point"], "reals"), _dyadic(cert["center"]),
                        _dyadic(cert["radius"]))
        return s.probe(fuel_used) and (fuel_used == 0 or not s.probe(fuel_used - 1))
    if kind == "nbh":
        space = SPACES[cert["space"]]()
        x = parse_point(cert["point"], cert["space"])
        return sorted(space.nbh(x).observed(cert["fuel"])) == value
    if kind == "support":
        m = parse_machine(cert["machine"])
        seen = parse_point(cert["point"], "scott").observed(cert["fuel"])
        return set(cert["support"]) <= seen and m.step(cert["support"], cert["fuel"])
    if kind == "wso":
        m = parse_machine(cert["machine"])
        s = initial_segments(OmegaBar.of(cert["n"]))
        return cert["n"] == value and m.step(s.observed(cert["fuel"]), cert["fuel"])
    if kind == "recover":
        links = [ChainLink(l["index"], *ball(l["index"]), l["fuel"]) for l in cert["chain"]]
        return (verify_chain(links, _oracle(cert["oracle"]))
                and str(links[-1].center) == str(value))
    if kind == "separation":
        space = SPACES[cert["space"]]()
        x = parse_point(cert["point"], cert["space"])
        m = parse_machine(cert["machine"])
        idx, fuel = cert["indices"], cert["fuel"]
        if not (m.step(idx, fuel) and set(idx) <= space.nbh(x).observed(fuel)):
            return False
        t = _avoid(cert["avoid"], cert["space"])
        for n in range(cert["depth"]):
            z = t.enumerate(n)
            if z is not None and all(space.base_member(i, z).probe(64) for i in idx):
                return False
        return True
    if kind == "modulus":
        delta = Fraction(cert["delta"])
        fn = parse_expr(cert["fn"])
        x = parse_point(cert["at"], "reals")
        if delta <= 0 or str(delta) != str(value):
            return False
        if x.exact is None:
            return True
        return not grid_check(fn, x, Fraction(cert["eps"]), delta, cert["grid"]).violations
    raise UsageError(f"unknown certificate kind {kind!r}")


def _verify(inv: Invocation) -> Result:
    try:
        doc = json.loads(_read(inv.flags["file"]))
        cert = doc["certificate"]
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"not a ktop JSON result: {exc}") from None
    if not isinstance(cert, dict):
        raise UsageError("the result carries no certificate to verify")
    try:
        ok = _check(cert, doc.get("value"), doc.get("fuel_used"))
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed certificate: {exc}") from None
    if not ok:
        return Result("invalid_certificate", False, cert, None, ["certificate does not re-check"])
    return Result("ok", True, cert, doc.get("fuel_used"), [f"{cert['kind']} certificate re-checks"])


HANDLERS: dict[str, Callable[[Invocation], Result]] = {
    "kernel": _kernel, "sigma": _sigma, "spaces": _spaces, "support": _support, "wso": _wso,
    "sober": _sober, "spreen": _spreen, "modulus": _modulus, "verify": _verify,
}

_STATUS = [
    (ContradictionDetected, "contradiction"),
    (PremiseFailed, "premise_failed"),
    (ContractViolation, "contract_violation"),
    (InvalidCertificate, "invalid_certificate"),
    (BadBound, "bad_bound"),
    (NotDirected, "not_directed"),
]


def execute(inv: Invocation) -> Result:
    try:
        return HANDLERS[inv.subcommand](inv)
    except BudgetExhausted as exc:
        return Result("budget_exhausted", fuel_used=exc.budget, lines=[str(exc)])
    except tuple(cls for cls, _ in _STATUS) as exc:
        status = next(name for cls, name in _STATUS if isinstance(exc, cls))
        cert = None
        if isinstance(exc, ContradictionDetected):
            cert = {"kind": "contradiction", "point": repr(exc.point)}
        return Result(status, None, cert, None, [str(exc)])


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        inv = parse_args(argv)
        result = execute(inv)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (UsageError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KtopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PREMISE
    print(render(result, inv.mode))
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
