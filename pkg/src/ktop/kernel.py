"""Register-machine kernel: programs, Gödel codes, fuel-bounded evaluation.

The machine has four Minsky instructions (``INC``, ``DECJZ``, ``JMP``,
``HALT``) plus a handful of one-step primitives that let programs treat
program codes as data (``SET``, ``PAIR``, ``UNPAIR``, ``SMN``, ``CONS``,
``CALL``).  Without the primitives every operation on a code would cost
time proportional to the code itself, which rules out the recursion
theorem at any practical size.

Semantics, one step per executed instruction:

    INC r          r := r + 1
    DECJZ r L      if r == 0 goto L else r := r - 1
    JMP L          goto L
    HALT r         stop, output r
    SET r n        r := n
    PAIR d a b     d := pair(a, b)
    UNPAIR a b s   a, b := unpair(s)
    SMN d k x      d := smn(k, x)
    CONS d i p     d := code of program p with instruction code i prepended
    CALL d k a     d := phi_k(a); the callee's steps are charged to the caller

Running off the end of a program halts with the content of register 0 and
costs no step.  Input arrives in register 0; every other register starts
at zero.
"""

from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

from .errors import BudgetExhausted, ParseError

# ---------------------------------------------------------------------------
# Pairing and sequence codes


def pair(m: int, n: int) -> int:
    """Cantor pairing, a bijection N x N -> N with pair(0, 0) == 0."""
    s = m + n
    return s * (s + 1) // 2 + n


def unpair(k: int) -> tuple[int, int]:
    w = (math.isqrt(8 * k + 1) - 1) // 2
    n = k - w * (w + 1) // 2
    return w - n, n


def zigzag(z: int) -> int:
    """Integers onto naturals: 0, -1, 1, -2, 2, ... -> 0, 1, 2, 3, 4, ..."""
    return 2 * z if z >= 0 else -2 * z - 1


def unzigzag(n: int) -> int:
    return n // 2 if n % 2 == 0 else -(n + 1) // 2


def encode_seq(values: Iterable[int]) -> int:
    """Self-delimiting code for a finite sequence of naturals.

    Each value v becomes the Elias-gamma word of v + 1; the words are
    concatenated and read as the binary expansion of ``code + 1`` with its
    leading one removed.  The empty sequence has code 0.
    """
    bits = []
    for v in values:
        if v < 0:
            raise ValueError("sequence entries must be naturals")
        b = bin(v + 1)[2:]
        bits.append("0" * (len(b) - 1))
        bits.append(b)
    return int("1" + "".join(bits), 2) - 1


def decode_seq(code: int) -> list[int] | None:
    """Inverse of :func:`encode_seq`; ``None`` when ``code`` is malformed."""
    if code < 0:
        return None
    bits = bin(code + 1)[3:]
    out = []
    pos, n = 0, len(bits)
    while pos < n:
        one = bits.find("1", pos)
        if one < 0:
            return None
        end = one + (one - pos) + 1
        if end > n:
            return None
        out.append(int(bits[one:end], 2) - 1)
        pos = end
    return out


# ---------------------------------------------------------------------------
# Programs

OPCODES = ("INC", "DECJZ", "JMP", "HALT", "SET", "PAIR", "UNPAIR", "SMN", "CONS", "CALL")
_ARITY = {"INC": 1, "DECJZ": 2, "JMP": 1, "HALT": 1, "SET": 2,
          "PAIR": 3, "UNPAIR": 3, "SMN": 3, "CONS": 3, "CALL": 3}
_JUMPS = {"DECJZ": 1, "JMP": 0}  # position of the jump target among the args


class Instr(NamedTuple):
    op: str
    args: tuple[int, ...]

    def __str__(self) -> str:
        return " ".join([self.op, *map(str, self.args)])


@dataclass(frozen=True)
class Program:
    """A finite instruction list with absolute jump targets."""

    instructions: tuple[Instr, ...] = ()

    def __post_init__(self):
        instrs = tuple(Instr(op, tuple(args)) for op, args in self.instructions)
        object.__setattr__(self, "instructions", instrs)
        size = len(instrs)
        for pc, ins in enumerate(instrs):
            if ins.op not in _ARITY:
                raise ValueError(f"unknown opcode {ins.op!r} at {pc}")
            if len(ins.args) != _ARITY[ins.op]:
                raise ValueError(f"{ins.op} takes {_ARITY[ins.op]} operands (at {pc})")
            if any(a < 0 for a in ins.args):
                raise ValueError(f"negative operand at {pc}")
            if ins.op in _JUMPS and ins.args[_JUMPS[ins.op]] > size:
                raise ValueError(f"jump target out of range at {pc}")

    def __len__(self) -> int:
        return len(self.instructions)

    def registers(self) -> set[int]:
        regs = {0}
        for ins in self.instructions:
            if ins.op == "DECJZ":
                regs.add(ins.args[0])
            elif ins.op == "SET":
                regs.add(ins.args[0])
            elif ins.op != "JMP":
                regs.update(ins.args)
        return regs

    def relocate(self, offset: int) -> tuple[Instr, ...]:
        out = []
        for ins in self.instructions:
            if ins.op in _JUMPS:
                args = list(ins.args)
                args[_JUMPS[ins.op]] += offset
                ins = Instr(ins.op, tuple(args))
            out.append(ins)
        return tuple(out)

    def __str__(self) -> str:
        return disassemble(self)


def program(*instrs: Sequence) -> Program:
    """Convenience constructor: ``program(("INC", 0), ("HALT", 0))``."""
    return Program(tuple(Instr(i[0], tuple(i[1:])) for i in instrs))


DIVERGE = program(("JMP", 0))

# Instruction codes are pair(opcode number, payload); jump targets are
# stored relative to the instruction's own position so that prepending an
# instruction is a plain sequence operation.


def _payload(values: Sequence[int]) -> int:
    if len(values) == 1:
        return values[0]
    return pair(values[0], _payload(values[1:]))


def _unpayload(code: int, arity: int) -> list[int]:
    if arity == 1:
        return [code]
    head, rest = unpair(code)
    return [head, *_unpayload(rest, arity - 1)]


def encode_instr(ins: Instr, pc: int) -> int:
    args = list(ins.args)
    if ins.op in _JUMPS:
        j = _JUMPS[ins.op]
        args[j] = zigzag(args[j] - pc)
    return pair(OPCODES.index(ins.op), _payload(args))


def decode_instr(code: int, pc: int) -> Instr | None:
    kind, payload = unpair(code)
    if kind >= len(OPCODES):
        return None
    op = OPCODES[kind]
    args = _unpayload(payload, _ARITY[op])
    if op in _JUMPS:
        j = _JUMPS[op]
        args[j] = pc + unzigzag(args[j])
        if args[j] < 0:
            return None
    return Instr(op, tuple(args))


def encode(p: Program) -> int:
    return encode_seq(encode_instr(ins, pc) for pc, ins in enumerate(p.instructions))


@lru_cache(maxsize=4096)
def decode(n: int) -> Program:
    """Total decoding: malformed codes give the everywhere-diverging program."""
    words = decode_seq(n)
    if words is None:
        return DIVERGE
    instrs = []
    for pc, w in enumerate(words):
        ins = decode_instr(w, pc)
        if ins is None:
            return DIVERGE
        instrs.append(ins)
    try:
        return Program(tuple(instrs))
    except ValueError:
        return DIVERGE


@lru_cache(maxsize=4096)
def cons(instr_code: int, p: int) -> int:
    """Code of the program ``p`` with the instruction coded ``instr_code`` in front."""
    words = decode_seq(p)
    if words is None:
        words = [encode_instr(DIVERGE.instructions[0], 0)]
    return encode_seq([instr_code, *words])


def as_program(p: Program | int) -> Program:
    return decode(p) if isinstance(p, int) else p


# ---------------------------------------------------------------------------
# Evaluation


@dataclass(frozen=True)
class MachineState:
    pc: int
    registers: dict
    steps: int
    depth: int = 1


@dataclass
class _Frame:
    prog: Program
    pc: int
    regs: dict
    ret: int = 0


class Machine:
    """Resumable evaluator; ``advance(fuel)`` runs until ``fuel`` total steps."""

    def __init__(self, p: Program | int, value: int):
        self.frames = [_Frame(as_program(p), 0, {0: value})]
        self.steps = 0
        self.output: int | None = None
        self.halt_step: int | None = None

    @property
    def halted(self) -> bool:
        return self.output is not None

    @property
    def state(self) -> MachineState:
        top = self.frames[-1] if self.frames else _Frame(Program(), 0, {})
        return MachineState(top.pc, dict(top.regs), self.steps, len(self.frames))

    def _return(self, value: int) -> None:
        self.frames.pop()
        if not self.frames:
            self.output = value
            self.halt_step = self.steps
        else:
            caller = self.frames[-1]
            caller.regs[caller.ret] = value
            caller.pc += 1

    def advance(self, fuel: int) -> int | None:
        frames = self.frames
        while self.output is None:
            fr = frames[-1]
            code = fr.prog.instructions
            if fr.pc >= len(code):
                self._return(fr.regs.get(0, 0))
                continue
            if self.steps >= fuel:
                return None
            self.steps += 1
            op, a = code[fr.pc]
            regs = fr.regs
            if op == "INC":
                regs[a[0]] = regs.get(a[0], 0) + 1
                fr.pc += 1
            elif op == "DECJZ":
                v = regs.get(a[0], 0)
                if v == 0:
                    fr.pc = a[1]
                else:
                    regs[a[0]] = v - 1
                    fr.pc += 1
            elif op == "JMP":
                fr.pc = a[0]
            elif op == "HALT":
                self._return(regs.get(a[0], 0))
            elif op == "SET":
                regs[a[0]] = a[1]
                fr.pc += 1
            elif op == "PAIR":
                regs[a[0]] = pair(regs.get(a[1], 0), regs.get(a[2], 0))
                fr.pc += 1
            elif op == "UNPAIR":
                x, y = unpair(regs.get(a[2], 0))
                regs[a[0]] = x
                regs[a[1]] = y
                fr.pc += 1
            elif op == "SMN":
                regs[a[0]] = smn(regs.get(a[1], 0), regs.get(a[2], 0))
                fr.pc += 1
            elif op == "CONS":
                regs[a[0]] = cons(regs.get(a[1], 0), regs.get(a[2], 0))
                fr.pc += 1
            elif op == "CALL":
                callee = decode(regs.get(a[1], 0))
                fr.ret = a[0]
                frames.append(_Frame(callee, 0, {0: regs.get(a[2], 0)}))
        return self.output


def run(p: Program | int, value: int, fuel: int) -> int | None:
    """Output of ``p`` on ``value`` if it halts within ``fuel`` steps, else ``None``."""
    m = Machine(p, value)
    return m.advance(fuel)


def halting_time(p: Program | int, value: int, fuel: int) -> int | None:
    m = Machine(p, value)
    m.advance(fuel)
    return m.halt_step


# ---------------------------------------------------------------------------
# s-m-n, c.e. sets, recursion theorem

SMN_OVERHEAD = 2


def smn_program(p: Program, x: int) -> Program:
    scratch = max(p.registers()) + 1
    prefix = (Instr("SET", (scratch, x)), Instr("PAIR", (0, scratch, 0)))
    return Program(prefix + p.relocate(len(prefix)))


@lru_cache(maxsize=4096)
def smn(k: int, x: int) -> int:
    """Code of the program ``y -> phi_k(pair(x, y))``.

    The generated prefix costs exactly ``SMN_OVERHEAD`` steps, so
    ``run(smn(k, x), y, F + SMN_OVERHEAD) == run(k, pair(x, y), F)``.
    """
    return encode(smn_program(decode(k), x))


class _HaltProbe:
    """Monotone halting probe with a single resumable machine behind a lock."""

    def __init__(self, p: Program | int, value: int):
        self._machine = Machine(p, value)
        self._lock = threading.Lock()

    def __call__(self, fuel: int) -> bool:
        with self._lock:
            m = self._machine
            if m.halted:
                return m.halt_step <= fuel
            if fuel > m.steps:
                m.advance(fuel)
            return m.halted and m.halt_step <= fuel


@dataclass(frozen=True)
class CeSet:
    """W_index: the inputs on which program ``index`` halts."""

    index: int

    def member(self, n: int):
        return w_member(self, n)


def w_member(s: CeSet, n: int):
    from .sigma import Semi

    return Semi(_HaltProbe(s.index, n), name=f"{n} in W_{s.index}")


def kleene_fixed_point(transformer: Program | int, fuel: int = 10**5) -> int:
    """Return ``n`` with ``phi_n == phi_{f(n)}`` where ``f`` is computed by ``transformer``.

    Diagonal construction: ``D(pair(x, y)) = phi_{f(smn(x, x))}(y)`` and
    ``n = smn(d, d)``.  The transformer must halt on ``n`` within ``fuel``.
    """
    t = transformer if isinstance(transformer, int) else encode(transformer)
    diag = program(
        ("UNPAIR", 1, 2, 0),
        ("SMN", 3, 1, 1),
        ("SET", 4, t),
        ("CALL", 5, 4, 3),
        ("CALL", 6, 5, 2),
        ("HALT", 6),
    )
    d = encode(diag)
    n = smn(d, d)
    if run(t, n, fuel) is None:
        raise BudgetExhausted(f"transformer did not halt on {n} within {fuel} steps", fuel)
    return n


def identity_transformer() -> Program:
    return Program()


def prepend_noop_transformer() -> Program:
    """Maps a code to the code of the same program behind one ``JMP`` to the next line."""
    noop = encode_instr(Instr("JMP", (1,)), 0)
    return program(("SET", 1, noop), ("CONS", 2, 1, 0), ("HALT", 2))


def constant_output_transformer() -> Program:
    """Maps ``m`` to the code of ``SET 0 m; HALT 0`` (ignore input, output ``m``)."""
    halt_only = encode(program(("HALT", 0)))
    return program(
        ("SET", 1, 0),
        ("PAIR", 2, 1, 0),
        ("SET", 3, OPCODES.index("SET")),
        ("PAIR", 4, 3, 2),
        ("SET", 5, halt_only),
        ("CONS", 6, 4, 5),
        ("HALT", 6),
    )


# ---------------------------------------------------------------------------
# Text format

_LABEL = re.compile(r"\s*([A-Za-z_]\w*):")
_REG = re.compile(r"r?(\d+)$")


def assemble(text: str) -> Program:
    """Parse the one-instruction-per-line text format.

    ``#`` and ``;`` start comments; ``Lname:`` prefixes define labels; a
    label may stand alone on the last line to name the fall-off point.
    Register operands are written ``r3`` or ``3``.
    """
    pending: list[tuple[str, list[tuple[str, int]], int]] = []
    labels: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = re.split(r"[#;]", raw, maxsplit=1)[0]
        pos = 0
        while True:
            m = _LABEL.match(line, pos)
            if not m:
                break
            name = m.group(1)
            if name in labels:
                raise ParseError(f"duplicate label {name!r}", lineno, m.start(1) + 1)
            labels[name] = len(pending)
            pos = m.end()
        rest = line[pos:]
        tokens = [(t.group(), pos + t.start() + 1) for t in re.finditer(r"\S+", rest)]
        if not tokens:
            continue
        op, col = tokens[0]
        if op.upper() not in _ARITY:
            raise ParseError(f"unknown mnemonic {op!r}", lineno, col)
        op = op.upper()
        if len(tokens) - 1 != _ARITY[op]:
            raise ParseError(f"{op} expects {_ARITY[op]} operands, got {len(tokens) - 1}", lineno, col)
        pending.append((op, tokens[1:], lineno))

    instrs = []
    for op, operands, lineno in pending:
        args = []
        for k, (tok, col) in enumerate(operands):
            if op in _JUMPS and k == _JUMPS[op]:
                if tok in labels:
                    args.append(labels[tok])
                elif tok.isdigit():
                    args.append(int(tok))
                else:
                    raise ParseError(f"undefined label {tok!r}", lineno, col)
                if args[-1] > len(pending):
                    raise ParseError(f"jump target {tok!r} out of range", lineno, col)
            elif op == "SET" and k == 1:
                if not tok.isdigit():
                    raise ParseError(f"expected a natural constant, got {tok!r}", lineno, col)
                args.append(int(tok))
            else:
                m = _REG.match(tok)
                if not m:
                    raise ParseError(f"bad register {tok!r}", lineno, col)
                args.append(int(m.group(1)))
        instrs.append(Instr(op, tuple(args)))
    return Program(tuple(instrs))


def disassemble(p: Program) -> str:
    targets = sorted({ins.args[_JUMPS[ins.op]] for ins in p.instructions if ins.op in _JUMPS})
    names = {t: f"L{t}" for t in targets}
    lines = []
    for pc, ins in enumerate(p.instructions):
        args = []
        for k, a in enumerate(ins.args):
            if ins.op in _JUMPS and k == _JUMPS[ins.op]:
                args.append(names[a])
            elif ins.op == "SET" and k == 1:
                args.append(str(a))
            else:
                args.append(f"r{a}")
        prefix = f"{names[pc]}: " if pc in names else ""
        lines.append(prefix + " ".join([ins.op, *args]))
    if len(p) in names:
        lines.append(f"{names[len(p)]}:")
    return "\n".join(lines)
