import random

import pytest

from ktop.kernel import program

# PAIR is left out: inside a loop it doubles bit lengths every pass, so a few
# hundred steps produce astronomically large registers.
CORE = ("INC", "DECJZ", "JMP", "HALT", "SET", "UNPAIR")


def random_program(rng: random.Random, size: int = 6, regs: int = 3):
    """A random program over INC/DECJZ/JMP/HALT/SET/UNPAIR; jumps stay in range."""
    instrs = []
    for _ in range(size):
        op = rng.choice(CORE)
        r = lambda: rng.randrange(regs)
        if op in ("INC", "HALT"):
            instrs.append((op, r()))
        elif op == "DECJZ":
            instrs.append((op, r(), rng.randrange(size + 1)))
        elif op == "JMP":
            instrs.append((op, rng.randrange(size + 1)))
        elif op == "SET":
            instrs.append((op, r(), rng.randrange(8)))
        else:
            instrs.append((op, r(), r(), r()))
    return program(*instrs)


@pytest.fixture
def rng():
    return random.Random(20261015)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
