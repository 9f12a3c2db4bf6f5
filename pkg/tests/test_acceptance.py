"""Acceptance criteria 1-9, each timed against its runtime limit.

Every test records one PASS/FAIL line; conftest prints them in the
terminal summary, so they show up in plain ``pytest -v`` output.
"""

import json
import os
import random
import subprocess
import sys
import time
from contextlib import contextmanager
from fractions import Fraction

import pytest

from cli_cases import NOOP_PROGRAM, REPRESENTATIVE, fill
from conftest import random_program
from ktop.engine import (MonotoneMachine, OvertSubset, SupportCertificate, accepts,
                         initial_segments, shrink_support, wso_search)
from ktop.errors import ContradictionDetected, PremiseFailed
from ktop.expr import parse_expr
from ktop.kernel import (SMN_OVERHEAD, encode, halting_time, kleene_fixed_point, pair,
                         prepend_noop_transformer, run, smn, unpair)
from ktop.klst import Modulus, grid_check, modulus, spreen_witness
from ktop.sigma import Found
from ktop.sober import (check_filter_laws, cpo_oracle, cpo_value, meet_violation_sample,
                        point_oracle, real_law_samples, recover_cpo_point, recover_real,
                        single_ball_oracle)
from ktop.spaces import (CantorPoint, CantorSpace, DyadicReal, RealSpace, ScottPoint,
                         ball_index, code_prefix, powerset_cpo, prefix_code)

F = Fraction
LINES: list[str] = []


@contextmanager
def criterion(n: int, title: str, limit: float):
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        LINES.append(f"FAIL  criterion {n}: {title} ({type(exc).__name__}: {exc})"[:300])
        raise
    elapsed = time.perf_counter() - start
    if elapsed > limit:
        LINES.append(f"FAIL  criterion {n}: {title} took {elapsed:.2f}s, limit {limit:g}s")
        pytest.fail(f"criterion {n} took {elapsed:.2f}s (limit {limit:g}s)")
    LINES.append(f"PASS  criterion {n}: {title} ({elapsed:.2f}s, limit {limit:g}s)")


def test_criterion_1_kernel_laws():
    rng = random.Random(1)
    with criterion(1, "kernel laws", 30):
        fuel = 10**5
        for _ in range(50):
            k = encode(random_program(rng))
            x, y = rng.randrange(100), rng.randrange(100)
            assert run(smn(k, x), y, fuel + SMN_OVERHEAD) == run(k, pair(x, y), fuel)
        codes = {}
        for a in range(201):
            for b in range(201):
                c = pair(a, b)
                assert unpair(c) == (a, b)
                codes[c] = (a, b)
        # bijective onto an initial segment on the triangle a + b <= 200
        assert set(range(pair(0, 200) + 1)) <= set(codes)
        for _ in range(100):
            k = encode(random_program(rng))
            v = rng.randrange(20)
            t = halting_time(k, v, 5000)
            values = [run(k, v, f) for f in (0, 10, 100, 1000, 5000)]
            if t is None:
                assert values == [None] * 5
            else:
                for f, got in zip((0, 10, 100, 1000, 5000), values):
                    assert got == (run(k, v, t) if f >= t else None)


def test_criterion_2_recursion_theorem():
    with criterion(2, "fixed point of the prepend-no-op transformer", 10):
        t = prepend_noop_transformer()
        n = kleene_fixed_point(t, 10**5)
        image = run(t, n, 10**5)
        assert image is not None and image != n
        for i in range(10):
            assert run(n, i, 10**5) == run(image, i, 10**5)


def test_criterion_3_scott_finite_support():
    rng = random.Random(3)
    with criterion(3, "finite support and extension property", 5):
        m = MonotoneMachine.has({2, 5})
        cert = accepts(m, ScottPoint.naturals(), 10**6)
        assert isinstance(cert, SupportCertificate) and cert.replay(m)
        small = shrink_support(m, cert)
        assert small.support == {2, 5}
        for trial in range(50):
            extra = rng.sample(range(60), rng.randint(0, 15)) + [2, 5]
            rng.shuffle(extra)
            if trial % 2:
                step = rng.randint(1, 9)
                start = rng.randint(60, 90)
                s = ScottPoint(lambda n, e=list(extra), a=start, d=step:
                               e[n] if n < len(e) else a + d * (n - len(e)))
            else:
                s = ScottPoint.finite(extra)
            got = accepts(m, s, 10**6)
            assert isinstance(got, SupportCertificate)
            assert got.support <= s.observed(got.fuel)


def test_criterion_4_wso():
    with criterion(4, "waiting-argument search", 5):
        out = wso_search(initial_segments, MonotoneMachine.has({3}), 10**6)
        assert isinstance(out, Found) and out.value == 4
        with pytest.raises(PremiseFailed):
            wso_search(initial_segments, MonotoneMachine.never(), 10**4)


def test_criterion_5_sobriety_round_trip():
    with criterion(5, "point recovery for reals and a finite cpo", 60):
        space = RealSpace()
        for q in (F(0), F(1, 3), F(-5, 8), F(7, 4)):
            x = recover_real(point_oracle(space, DyadicReal.from_fraction(q)), 10**6)
            for k in range(11):
                assert abs(x.approx(k) - q) <= F(4, 1 << k)
        cpo = powerset_cpo(3)
        for z in range(8):
            point = recover_cpo_point(cpo_oracle(cpo, z), cpo, 10**4)
            assert cpo_value(point, cpo, 10**4) == z


def _bit2_zero():
    return MonotoneMachine(
        lambda o, f: any(len(p) >= 3 and p[2] == "0" for p in map(code_prefix, o)),
        "prefix fixing bit 2 to 0")


def _bit2_one():
    def enum(n):
        head = format(n, "b")
        return CantorPoint.eventually((head + "000")[:2] + "1" + head[2:], str(n % 2))
    return OvertSubset(enum, "bit 2 is 1")


def test_criterion_6_spreen_witness():
    with criterion(6, "separation witness in Cantor space", 10):
        space = CantorSpace()
        x = CantorPoint.eventually("", "0")
        w = spreen_witness(x, _bit2_zero(), _bit2_one(), space, 10**6, depth=200)
        assert w.sorted_indices() == [prefix_code("000")]
        assert all(space.base_member(i, x).probe(64) for i in w.indices)
        for n in range(200):
            z = _bit2_one().enumerate(n)
            assert not all(space.base_member(i, z).probe(64) for i in w.indices)
        with pytest.raises(ContradictionDetected):
            spreen_witness(x, MonotoneMachine.always(), _bit2_one(), space, 10**6)


def test_criterion_7_modulus_soundness():
    with criterion(7, "modulus of continuity, 30 grid checks", 300):
        for text in ("x", "3*x", "abs(x)", "min(x, 1/2)", "x*x - x"):
            f = parse_expr(text)
            for at in (F(0), F(1, 4), F(-1, 2)):
                for eps in (F(1, 8), F(1, 32)):
                    out = modulus(f, DyadicReal.from_fraction(at), eps, 10**6)
                    assert isinstance(out, Modulus), (text, at, eps)
                    assert out.delta > 0
                    report = grid_check(f, at, eps, out.delta, pitch=12)
                    assert report.checked > 0 and not report.violations, (text, at, eps)


def test_criterion_8_filter_laws():
    rng = random.Random(8)
    with criterion(8, "filter-law checker", 30):
        space = RealSpace()
        samples = real_law_samples(rng, 20)
        for q in (F(0), F(1, 3), F(-5, 8), F(7, 4)):
            report = check_filter_laws(point_oracle(space, DyadicReal.from_fraction(q)),
                                       space, samples, fuel=64)
            assert not report.failures, report.failures
        i = ball_index(F(1, 2), 2)
        crafted = check_filter_laws(single_ball_oracle(i), space,
                                    samples + [meet_violation_sample(i)], fuel=64)
        assert crafted.failures


def _cli(*argv, cwd):
    env = dict(os.environ)
    env.pop("KTOP_BUDGET", None)
    return subprocess.run([sys.executable, "-m", "ktop.cli", *argv], capture_output=True,
                          text=True, cwd=cwd, env=env, timeout=60)


def test_criterion_9_cli_contract(tmp_path):
    with criterion(9, "CLI exit codes and verify round trip", 30):
        prog = tmp_path / "prog.txt"
        prog.write_text(NOOP_PROGRAM)
        for label, argv in REPRESENTATIVE:
            done = _cli("--json", *fill(argv, prog), cwd=tmp_path)
            assert done.returncode == 0, (label, done.stderr)
            doc = json.loads(done.stdout)
            assert set(doc) == {"status", "value", "certificate", "fuel_used"}
            saved = tmp_path / "result.json"
            saved.write_text(done.stdout)
            check = _cli("--json", "--verify", str(saved), cwd=tmp_path)
            assert check.returncode == 0, (label, check.stdout, check.stderr)
        never = ["support", "--machine", "ACCEPT NEVER", "--point", "naturals", "--budget", "64"]
        assert _cli(*never, cwd=tmp_path).returncode == 3
        assert _cli("wso", "--machine", "ACCEPT NEVER", "--budget", "64",
                    cwd=tmp_path).returncode == 4
        assert _cli("nosuch", cwd=tmp_path).returncode == 2
