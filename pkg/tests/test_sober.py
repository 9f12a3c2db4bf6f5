import random
from fractions import Fraction

import pytest

from ktop.kernel import assemble
from ktop.sigma import Exhausted
from ktop.sober import (FilterOracle, check_filter_laws, cpo_oracle, cpo_value,
                        meet_violation_sample, point_oracle, program_oracle, real_law_samples,
                        recover_cpo_point, recover_real, reject_all, single_ball_oracle,
                        verify_chain)
from ktop.spaces import DyadicReal, RealSpace, ball, ball_index, powerset_cpo

REALS = RealSpace()
TARGETS = [Fraction(0), Fraction(1, 3), Fraction(-5, 8), Fraction(7, 4)]


@pytest.mark.parametrize("q", TARGETS, ids=str)
def test_recovery_round_trip(q):
    x = recover_real(point_oracle(REALS, DyadicReal.from_fraction(q)), 200_000)
    assert not isinstance(x, Exhausted)
    for k in range(11):
        assert abs(x.approx(k) - q) <= Fraction(4, 1 << k)
    assert verify_chain(x.certificate(), x.oracle)


def test_recovered_chain_is_nested():
    x = recover_real(point_oracle(REALS, DyadicReal.from_fraction(Fraction(1, 3))), 200_000)
    chain = x.certificate()
    assert [link.radius for link in chain] == [Fraction(1, 1 << k) for k in range(len(chain))]
    for a, b in zip(chain, chain[1:]):
        assert abs(b.center - a.center) + b.radius <= a.radius


def test_tampered_chain_fails_verification():
    x = recover_real(point_oracle(REALS, DyadicReal.from_fraction(Fraction(1, 2))), 200_000)
    chain = x.certificate()
    bad = list(chain)
    bad[3] = type(chain[3])(ball_index(chain[3].center + 4, 3), chain[3].center + 4,
                            chain[3].radius, chain[3].fuel)
    assert not verify_chain(bad)


def test_recovery_extends_on_demand():
    x = recover_real(point_oracle(REALS, DyadicReal.from_fraction(Fraction(-5, 8))), 200_000,
                     precision=4)
    assert abs(x.approx(12) + Fraction(5, 8)) <= Fraction(4, 1 << 12)


def test_empty_filter_exhausts():
    assert isinstance(recover_real(reject_all(), 2000), Exhausted)


def test_program_oracle_matches_code():
    # halts with a nonzero answer on every input: every index accepted
    code = assemble("SET 0 1\nHALT 0")
    p = program_oracle(code)
    assert p.query(0, 4) and p.query(17, 4)
    never = program_oracle(assemble("SET 0 0\nHALT 0"))
    assert not never.query(3, 50)


@pytest.mark.parametrize("z", range(8))
def test_cpo_recovery_exact(z):
    cpo = powerset_cpo(3)
    point = recover_cpo_point(cpo_oracle(cpo, z), cpo, 10_000)
    assert cpo_value(point, cpo, 10_000) == z


def test_cpo_recovery_respects_budget():
    cpo = powerset_cpo(3)
    point = recover_cpo_point(cpo_oracle(cpo, 7), cpo, 0)
    assert cpo_value(point, cpo, 1000) == 0


def test_genuine_oracle_passes_laws():
    rng = random.Random(3)
    samples = real_law_samples(rng, 20)
    for q in (Fraction(0), Fraction(1, 3), Fraction(9, 8)):
        report = check_filter_laws(point_oracle(REALS, DyadicReal.from_fraction(q)), REALS,
                                   samples, fuel=64)
        assert report.ok, report.failures
        assert report.summary()["pass"] >= 40


def test_crafted_oracle_breaks_meet():
    i = ball_index(Fraction(1, 2), 2)
    report = check_filter_laws(single_ball_oracle(i), REALS, [meet_violation_sample(i)], fuel=64)
    assert [v.law for v in report.failures] == ["meet"]


def test_meet_violation_sample_names_same_ball():
    i = ball_index(Fraction(3, 4), 3)
    t, t1, t2 = meet_violation_sample(i)
    assert t == t1 == [i] and len(t2) == 1
    assert t2[0] != i and ball(t2[0]) == ball(i)


def test_reject_all_fails_top_law():
    report = check_filter_laws(reject_all(), REALS, real_law_samples(random.Random(0), 2), 32)
    assert {v.law for v in report.failures} == {"top"}


def test_no_samples_gives_empty_report():
    report = check_filter_laws(reject_all(), REALS, [], 32)
    assert report.ok and report.verdicts == []


def test_slow_oracle_is_inconclusive_not_failed():
    x = DyadicReal.from_fraction(Fraction(1, 3))
    base = point_oracle(REALS, x)
    slow = FilterOracle(lambda i, f: base.query(i, f // 8), "slow")
    i = ball_index(Fraction(0), 0)
    j = ball_index(Fraction(1, 4), 1)
    report = check_filter_laws(slow, REALS, [([i], [i, j], [i])], fuel=4)
    assert report.ok
    assert report.summary()["inconclusive"] >= 1


def test_premise_sees_balls_missed_by_generic_samples():
    # two radius-1/8 balls that no generic sample point need land in
    a, b = ball_index(Fraction(7, 4), 3), ball_index(Fraction(15, 8), 3)
    x = point_oracle(REALS, DyadicReal.from_fraction(Fraction(7, 4)))
    report = check_filter_laws(x, REALS, [([a], [b], [a])], fuel=64, points=[])
    assert report.ok
