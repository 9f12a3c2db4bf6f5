import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ktop.engine import (MonotoneMachine, OvertSubset, SupportCertificate, accepts,
                         check_monotone, initial_segments, overt_exists, shrink_support,
                         wso_search)
from ktop.errors import ContractViolation, InvalidCertificate, PremiseFailed
from ktop.sigma import Exhausted, Found, markov_run, top
from ktop.spaces import DyadicReal, ScottPoint, ball_member


def test_has_on_naturals_support_is_bounded():
    m = MonotoneMachine.has({2, 5})
    cert = accepts(m, ScottPoint.naturals(), 1000)
    assert isinstance(cert, SupportCertificate)
    assert {2, 5} <= cert.support <= set(range(6))
    assert cert.replay(m)


def test_always_has_empty_support():
    cert = accepts(MonotoneMachine.always(), ScottPoint.primes(), 10)
    assert cert.support == frozenset() and cert.fuel == 0


def test_never_exhausts():
    out = accepts(MonotoneMachine.never(), ScottPoint.naturals(), 500)
    assert isinstance(out, Exhausted) and out.budget == 500


def test_acceptance_stage_is_least():
    m = MonotoneMachine.has({7})
    cert = accepts(m, ScottPoint.naturals(), 10_000)
    assert cert.replay(m)
    assert not m.step(ScottPoint.naturals().observed(cert.fuel - 1), cert.fuel - 1)


def test_after_fuel_delays_acceptance():
    m = MonotoneMachine.has({1}, after=100)
    cert = accepts(m, ScottPoint.naturals(), 10_000)
    assert cert.fuel == 100


def test_shrink_to_needed_elements():
    m = MonotoneMachine.has({2, 5})
    cert = SupportCertificate(frozenset(range(6)), 6)
    assert shrink_support(m, cert).support == {2, 5}


def test_shrink_keeps_minimal_support():
    m = MonotoneMachine.has({2, 5})
    cert = SupportCertificate(frozenset({2, 5}), 6)
    assert shrink_support(m, cert).support == cert.support


def test_shrink_rejects_tampered_certificate():
    m = MonotoneMachine.has({2, 5})
    with pytest.raises(InvalidCertificate):
        shrink_support(m, SupportCertificate(frozenset({2, 4}), 6))


def test_shrink_on_disjunction_picks_one_branch():
    m = MonotoneMachine.has({1}) | MonotoneMachine.has({3})
    out = shrink_support(m, SupportCertificate(frozenset({1, 3}), 4))
    assert out.support in ({1}, {3})
    assert out.replay(m)


@settings(max_examples=50, deadline=None)
@given(extra=st.sets(st.integers(0, 40), max_size=12), seed=st.integers(0, 10**6))
def test_extension_property(extra, seed):
    """A point whose enumeration covers the support is accepted too."""
    m = MonotoneMachine.has({2, 5})
    cert = shrink_support(m, accepts(m, ScottPoint.naturals(), 1000))
    values = sorted(set(extra) | cert.support)
    random.Random(seed).shuffle(values)
    other = ScottPoint.finite(values)
    got = accepts(m, other, 1000)
    assert isinstance(got, SupportCertificate)
    assert got.support <= set(values)


def test_non_monotone_machine_is_caught_by_accepts():
    flaky = MonotoneMachine(lambda o, f: 0 < f < 3, "flaky")
    with pytest.raises(ContractViolation):
        accepts(flaky, ScottPoint.naturals(), 100)


def test_check_monotone_spots_violation():
    rng = random.Random(1)
    check_monotone(MonotoneMachine.has({1, 2}), range(8), rng)
    odd = MonotoneMachine(lambda o, f: len(o) == 1, "exactly one")
    with pytest.raises(ContractViolation):
        check_monotone(odd, range(8), rng, trials=300)


def test_wso_least_finite_witness():
    out = wso_search(initial_segments, MonotoneMachine.has({3}), 10_000)
    assert isinstance(out, Found) and out.value == 4


def test_wso_immediate_acceptance():
    out = wso_search(initial_segments, MonotoneMachine.always(), 100)
    assert out.value == 0


def test_wso_result_passes_independent_check():
    m = MonotoneMachine.has({0, 6})
    out = wso_search(initial_segments, m, 10_000)
    from ktop.sigma import OmegaBar
    assert isinstance(accepts(m, initial_segments(OmegaBar.of(out.value)), 10_000),
                      SupportCertificate)
    assert out.value == 7


def test_wso_premise_failure():
    with pytest.raises(PremiseFailed):
        wso_search(initial_segments, MonotoneMachine.never(), 200)


def test_overt_exists_evens_near_twelve():
    evens = OvertSubset(lambda n: DyadicReal.from_fraction(2 * n))
    out = overt_exists(evens, lambda x: ball_member(x, 12, 1), 100_000)
    assert isinstance(out, Found)
    assert out.value.exact == 12
    assert markov_run(ball_member(out.value, 12, 1), 1000)


def test_overt_exists_empty():
    assert isinstance(overt_exists(OvertSubset.empty(), lambda x: top(), 300), Exhausted)


def test_overt_exists_top_returns_first_point():
    pts = OvertSubset(lambda n: None if n < 3 else n * 10)
    out = overt_exists(pts, lambda x: top(), 1000)
    assert out.value == 30 and out.index == 3


def test_overt_from_list():
    s = OvertSubset.from_list([Fraction(1, 2), Fraction(3, 4)])
    assert s.enumerate(1) == Fraction(3, 4) and s.enumerate(2) is None
