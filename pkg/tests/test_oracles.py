import itertools
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from noisygt import NoisyChannel, Role, TestDesign
from noisygt import oracles
from noisygt.errors import DomainError, IndexOutOfRange, LengthMismatch, TooLarge


def frac_joint(design, alpha, p01, p10):
    """{(sigma, shown): exact probability} with rational arithmetic."""
    n, m = design.n, design.m
    ch = {(0, 0): 1 - p01, (0, 1): p01, (1, 0): p10, (1, 1): 1 - p10}
    out = {}
    for s in itertools.product((0, 1), repeat=n):
        prior = F(1)
        for b in s:
            prior *= alpha if b else 1 - alpha
        ideal = [int(any(s[j] for j in design.pool(a))) for a in range(m)]
        for t in itertools.product((0, 1), repeat=m):
            w = prior
            for a in range(m):
                w *= ch[ideal[a], t[a]]
            out[s, t] = w
    return out


def frac_success(design, alpha, p01, p10):
    joint = frac_joint(design, alpha, p01, p10)
    sigmas = list(itertools.product((0, 1), repeat=design.n))
    shows = list(itertools.product((0, 1), repeat=design.m))
    map_ok = F(0)
    for t in shows:
        best = max(joint[s, t] for s in sigmas)
        pick = min((s for s in sigmas if joint[s, t] == best), key=lambda s: (sum(s), s))
        map_ok += joint[pick, t]
    gen_ok = F(0)
    for (s, t), w in joint.items():
        good = True
        for i in range(design.n):
            flip = list(s)
            flip[i] ^= 1
            one, zero = (joint[s, t], joint[tuple(flip), t]) if s[i] else (joint[tuple(flip), t], joint[s, t])
            good &= int(one > zero) == s[i]
        if good:
            gen_ok += w
    return map_ok, gen_ok


@st.composite
def tiny_designs(draw):
    n = draw(st.integers(1, 3))
    pools = draw(st.lists(st.lists(st.integers(0, n - 1), min_size=1, max_size=n, unique=True), max_size=3))
    return TestDesign.from_pools(n, pools)


RATIONAL_CASES = [(F(3, 10), F(1, 10), F(1, 5)), (F(1, 2), F(1, 10), F(1, 10)), (F(1, 20), F(3, 10), F(1, 4))]


@settings(max_examples=60, deadline=None)
@given(tiny_designs(), st.sampled_from(RATIONAL_CASES))
def test_success_probabilities_match_fractions(d, case):
    alpha, p01, p10 = case
    ch = NoisyChannel(float(p01), float(p10))
    map_ok, gen_ok = frac_success(d, alpha, p01, p10)
    assert oracles.exact_success_probability(d, float(alpha), ch, "map") == pytest.approx(float(map_ok), abs=1e-13)
    assert oracles.exact_success_probability(d, float(alpha), ch, "genie") == pytest.approx(float(gen_ok), abs=1e-13)


def test_two_individuals_one_pool_exact():
    d = TestDesign.from_pools(2, [[0, 1]])
    map_ok, gen_ok = frac_success(d, F(3, 10), F(1, 10), F(1, 10))
    ch = NoisyChannel(0.1, 0.1)
    # positive pool: P(00,1) = 0.049 < P(10,1) = 0.189, so MAP says 10; negative pool: 00
    assert map_ok == F(49, 100) * F(9, 10) + F(21, 100) * F(9, 10)
    assert oracles.exact_success_probability(d, 0.3, ch, "map") == pytest.approx(float(map_ok), abs=1e-15)
    assert gen_ok >= map_ok


def test_single_individual_test():
    d = TestDesign.from_pools(1, [[0]], Role.F1)
    ch = NoisyChannel(0.1, 0.1)
    assert oracles.exact_success_probability(d, 0.3, ch, "map") == pytest.approx(0.9, abs=1e-15)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_no_tests(n):
    d = TestDesign.empty(n)
    ch = NoisyChannel(0.05, 0.2)
    assert oracles.exact_success_probability(d, 0.2, ch, "map") == pytest.approx(0.8 ** n, rel=1e-13)
    assert oracles.exact_success_probability(d, 0.2, ch, "all_zero") == pytest.approx(0.8 ** n, rel=1e-13)
    assert oracles.map_estimate(d, np.zeros(0), 0.2, ch).tolist() == [0] * n


def test_map_tie_rule():
    # alpha = 1/2 with no tests: every vector ties, most zeros wins
    d = TestDesign.empty(3)
    assert oracles.map_estimate(d, np.zeros(0), 0.5, NoisyChannel(0.1, 0.1)).tolist() == [0, 0, 0]
    # one positive pool over three: 100, 010 and 001 tie; lexicographically smallest is 001
    d = TestDesign.from_pools(3, [[0, 1, 2]])
    est = oracles.map_estimate(d, np.array([1]), 0.2, NoisyChannel(0.01, 0.01))
    assert est.tolist() == [0, 0, 1]


def test_map_matches_brute_force(rng):
    ch = NoisyChannel(0.05, 0.15)
    d = TestDesign.uniform_pools(6, 8, 3, rng)
    obs = rng.integers(0, 2, d.m)
    logw = oracles.posterior_table(d, obs, 0.2, ch)
    est = oracles.map_estimate(d, obs, 0.2, ch)
    code = int(sum(int(b) << i for i, b in enumerate(est)))
    assert logw[code] == pytest.approx(logw.max(), abs=1e-12)


def test_genie_forms_agree_exhaustively():
    for d in oracles.enumerate_designs(2, 3):
        for alpha, (p01, p10) in oracles.ORACLE_SUITE:
            assert oracles.check_genie_forms(d, alpha, NoisyChannel(p01, p10)) == 0


def test_enumerated_family_size():
    # multisets of 0..3 nonempty subsets drawn from 1, 3 and 7 subsets respectively
    counts = {1: 4, 2: 20, 3: 120}
    assert sum(counts.values()) == len(list(oracles.enumerate_designs(3, 3)))


def test_joint_normalises(rng):
    d = TestDesign.uniform_pools(8, 10, 3, rng)
    _, _, logj = oracles.joint_log_table(d, 0.1, NoisyChannel(0.1, 0.2))
    assert np.exp(logj).sum() == pytest.approx(1.0, abs=1e-12)


def test_limits_and_errors():
    ch = NoisyChannel(0.1, 0.1)
    with pytest.raises(TooLarge):
        oracles.posterior_table(TestDesign.empty(21), np.zeros(0), 0.1, ch)
    with pytest.raises(TooLarge):
        oracles.joint_log_table(TestDesign.from_pools(2, [[0]] * 11), 0.1, ch)
    d = TestDesign.from_pools(2, [[0, 1]])
    with pytest.raises(LengthMismatch):
        oracles.map_estimate(d, np.zeros(2), 0.1, ch)
    with pytest.raises(DomainError):
        oracles.map_estimate(d, np.zeros(1), 1.0, ch)
    with pytest.raises(IndexOutOfRange):
        oracles.genie_estimate_direct(d, np.zeros(1), np.zeros(2), 0.1, ch, 2)
    with pytest.raises(ValueError):
        oracles.exact_success_probability(d, 0.1, ch, "oracle")
