from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpsim.bits import format_config, parse_bits
from mpsim.bnet import parse_bnet
from mpsim.errors import CapExceededError
from mpsim.oracle import (
    Tables,
    async_successors,
    exact_propensities,
    format_relation,
    fully_async_successors,
    mp_relation,
    mp_successors_bruteforce,
    smallest_closed,
    trap_spaces_bruteforce,
)
from mpsim.sampler import Constant, Custom, ExponentialDecay, SimulationParams, WeightVector

from netgen import networks, random_network

TOY_A = parse_bnet("x1, 1\nx2, x1\nx3, (!x1 & x2) | x3")
TOY_B = parse_bnet("x1, x1 & !x3\nx2, x1\nx3, !x1")


def strs(configs, n=3):
    return {format_config(y, n) for y in configs}


def uniform(f, depth):
    return SimulationParams(depth=depth, weights=WeightVector.uniform(f.n))


def test_mp_successors_examples():
    assert strs(mp_successors_bruteforce(TOY_A, 0)) == {"000", "100", "110", "101", "111"}
    assert strs(mp_successors_bruteforce(TOY_B, parse_bits("111"))) - {"111"} == {
        "101",
        "010",
        "100",
        "000",
        "110",
        "001",
        "011",
    }


def test_closure_choice_matters_for_011():
    t = Tables(TOY_A)
    x = parse_bits("011")
    target = parse_bits("001")
    assert target in mp_successors_bruteforce(TOY_A, x, t)
    # the {2,3}-closure 0*1 contains 001; the full closure **1 cannot reach it
    assert smallest_closed(t, x, 0b110) == 0b010
    cube = t.cube(x, smallest_closed(t, x, 0b111))
    values = t.values_on(1, cube)
    assert values == {0, 1}
    assert format_config(smallest_closed(t, x, 0b111), 3) == "110"


def test_async_examples():
    x = parse_bits("111")
    assert strs(async_successors(TOY_B, x)) == {"011", "110", "010"}
    assert strs(fully_async_successors(TOY_B, x)) == {"011", "110"}
    fp = parse_bits("110")
    assert async_successors(TOY_A, fp) == set() == fully_async_successors(TOY_A, fp)


def test_trap_space_examples():
    assert trap_spaces_bruteforce(TOY_A) == ["110", "111"]
    assert trap_spaces_bruteforce(TOY_B) == ["001", "110"]
    assert trap_spaces_bruteforce(parse_bnet("a, !a")) == ["*"]


def test_caps():
    big = random_network(random.Random(0), 11)
    with pytest.raises(CapExceededError):
        trap_spaces_bruteforce(big)
    with pytest.raises(CapExceededError):
        exact_propensities(big, 0, uniform(big, Constant(1)))
    with pytest.raises(CapExceededError):
        Tables(big, cap=10)


@settings(max_examples=60, deadline=None)
@given(networks(max_n=7, monotone=False), st.data())
def test_successor_inclusions(f, data):
    x = data.draw(st.integers(0, (1 << f.n) - 1))
    mp = mp_successors_bruteforce(f, x)
    ga = async_successors(f, x)
    fa = fully_async_successors(f, x)
    assert x in mp
    assert fa <= ga <= mp


@settings(max_examples=40, deadline=None)
@given(networks(max_n=5, monotone=False))
def test_mp_relation_is_transitive(f):
    rel = mp_relation(f)
    succ = {}
    for a, b in rel:
        succ.setdefault(a, set()).add(b)
    for a, bs in succ.items():
        for b in bs:
            assert succ[b] <= bs


def test_format_relation():
    pairs = {(0, 1), (0, 3)}
    assert format_relation(pairs, 3) == "000 -> 100\n000 -> 110\n"


@pytest.mark.parametrize(
    "f, x0, depth, want",
    [
        (TOY_A, 0, Constant(3), {"110": 0.5, "111": 0.5}),
        (TOY_A, 0, ExponentialDecay(3), {"110": 13 / 14, "111": 1 / 14}),
        (TOY_B, 0b111, Constant(1), {"001": 2 / 3, "110": 1 / 3}),
        (TOY_A, 0, Constant(1), {"110": 1.0, "111": 0.0}),
        (TOY_A, parse_bits("111"), Constant(3), {"110": 0.0, "111": 1.0}),
    ],
)
def test_exact_propensities(f, x0, depth, want):
    got = exact_propensities(f, x0, uniform(f, depth))
    assert got == pytest.approx(want, abs=1e-9)


def test_exact_propensities_single_flip_toy_b():
    p = SimulationParams(depth=Constant(1), weights=WeightVector.single(3))
    assert exact_propensities(TOY_B, 0b111, p) == pytest.approx({"001": 0.5, "110": 0.5})


@settings(max_examples=30, deadline=None)
@given(networks(max_n=5, monotone=True), st.data())
def test_exact_propensities_sum_to_one(f, data):
    x0 = data.draw(st.integers(0, (1 << f.n) - 1))
    # depth n keeps positive mass: the walk then always reaches a strong basin
    probs = [data.draw(st.integers(0, 3)) for _ in range(f.n - 1)] + [data.draw(st.integers(1, 3))]
    depth = Custom(tuple(p / sum(probs) for p in probs))
    got = exact_propensities(f, x0, SimulationParams(depth=depth, weights=WeightVector.uniform(f.n)))
    assert sum(got.values()) == pytest.approx(1, abs=1e-9)
    assert all(v >= -1e-12 for v in got.values())
