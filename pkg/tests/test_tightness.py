import itertools

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from qudit_bell.core import DeterministicStrategy, strategy_kernel_value
from qudit_bell.kernels import build_cd_kernel
from qudit_bell.lhv import EnumerationCapError
from qudit_bell.tightness import (
    SLOTS,
    chi_profile,
    class_i_generators,
    generator_rank,
    generator_template,
    generator_vector,
    hyperplane_generators,
    integer_rank,
    tightness_report,
    transform_generator,
    transformed_generators,
)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 8), st.integers(1, 10), st.integers(0, 2**32 - 1), st.integers(-3, 3))
def test_integer_rank_matches_sympy(rows, cols, seed, lo):
    m = np.random.default_rng(seed).integers(lo, 4, size=(rows, cols)).tolist()
    assert integer_rank(m) == sympy.Matrix(m).rank()


def test_integer_rank_edge_cases():
    assert integer_rank([[0, 0], [0, 0]]) == 0
    assert integer_rank([[2, 4], [1, 2]]) == 1
    assert integer_rank([[10**12, 1], [1, 10**-0]]) == 2


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_chi_profile_scores_match_kernel(d):
    k = build_cd_kernel(d)
    for t in itertools.product(range(d), repeat=4):
        s = DeterministicStrategy.from_tuple(t)
        assert chi_profile(s, d).kernel_value == strategy_kernel_value(k, s)


def _sympy_rank(gens, d):
    return sympy.Matrix([generator_vector(s, d) for s in gens]).rank()


# full saturating sets; ranks cross-checked with sympy below
FULL = {2: (8, 8), 3: (30, 24), 4: (64, 47)}


@pytest.mark.parametrize("d", sorted(FULL))
def test_hyperplane_generators(d):
    gens = hyperplane_generators(d)
    k = build_cd_kernel(d)
    assert all(strategy_kernel_value(k, s) == 2 for s in gens)
    assert gens == sorted(gens)
    count, rank = FULL[d]
    assert len(gens) == count
    assert generator_rank(gens, d) == rank == _sympy_rank(gens, d)


@pytest.mark.parametrize("d", range(2, 7))
def test_class_i_generators(d):
    gens = class_i_generators(d)
    assert len(gens) == 4 * d
    assert generator_rank(gens, d) == 4 * d
    for s in gens:
        assert chi_profile(s, d).values().count(-1) == 1


@pytest.mark.parametrize("d", range(2, 7))
def test_transformed_generators_bijection(d):
    labels = transformed_generators(d)
    assert sorted(labels) == [(v, n) for v in range(d) for n in range(len(SLOTS))]


def test_template_and_transform_agree_on_example():
    d = 3
    # a=1, e=0, b=2, c=0: chi12 = -1, the other three vanish
    s = DeterministicStrategy.from_tuple((1, 0, 2, 0))
    assert transform_generator(s, d) == generator_template(1, "12", d)


def test_report_d2_is_tight():
    rep = tightness_report(2)
    assert rep.to_json() == {
        "d": 2,
        "lhv_max": 2,
        "hyperplane_count": 8,
        "rank": 8,
        "required": 8,
        "condition1": True,
        "condition2": True,
        "tight": True,
        "class_i_count": 8,
        "class_i_rank": 8,
    }


def test_report_d3_full_set_reaches_dimension():
    rep = tightness_report(3)
    assert (rep.hyperplane_count, rep.independent_count, rep.required, rep.tight) == (30, 24, 24, True)
    assert (rep.class_i_count, rep.class_i_rank) == (12, 12)


# ranks of the full saturating set, d = 5 re-derived with sympy
RANKS = {4: 47, 5: 79, 6: 118}


@pytest.mark.parametrize("d", sorted(RANKS))
def test_report_not_tight_beyond_three(d):
    rep = tightness_report(d)
    assert rep.condition1 and not rep.condition2 and not rep.tight
    assert rep.independent_count == RANKS[d] < rep.required == 4 * d * (d - 1)


def test_rank_d5_against_sympy():
    assert _sympy_rank(hyperplane_generators(5), 5) == RANKS[5]


def test_generator_rank_needs_input():
    with pytest.raises(ValueError):
        generator_rank([], 3)
    with pytest.raises(EnumerationCapError):
        hyperplane_generators(4, cap=10)
