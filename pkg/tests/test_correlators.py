import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import PAIRS, bell_tables
from qudit_bell.core import DimensionMismatchError, evaluate_kernel, random_product_behavior, uniform_behavior
from qudit_bell.correlators import (
    Verdict,
    cd_family,
    cglmp_family,
    closed_form_correlator,
    condition_check,
    correlator_value,
    eq3_family,
    eq4_family,
    eq5_family,
    family_from_json,
    family_sum,
    family_values,
    general_family,
    two_level_dual_family,
    two_level_family,
)
from qudit_bell.kernels import build_cd_kernel
from qudit_bell.quantum import oracle_behavior


def test_eq_aliases_cover_all_pairs():
    d = 4
    assert eq3_family(d).pair == (1, 2)
    assert eq4_family(d).pair == (2, 1)
    assert eq5_family(d, 1).pair == (1, 1)
    assert eq5_family(d, 2).pair == (2, 2)
    assert all(cd_family(d, p).sigma == -1 for p in PAIRS)


@pytest.mark.parametrize("d", [2, 3, 5, 8])
def test_cd_families_positive_and_uniform(d):
    b = oracle_behavior(d)
    for pair in PAIRS:
        values = family_values(b, cd_family(d, pair))
        assert min(values) > 0
        assert np.ptp(values) < 1e-14
        assert condition_check(values).classification is Verdict.ALL_POSITIVE


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_cd_kernel_is_sum_of_families(d):
    b = random_product_behavior(d, np.random.default_rng(d))
    total = sum(family_sum(b, cd_family(d, p)) for p in PAIRS)
    assert total == pytest.approx(evaluate_kernel(build_cd_kernel(d), b), abs=1e-14)


def test_cd_family_cells_by_hand():
    # C_m^(12) = P(v1 = -m, v2 = m) - P(v1 = -m + 1, v2 = m) on pair (1, 2)
    d = 3
    ref = bell_tables(d)[1, 2]
    b = oracle_behavior(d)
    fam = eq3_family(d)
    for m in range(d):
        expect = ref[(-m) % d][m] - ref[(-m + 1) % d][m]
        assert correlator_value(b, fam.specs[m], m) == pytest.approx(expect, abs=1e-14)


# per-m values from mpmath: (csc^2((1+4k)pi/4d) - csc^2((3+4k)pi/4d)) / (2 d^3)
FROZEN = {
    (3, 0): 0.23941117093102795,
    (4, 1): 0.0031788793927742932,
    (3, 1): 0.0,
}


@pytest.mark.parametrize("key", sorted(FROZEN))
def test_closed_form_correlator_frozen(key):
    assert closed_form_correlator(*key) == pytest.approx(FROZEN[key], abs=1e-15)


@pytest.mark.parametrize("d", range(2, 11))
def test_cglmp_families_match_closed_form(d):
    b = oracle_behavior(d, labeling="difference")
    for k in range(d // 2 + 1):
        expect = closed_form_correlator(d, k)
        for pair in PAIRS:
            assert np.allclose(family_values(b, cglmp_family(d, pair, k)), expect, atol=1e-12)


def test_cd_and_cglmp_k0_agree_per_m():
    d = 5
    s = oracle_behavior(d, labeling="sum")
    t = oracle_behavior(d, labeling="difference")
    for pair in PAIRS:
        assert np.allclose(family_values(s, cd_family(d, pair)), family_values(t, cglmp_family(d, pair, 0)))


def test_family_sum_of_product_pair_with_offset_zero():
    assert family_sum(uniform_behavior(3), general_family(3, (1, 1), 0, 2)) == pytest.approx(0)


@settings(max_examples=200)
@given(
    st.integers(2, 6),
    st.sampled_from(PAIRS),
    st.integers(0, 5),
    st.integers(0, 5),
    st.sampled_from([-1, 1]),
    st.booleans(),
    st.integers(0, 2**32 - 1),
)
def test_product_behaviors_never_definite(d, pair, alpha, beta, sigma, dual, seed):
    if (alpha - beta) % d == 0:
        return
    fam = general_family(d, pair, alpha, beta, sigma=sigma, dual=dual)
    b = random_product_behavior(d, np.random.default_rng(seed))
    assert condition_check(family_values(b, fam)).classification is Verdict.INDEFINITE


@given(st.integers(0, 2**32 - 1), st.sampled_from(PAIRS))
def test_two_level_product_sign(seed, pair):
    b = random_product_behavior(2, np.random.default_rng(seed))
    c0, c1 = family_values(b, two_level_family(pair))
    assert c0 * c1 <= 1e-16
    c0, c1 = family_values(b, two_level_dual_family(pair))
    assert c0 * c1 <= 1e-16


def test_condition_check():
    assert condition_check([1e-3, 2e-3]).classification is Verdict.ALL_POSITIVE
    assert condition_check([-1.0, -2.0]).classification is Verdict.ALL_NEGATIVE
    assert condition_check([1.0, 0.0]).classification is Verdict.INDEFINITE
    assert condition_check([1.0, 1e-11]).classification is Verdict.INDEFINITE
    with pytest.raises(ValueError):
        condition_check([])


def test_family_descriptor_round_trip():
    fam = general_family(3, (1, 2), 0, 1, sigma=-1)
    obj = fam.to_json()
    assert obj == {"pair": "12", "sigma": -1, "alpha": 0, "beta": 1, "d": 3}
    assert family_from_json(obj) == fam
    with pytest.raises(ValueError, match="malformed"):
        family_from_json({"pair": "12", "d": 3})


def test_family_errors():
    with pytest.raises(ValueError):
        cglmp_family(4, (1, 1), 3)
    with pytest.raises(DimensionMismatchError):
        family_values(uniform_behavior(3), cd_family(4, (1, 1)))
    with pytest.raises(ValueError):
        correlator_value(uniform_behavior(3), cd_family(3, (1, 1)).specs[0], 3)
