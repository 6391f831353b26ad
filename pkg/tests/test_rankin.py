import math

import numpy as np
import pytest

from msslab.errors import Diverges, NonArithmeticForm, PoleProximity, UnsupportedRank
from msslab.rankin import (
    H_f_one,
    empirical_rs_slope,
    local_Pn_value,
    local_rs_factor,
    rs_multi_index_sum,
    weighted_sin_sum,
)
from msslab.satake import (
    FormSpec,
    SatakeParams,
    multi_index_prime_power,
    sample_tempered_satake,
    satake_for_prime,
    satake_from_gl2_lift,
)


def cube_root_params(p=2):
    w = np.exp(2j * np.pi / 3)
    return SatakeParams(p=p, alphas=(1.0 + 0.0j, w, w**2), self_dual=False)


# ---------------------------------------------------------------------------
# local factors
# ---------------------------------------------------------------------------

def test_local_rs_factor_cube_roots():
    # the nine pair products hit each cube root of unity three times, so the
    # product telescopes to (1 - p^-3)^3
    value = local_rs_factor(cube_root_params(), 1.0)
    assert abs(value - (8.0 / 7.0) ** 3) < 1e-12


def test_local_rs_factor_all_ones():
    params = SatakeParams(p=2, alphas=(1.0 + 0j, 1.0 + 0j, 1.0 + 0j))
    assert abs(local_rs_factor(params, 1.0) - 512.0) < 1e-9


def test_local_rs_factor_large_s_limit():
    params = sample_tempered_satake(3, 5, seed=1)
    assert abs(local_rs_factor(params, 60.0) - 1.0) < 1e-12


def test_local_rs_factor_pole_proximity():
    params = SatakeParams(p=2, alphas=(1.0 + 0j, 1.0 + 0j, 1.0 + 0j))
    with pytest.raises(PoleProximity):
        local_rs_factor(params, 1e-14)


def test_local_Pn_at_zero():
    params = sample_tempered_satake(3, 7, seed=4)
    assert local_Pn_value(params, 0.0, k_max=16).value == pytest.approx(1.0)


def test_local_Pn_cube_roots():
    # D_p(T) = 1/(1-T^3) and the pair product equals (1-T^3)^3, so
    # P = (1-T^3)^2 = (1 - 1/8)^2 at T = 1/2
    res = local_Pn_value(cube_root_params(), 0.5, k_max=64)
    assert abs(res.value - 0.765625) < 1e-12
    assert res.converged


def test_local_Pn_truncation_contract():
    for seed in range(20):
        params = sample_tempered_satake(3, 11, seed=seed)
        a = local_Pn_value(params, 0.5, k_max=64).value
        b = local_Pn_value(params, 0.5, k_max=128).value
        assert abs(a - b) < 1e-10


def test_local_Pn_requires_small_T():
    params = sample_tempered_satake(3, 2, seed=0)
    with pytest.raises(ValueError):
        local_Pn_value(params, 1.0, k_max=16)
    with pytest.raises(Diverges):
        local_Pn_value(params, 0.9, k_max=16, vartheta=0.49)


def test_local_Pn_kmax_floor():
    params = sample_tempered_satake(3, 2, seed=0)
    with pytest.raises(ValueError):
        local_Pn_value(params, 0.5, k_max=4)


# ---------------------------------------------------------------------------
# Euler product
# ---------------------------------------------------------------------------

def test_H_f_one_rejects_degenerate():
    form = FormSpec(n=3, source="degenerate", label="ones")
    with pytest.raises(NonArithmeticForm):
        H_f_one(form)


def test_H_f_one_positive_and_converging(synthetic_form):
    est = H_f_one(synthetic_form, P_max=2_000, k_max=64)
    assert est.value > 0.0
    assert est.drift < 0.01
    # doubling the prime cutoff moves the value by less than 1%
    est2 = H_f_one(synthetic_form, P_max=4_000, k_max=64)
    assert abs(est2.value / est.value - 1.0) < 0.01


# ---------------------------------------------------------------------------
# empirical slopes
# ---------------------------------------------------------------------------

def test_slope_degenerate(degenerate_table):
    est = empirical_rs_slope(degenerate_table, 10_000)
    assert est.slope == pytest.approx(1.0)
    assert est.drift < 1e-4


def test_slope_single_entry(unit_table):
    est = empirical_rs_slope(unit_table, 1)
    assert est.slope == pytest.approx(1.0)


def test_slope_positive_with_small_drift(small_table):
    est = empirical_rs_slope(small_table, 200_000)
    assert est.slope > 0.0
    assert est.drift < 0.1


def test_weighted_sin_sum_single_term(unit_table):
    # X^theta < 2 leaves only m = 1
    res = weighted_sin_sum(unit_table, 1.9, 1.0, 10.0)
    assert res.cutoff == 1
    assert res.value == pytest.approx(math.sin(math.pi / 10.0) ** 2)


def test_weighted_sin_sum_monotone_for_small_arguments(degenerate_table):
    # with all arguments below pi/2 the sum decreases in L
    values = [weighted_sin_sum(degenerate_table, 50.0, 1.0, L).value for L in (10.0, 20.0, 40.0)]
    assert values[0] > values[1] > values[2]


def test_weighted_sin_sum_rejects_small_L(unit_table):
    with pytest.raises(ValueError):
        weighted_sin_sum(unit_table, 10.0, 0.3, 1.0)


# ---------------------------------------------------------------------------
# multi-index sums
# ---------------------------------------------------------------------------

def test_multi_index_sum_x_one(synthetic_form, small_table):
    res = rs_multi_index_sum(synthetic_form, 1, table=small_table)
    assert res.value == pytest.approx(1.0)


def test_multi_index_sum_unsupported_rank():
    form = FormSpec(n=4, source="synthetic", seed=1, label="n4")
    with pytest.raises(UnsupportedRank):
        rs_multi_index_sum(form, 100)


def test_multi_index_sum_brute_force_oracle(synthetic_form, small_table):
    def factorize(m):
        out = {}
        d = 2
        while d * d <= m:
            while m % d == 0:
                out[d] = out.get(d, 0) + 1
                m //= d
            d += 1
        if m > 1:
            out[m] = out.get(m, 0) + 1
        return out

    x = 2_000
    total = 0.0
    for m1 in range(1, math.isqrt(x) + 1):
        for m2 in range(1, x // (m1 * m1) + 1):
            f1, f2 = factorize(m1), factorize(m2)
            val = 1.0
            for p in set(f1) | set(f2):
                params = satake_for_prime(synthetic_form, p)
                val *= multi_index_prime_power(params, (f1.get(p, 0), f2.get(p, 0)))
            total += val * val
    fast = rs_multi_index_sum(synthetic_form, x, table=small_table).value
    assert fast == pytest.approx(total, abs=1e-9)


def test_multi_index_sum_ratio_drift(synthetic_form, small_table):
    r1 = rs_multi_index_sum(synthetic_form, 20_000, table=small_table).ratio
    r2 = rs_multi_index_sum(synthetic_form, 200_000, table=small_table).ratio
    assert abs(r1 / r2 - 1.0) < 0.15


def test_three_way_consistency_at_small_scale(synthetic_form, small_table):
    # slope / (multi-index ratio * Euler product) approaches zeta(3); the
    # 25% band around 1 contains it
    slope = empirical_rs_slope(small_table, 200_000).slope
    hf = H_f_one(synthetic_form, P_max=2_000, k_max=64).value
    multi = rs_multi_index_sum(synthetic_form, 200_000, table=small_table).ratio
    ratio = slope / (multi * hf)
    assert abs(ratio - 1.0) <= 0.25
