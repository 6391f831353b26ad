import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msslab.errors import MissingPrime, NearDegenerateAlphas, ParseError
from msslab.satake import (
    FormSpec,
    SatakeParams,
    build_coefficient_table,
    complete_homogeneous,
    ingest_ap_file,
    is_prime,
    keyed_uniform,
    multi_index_prime_power,
    prime_power_eigenvalue,
    primes_up_to,
    sample_tempered_satake,
    satake_for_prime,
    satake_from_gl2_lift,
    sato_tate_angles,
    schur_determinant,
    validate_satake,
)


def random_unitary_alphas(n, rng):
    """Unit-circle parameters with product exactly 1 (not conjugation-closed)."""
    angles = rng.uniform(0.0, 2.0 * np.pi, size=n - 1)
    angles = np.append(angles, -angles.sum())
    return tuple(np.exp(1j * angles))


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def test_tempered_sample_structure_n3():
    params = sample_tempered_satake(3, 2, seed=7)
    a = np.asarray(params.alphas)
    # conjugate pair plus the fixed point 1
    assert abs(a[2] - 1.0) < 1e-15
    assert abs(a[0] - np.conj(a[1])) < 1e-15
    assert abs(np.prod(a) - 1.0) < 1e-12
    assert np.max(np.abs(np.abs(a) - 1.0)) < 1e-12
    validate_satake(params)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_tempered_sample_invariants(n):
    for p in (2, 101, 65537):
        params = sample_tempered_satake(n, p, seed=3)
        assert params.n == n
        validate_satake(params)


def test_tempered_sample_deterministic():
    a = sample_tempered_satake(3, 17, seed=55)
    b = sample_tempered_satake(3, 17, seed=55)
    assert a.alphas == b.alphas
    c = sample_tempered_satake(3, 17, seed=56)
    assert a.alphas != c.alphas


def test_tempered_sample_rejects_bad_input():
    with pytest.raises(ValueError):
        sample_tempered_satake(2, 3, seed=0)
    with pytest.raises(ValueError):
        sample_tempered_satake(3, 4, seed=0)


def test_sato_tate_angle_statistics():
    # under (2/pi) sin^2: E[cos] = 0, E[cos^2] = 1/4
    u = keyed_uniform(12345, np.arange(200_000), 0)
    phi = sato_tate_angles(u)
    assert abs(np.mean(np.cos(phi))) < 5e-3
    assert abs(np.mean(np.cos(phi) ** 2) - 0.25) < 5e-3


def test_keyed_uniform_matches_scalar_and_vector():
    ps = np.array([2, 3, 971, 1000003], dtype=np.int64)
    vec = keyed_uniform(99, ps, 1)
    for i, p in enumerate(ps):
        assert float(keyed_uniform(99, int(p), 1)) == float(vec[i])


# ---------------------------------------------------------------------------
# lifts
# ---------------------------------------------------------------------------

def test_lift_ap_two_gives_all_ones():
    params = satake_from_gl2_lift(2.0, 3)
    assert np.allclose(np.asarray(params.alphas), 1.0)


def test_lift_ap_zero():
    params = satake_from_gl2_lift(0.0, 3)
    a = sorted(np.asarray(params.alphas), key=lambda z: z.real)
    assert np.allclose(a, [-1.0, -1.0, 1.0], atol=1e-12)


def test_lift_tau_of_two():
    # a_2 = -24 / 2^(11/2) for the weight-12 discriminant form
    a_p = -24.0 / 2**5.5
    params = satake_from_gl2_lift(a_p, 3)
    h1 = prime_power_eigenvalue(params, 1)
    assert abs(h1 - (a_p**2 - 1.0)) < 1e-12
    assert abs(h1 - (-0.71875)) < 1e-12


def test_lift_beyond_two_flagged_non_tempered():
    params = satake_from_gl2_lift(2.5, 3)
    assert not params.tempered
    assert abs(np.prod(np.asarray(params.alphas)) - 1.0) < 1e-12
    # trace still matches h_1 = a_p^2 - 1
    assert abs(prime_power_eigenvalue(params, 1) - (2.5**2 - 1.0)) < 1e-10


# ---------------------------------------------------------------------------
# symmetric polynomials
# ---------------------------------------------------------------------------

def test_complete_homogeneous_base_cases():
    rng = np.random.default_rng(0)
    alphas = random_unitary_alphas(4, rng)
    assert complete_homogeneous(alphas, 0) == 1.0
    assert complete_homogeneous(alphas, -1) == 0.0


@pytest.mark.parametrize("k", range(0, 9))
def test_complete_homogeneous_all_ones(k):
    # generating function (1-T)^(-3): coefficient C(k+2, 2)
    assert abs(complete_homogeneous([1.0, 1.0, 1.0], k) - math.comb(k + 2, 2)) < 1e-12


def test_complete_homogeneous_cube_roots():
    w = np.exp(2j * np.pi / 3)
    alphas = [1.0, w, w**2]
    # generating function 1/(1-T^3)
    for k in range(12):
        expect = 1.0 if k % 3 == 0 else 0.0
        assert abs(complete_homogeneous(alphas, k) - expect) < 1e-12


def test_schur_determinant_zero_subscript_is_one():
    rng = np.random.default_rng(5)
    for n in (3, 4, 5):
        alphas = random_unitary_alphas(n, rng)
        assert abs(schur_determinant(alphas, (0,) * (n - 1)) - 1.0) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 8), st.integers(3, 5), st.integers(0, 10**6))
def test_schur_oracle_matches_recurrence(k, n, seed):
    rng = np.random.default_rng(seed)
    alphas = random_unitary_alphas(n, rng)
    try:
        oracle = schur_determinant(alphas, (0,) * (n - 2) + (k,))
    except NearDegenerateAlphas:
        return
    assert abs(complete_homogeneous(alphas, k) - oracle) < 1e-9


def test_schur_duality_conjugate_reversal():
    rng = np.random.default_rng(11)
    for n in (3, 4, 5):
        for _ in range(20):
            alphas = random_unitary_alphas(n, rng)
            betas = tuple(rng.integers(0, 4, size=n - 1))
            try:
                v = schur_determinant(alphas, betas)
                w = schur_determinant(alphas, betas[::-1])
            except NearDegenerateAlphas:
                continue
            assert abs(v - np.conj(w)) < 1e-9


def test_schur_raises_on_degenerate_alphas():
    with pytest.raises(NearDegenerateAlphas):
        schur_determinant([1.0, 1.0, 1.0], (0, 1))


def test_multi_index_consistency():
    params = sample_tempered_satake(3, 13, seed=2)
    raw = SatakeParams(p=13, alphas=params.alphas, self_dual=False)
    # all-zero tuple
    assert abs(multi_index_prime_power(raw, (0, 0)) - 1.0) < 1e-12
    # (k, 0, ..., 0) recovers A(p^k)
    for k in range(6):
        a = multi_index_prime_power(raw, (k, 0))
        b = complete_homogeneous(params.alphas, k)
        assert abs(a - b) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 5), st.integers(0, 10**6))
def test_multi_index_duality(n, seed):
    rng = np.random.default_rng(seed)
    alphas = random_unitary_alphas(n, rng)
    raw = SatakeParams(p=2, alphas=alphas, self_dual=False)
    betas = tuple(rng.integers(0, 4, size=n - 1))
    v = multi_index_prime_power(raw, betas)
    w = multi_index_prime_power(raw, betas[::-1])
    assert abs(v - np.conj(w)) < 1e-9


def test_multi_index_matches_vandermonde_oracle():
    rng = np.random.default_rng(3)
    for _ in range(50):
        alphas = random_unitary_alphas(3, rng)
        raw = SatakeParams(p=2, alphas=alphas, self_dual=False)
        betas = tuple(rng.integers(0, 5, size=2))
        try:
            oracle = schur_determinant(alphas, betas[::-1])
        except NearDegenerateAlphas:
            continue
        assert abs(multi_index_prime_power(raw, betas) - oracle) < 1e-9


def test_prime_power_eigenvalue_examples():
    lift2 = satake_from_gl2_lift(2.0, 3)
    assert prime_power_eigenvalue(lift2, 0) == 1.0
    assert abs(prime_power_eigenvalue(lift2, 1) - 3.0) < 1e-12
    lift0 = satake_from_gl2_lift(0.0, 3)
    assert abs(prime_power_eigenvalue(lift0, 1) - (-1.0)) < 1e-12


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

def test_degenerate_table_all_ones(degenerate_table):
    assert np.all(degenerate_table.values[1:] == 1.0)
    assert degenerate_table.prefix[100] == 100.0
    assert not degenerate_table.form.arithmetic


def test_table_normalisation(small_table):
    assert small_table.values[1] == 1.0
    assert small_table.prefix[0] == 0.0


def test_table_coprime_product_exact(small_table):
    v = small_table.values
    assert v[6] == v[2] * v[3]
    assert v[10] == v[2] * v[5]
    assert v[15] == v[3] * v[5]


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 440), st.integers(2, 440))
def test_table_multiplicativity(small_table, a, b):
    if math.gcd(a, b) != 1:
        return
    v = small_table.values
    assert abs(v[a * b] - v[a] * v[b]) < 1e-9


def test_table_prefix_consistency(small_table):
    # float64 running sums reproduce each value to within a few ulps of the
    # running prefix magnitude
    idx = np.arange(1, small_table.M + 1)
    diff = small_table.prefix[idx] - small_table.prefix[idx - 1] - small_table.values[idx]
    scale = np.maximum(np.abs(small_table.prefix[idx]), 1.0)
    assert np.max(np.abs(diff) / scale) < 1e-14


def test_table_hecke_bound(small_table):
    primes = primes_up_to(small_table.M)
    assert np.max(np.abs(small_table.values[primes])) <= 3.0 + 1e-12


def test_table_deterministic(synthetic_form):
    t1 = build_coefficient_table(synthetic_form, 5_000)
    t2 = build_coefficient_table(synthetic_form, 5_000)
    assert np.array_equal(t1.values, t2.values)
    assert np.array_equal(t1.prefix, t2.prefix)


def test_table_matches_scalar_path(small_table, synthetic_form):
    for p in (2, 3, 449, 1451, 99991):
        params = satake_for_prime(synthetic_form, p)
        assert abs(small_table.values[p] - prime_power_eigenvalue(params, 1)) < 1e-12
    # prime powers
    for p, k in ((2, 5), (3, 3), (7, 2)):
        params = satake_for_prime(synthetic_form, p)
        assert abs(small_table.values[p**k] - prime_power_eigenvalue(params, k)) < 1e-12


def test_prefix_slice_matches_smaller_build(synthetic_form):
    big = build_coefficient_table(synthetic_form, 20_000)
    small = build_coefficient_table(synthetic_form, 1_000)
    assert np.max(np.abs(big.values[:1_001] - small.values)) < 1e-12


# ---------------------------------------------------------------------------
# a_p files
# ---------------------------------------------------------------------------

def test_ingest_ap_file(tmp_path):
    path = tmp_path / "ap.txt"
    path.write_text("# demo\n2 -0.530330\n3 0.9\n5 -1.2\n")
    data = ingest_ap_file(path)
    assert data.lookup(2)[0] == pytest.approx(-0.530330)
    assert list(data.primes) == [2, 3, 5]
    assert data.violations == ()


def test_ingest_flags_large_ap(tmp_path):
    path = tmp_path / "ap.txt"
    path.write_text("2 2.5\n3 0.1\n")
    data = ingest_ap_file(path)
    assert data.violations == (2,)


def test_ingest_malformed_line(tmp_path):
    path = tmp_path / "ap.txt"
    path.write_text("2 0.5\nnot a line\n")
    with pytest.raises(ParseError) as err:
        ingest_ap_file(path)
    assert err.value.line_no == 2


def test_ingest_rejects_decreasing_primes(tmp_path):
    path = tmp_path / "ap.txt"
    path.write_text("5 0.5\n3 0.5\n")
    with pytest.raises(ParseError):
        ingest_ap_file(path)


def test_empty_ap_file_then_missing_prime(tmp_path):
    path = tmp_path / "ap.txt"
    path.write_text("# nothing here\n")
    data = ingest_ap_file(path)
    form = FormSpec(n=3, source="lift", ap_data=data, label="empty")
    with pytest.raises(MissingPrime):
        build_coefficient_table(form, 10)


def test_lift_table_from_file(tmp_path):
    path = tmp_path / "ap.txt"
    primes = primes_up_to(200)
    rng = np.random.default_rng(8)
    lines = [f"{p} {2.0 * math.cos(rng.uniform(0, math.pi)):.10f}" for p in primes]
    path.write_text("\n".join(lines) + "\n")
    data = ingest_ap_file(path)
    form = FormSpec(n=3, source="lift", ap_data=data, label="lift-test")
    table = build_coefficient_table(form, 200)
    for p in (2, 3, 197):
        params = satake_for_prime(form, p)
        assert abs(table.values[p] - prime_power_eigenvalue(params, 1)) < 1e-12
    assert abs(table.values[6] - table.values[2] * table.values[3]) < 1e-12


def test_is_prime_and_sieve_agree():
    primes = set(primes_up_to(500).tolist())
    for m in range(2, 500):
        assert is_prime(m) == (m in primes)
