"""Rankin-Selberg local factors, the Euler product H_f(1), and slope experiments.

The local second-moment generating function at a prime p,

    D_p(T) = sum_{k>=0} h_k(alpha) conj(h_k(alpha)) T^k,

factors as P_n(alpha, conj(alpha), T) / prod_{j,l} (1 - alpha_j conj(alpha_l) T)
for a fixed polynomial P_n.  ``local_Pn_value`` evaluates P_n by truncating the
series and multiplying back the product; ``H_f_one`` multiplies the local values
at T = 1/p into the Euler product that links sum_{m<=x} |A(m)|^2 to the
Rankin-Selberg residue.  ``empirical_rs_slope`` and ``rs_multi_index_sum``
measure the corresponding partial-sum slopes directly from a coefficient table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import Diverges, NonArithmeticForm, PoleProximity, UnsupportedRank
from .satake import (
    FormSpec,
    HeckeTable,
    SatakeParams,
    _h_sequence,
    _schur_jacobi_trudi,
    build_coefficient_table,
    primes_up_to,
    satake_for_prime,
)

__all__ = [
    "LocalFactorValue",
    "SlopeEstimate",
    "HfOneEstimate",
    "SinSumResult",
    "MultiIndexResult",
    "local_rs_factor",
    "local_Pn_value",
    "H_f_one",
    "empirical_rs_slope",
    "weighted_sin_sum",
    "rs_multi_index_sum",
]

_CONVERGED_TAIL = 1e-10


@dataclass(frozen=True)
class LocalFactorValue:
    """One converged local evaluation with its truncation bookkeeping."""

    p: int
    value: float
    truncation_k: int
    tail_bound: float

    @property
    def converged(self) -> bool:
        return self.tail_bound < _CONVERGED_TAIL


@dataclass(frozen=True)
class SlopeEstimate:
    """Estimate of the mean-square slope sum_{m<=x} |A(m)|^2 / x."""

    x: float
    slope: float
    drift: float  # relative change from x/2 to x, never silently dropped


@dataclass(frozen=True)
class HfOneEstimate:
    value: float
    P_max: int
    k_max: int
    drift: float  # relative change over the last decade of the prime cutoff
    tail_estimate: float  # fitted envelope for the omitted primes


@dataclass(frozen=True)
class SinSumResult:
    value: float
    prediction: float  # slope * n * pi^2 / (2 L)
    cutoff: int
    slope: float

    @property
    def ratio(self) -> float:
        return self.value / self.prediction


@dataclass(frozen=True)
class MultiIndexResult:
    x: int
    value: float
    ratio: float


# ---------------------------------------------------------------------------
# local factors
# ---------------------------------------------------------------------------

def local_rs_factor(params: SatakeParams, s: complex) -> complex:
    """prod_{j,l} (1 - alpha_j conj(alpha_l) p^{-s})^{-1} at the prime of ``params``."""
    ps = complex(params.p) ** (-s)
    a = np.asarray(params.alphas, dtype=complex)
    pairs = np.multiply.outer(a, np.conj(a)).ravel()
    factors = 1.0 - pairs * ps
    if np.min(np.abs(factors)) < 1e-12:
        raise PoleProximity(f"local factor within 1e-12 of zero at p={params.p}")
    return complex(1.0 / np.prod(factors))


def _pn_tail_envelope(n: int, k_max: int, q: float) -> float:
    """Provable bound on sum_{k>k_max} |h_k|^2 q^k using |h_k| <= C(k+n-1, n-1) r^k.

    With q = r^2 |T| < 1 the terms are C(k+n-1, n-1)^2 q^k; summed until they
    fall below 1e-3 of the running total's ulp.
    """
    total = 0.0
    k = k_max + 1
    coeff = math.comb(k + n - 1, n - 1)
    term = coeff * coeff * q**k
    while term > 1e-320:
        total += term
        k += 1
        coeff = coeff * (k + n - 1) // k
        term = coeff * coeff * q**k
        if term < total * 1e-18 and k > k_max + 8:
            total += term / max(1e-30, 1.0 - q)  # geometric cap on the rest
            break
    return total


def local_Pn_value(
    params: SatakeParams,
    T: float,
    k_max: int = 64,
    vartheta: float = 0.0,
) -> LocalFactorValue:
    """P_n(alpha, conj(alpha), T) via series truncation at k_max.

    value = [sum_{k<=k_max} h_k conj(h_k) T^k] * prod_{j,l}(1 - alpha_j conj(alpha_l) T).
    The reported tail bound covers the dropped series mass times a bound on the
    product factor; the evaluation only counts as converged below 1e-10.
    """
    n = params.n
    if k_max < n * n:
        raise ValueError(f"k_max={k_max} must be >= n^2 = {n * n}")
    T = float(T)
    if abs(T) >= 1.0:
        raise ValueError("|T| must be < 1")
    rmax = max(float(np.max(np.abs(np.asarray(params.alphas, dtype=complex)))), float(params.p) ** vartheta)
    q = rmax * rmax * abs(T)
    if q >= 1.0:
        raise Diverges(f"p^(2 theta) |T| = {q:.6f} >= 1 at p={params.p}")
    h = _h_sequence(list(params.alphas), k_max)
    powers = T ** np.arange(k_max + 1)
    series = complex(np.sum(h * np.conj(h) * powers))
    a = np.asarray(params.alphas, dtype=complex)
    pairs = np.multiply.outer(a, np.conj(a)).ravel()
    prod = complex(np.prod(1.0 - pairs * T))
    value = series * prod
    prod_bound = (1.0 + q) ** (n * n)
    tail = _pn_tail_envelope(n, k_max, q) * prod_bound
    return LocalFactorValue(p=params.p, value=float(value.real), truncation_k=k_max, tail_bound=tail)


def H_f_one(form: FormSpec, P_max: int = 10_000, k_max: int = 64) -> HfOneEstimate:
    """Euler product prod_{p <= P_max} P_n(alpha_p, conj(alpha_p), 1/p).

    Rejects the degenerate constant-one form (non-arithmetic).  Reports the
    relative drift over the last decade of the prime cutoff and a fitted
    log-tail estimate c * integral_{P_max}^inf t^(2 theta - 2) / log t dt with
    c calibrated on the last decade of local factors.
    """
    if not form.arithmetic:
        raise NonArithmeticForm("H_f(1) is undefined for the constant-one test form")
    if form.theta_assumed >= 0.5:
        raise ValueError("requires theta_assumed < 1/2")
    primes = primes_up_to(P_max)
    if len(primes) == 0:
        raise ValueError("P_max too small")
    log_total = 0.0
    log_at_decade = None
    decade_cut = P_max / 10.0
    fit_c = 0.0
    theta = form.theta_assumed
    for p in primes:
        p = int(p)
        params = satake_for_prime(form, p)
        local = local_Pn_value(params, 1.0 / p, k_max=k_max, vartheta=theta)
        if local.value <= 0.0:
            raise PoleProximity(f"non-positive local value {local.value!r} at p={p}")
        lp = math.log(local.value)
        if p > decade_cut:
            if log_at_decade is None:
                log_at_decade = log_total
            fit_c = max(fit_c, abs(lp) * p ** (2.0 - 2.0 * theta))
        log_total += lp
    value = math.exp(log_total)
    drift = abs(math.expm1(log_total - log_at_decade)) if log_at_decade is not None else float("nan")
    # integral_{P}^inf t^(2 theta - 2)/log t dt ~ P^(2 theta - 1)/((1-2 theta) log P)
    tail = fit_c * P_max ** (2.0 * theta - 1.0) / ((1.0 - 2.0 * theta) * math.log(P_max))
    return HfOneEstimate(value=value, P_max=P_max, k_max=k_max, drift=drift, tail_estimate=tail)


# ---------------------------------------------------------------------------
# empirical slopes
# ---------------------------------------------------------------------------

def empirical_rs_slope(table: HeckeTable, x: float) -> SlopeEstimate:
    """slope = sum_{m<=x} |A(m)|^2 / x with drift relative to x/2."""
    x = int(x)
    if not 1 <= x <= table.M:
        raise ValueError(f"x={x} outside [1, M={table.M}]")
    slope = table.abs_square_sum(x) / x
    half = max(1, x // 2)
    slope_half = table.abs_square_sum(half) / half
    drift = abs(slope / slope_half - 1.0) if slope_half != 0.0 else float("inf")
    return SlopeEstimate(x=float(x), slope=slope, drift=drift)


def weighted_sin_sum(table: HeckeTable, X: float, theta: float, L: float) -> SinSumResult:
    """sum_{m <= X^theta} |A(m)|^2 m^(-1-1/n) sin^2(pi m^(1/n) / L).

    Returns the exact finite sum together with the companion prediction
    slope * n * pi^2 / (2L), where the slope is measured on the full table.
    """
    if L < 2:
        raise ValueError("L must be >= 2")
    n = table.form.n
    cutoff = int(float(X) ** theta)
    if cutoff > table.M:
        raise ValueError(f"X^theta = {cutoff} exceeds table M={table.M}")
    slope = empirical_rs_slope(table, table.M).slope
    prediction = slope * n * math.pi**2 / (2.0 * L)
    if cutoff < 1:
        return SinSumResult(value=0.0, prediction=prediction, cutoff=0, slope=slope)
    m = np.arange(1, cutoff + 1, dtype=np.float64)
    v = table.values[1 : cutoff + 1]
    weights = np.abs(v) ** 2 * m ** (-1.0 - 1.0 / n)
    value = float(np.sum(weights * np.sin(np.pi * m ** (1.0 / n) / L) ** 2))
    return SinSumResult(value=value, prediction=prediction, cutoff=cutoff, slope=slope)


# ---------------------------------------------------------------------------
# multi-index second moment (n = 3)
# ---------------------------------------------------------------------------

def _pp_pair_table(form: FormSpec, p: int, a_max: int, b_max: int) -> np.ndarray:
    """A(p^a, p^b) for 0 <= a <= a_max, 0 <= b <= b_max (rank-3 forms)."""
    params = satake_for_prime(form, p)
    h = _h_sequence(list(params.alphas), a_max + b_max + 2)
    out = np.empty((a_max + 1, b_max + 1), dtype=np.float64)
    for a in range(a_max + 1):
        for b in range(b_max + 1):
            # S with subscript (b, a): det of the 2x2 minor in the h's
            val = h[a + b] * h[b] - h[a + b + 1] * (h[b - 1] if b >= 1 else 0.0)
            out[a, b] = float(val.real)
    return out


def _factorize_small(m: int) -> list[tuple[int, int]]:
    out = []
    d = 2
    while d * d <= m:
        if m % d == 0:
            e = 0
            while m % d == 0:
                m //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if m > 1:
        out.append((m, 1))
    return out


def rs_multi_index_sum(form: FormSpec, x: int, table: HeckeTable | None = None) -> MultiIndexResult:
    """sum over m1^2 m2 <= x of |A(m1, m2)|^2 for rank-3 forms.

    Coefficients factor across coprime parts: for m2 = u * v with u supported
    on the primes of m1 and (m1 u, v) = 1,
    A(m1, m2) = [prod_p A(p^a, p^b)] * A(1, v), and A(1, v) = conj(A(v, 1)).
    Raises UnsupportedRank for n > 3 (the enumeration cost grows with n and
    adds no test signal).
    """
    if form.n != 3:
        raise UnsupportedRank("multi-index sum implemented for n = 3 only")
    x = int(x)
    if x < 1:
        raise ValueError("x must be >= 1")
    if table is None:
        table = build_coefficient_table(form, x)
    if table.M < x:
        raise ValueError(f"table M={table.M} smaller than x={x}")
    if table.form.identity_hash() != form.identity_hash():
        raise ValueError("table was built for a different form")
    values = table.values
    total = 0.0
    m1_max = math.isqrt(x)
    pp_cache: dict[int, np.ndarray] = {}
    for m1 in range(1, m1_max + 1):
        n2 = x // (m1 * m1)
        if m1 == 1:
            v = values[1 : n2 + 1]
            total += float(np.dot(v, v))
            continue
        core = np.arange(1, n2 + 1, dtype=np.int64)
        coef = np.ones(n2, dtype=np.float64)
        for p, a in _factorize_small(m1):
            b = np.zeros(n2, dtype=np.int64)
            while True:
                mask = core % p == 0
                if not mask.any():
                    break
                core[mask] //= p
                b[mask] += 1
            b_max = int(b.max())
            key = p
            tbl = pp_cache.get(key)
            if tbl is None or tbl.shape[0] <= a or tbl.shape[1] <= b_max:
                a_cap = max(a, int(math.log(m1_max, p)) + 1)
                b_cap = max(b_max, int(math.log(max(2, x), p)) + 1)
                tbl = _pp_pair_table(form, p, a_cap, b_cap)
                pp_cache[key] = tbl
            coef *= tbl[a, b]
        coef *= values[core]
        total += float(np.dot(coef, coef))
    return MultiIndexResult(x=x, value=total, ratio=total / x)
