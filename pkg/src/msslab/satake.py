"""Satake parameters, Schur polynomials, and multiplicative Hecke coefficient tables.

The central objects are:

- ``SatakeParams``: the multiset {alpha_1, ..., alpha_n} of local parameters at a
  prime p, normalised so that prod(alpha_j) = 1 (trivial central character).
- ``FormSpec``: a coefficient source.  Synthetic tempered sources draw conjugate
  pairs of unit-circle parameters from the density (2/pi) sin^2(phi) dphi;
  symmetric-power lifts take a real GL(2) eigenvalue a_p = 2 cos(phi) and use
  {beta^(n-1), beta^(n-3), ..., beta^(1-n)} with beta = e^(i phi); the degenerate
  source is the constant-one sequence (non-arithmetic, test-only).
- ``HeckeTable``: the dense array A(m) := A(m,1,...,1) for 1 <= m <= M, extended
  multiplicatively from prime powers, plus float64 prefix sums.

Prime-power values come from the complete homogeneous symmetric polynomials
h_k(alphas) = A(p^k,1,...,1); general multi-index values are Schur polynomials,
evaluated through a Jacobi-Trudi determinant in the h_k (the explicit
Vandermonde determinant ratio is kept as an independent oracle).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    MissingPrime,
    NearDegenerateAlphas,
    ParseError,
    SelfDualViolation,
)

__all__ = [
    "SatakeParams",
    "FormSpec",
    "ApData",
    "HeckeTable",
    "primes_up_to",
    "is_prime",
    "sample_tempered_satake",
    "satake_from_gl2_lift",
    "satake_for_prime",
    "complete_homogeneous",
    "schur_determinant",
    "prime_power_eigenvalue",
    "multi_index_prime_power",
    "build_coefficient_table",
    "ingest_ap_file",
]

_UNITARITY_TOL = 1e-12
_SELF_DUAL_IM_TOL = 1e-10
_VANDERMONDE_TOL = 1e-8


# ---------------------------------------------------------------------------
# deterministic per-(seed, prime, slot) uniforms
# ---------------------------------------------------------------------------

_M64 = (1 << 64) - 1


def _splitmix64_py(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def _splitmix64_np(x: np.ndarray) -> np.ndarray:
    x = (x + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(_M64)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def keyed_uniform(seed: int, p, slot: int = 0) -> np.ndarray:
    """Uniform in [0,1) derived from hash(seed, p, slot).

    ``p`` may be a scalar or an integer array; the value for each entry depends
    only on (seed, p, slot), never on evaluation order, so sieves and samplers
    are reproducible under any partitioning of the work.
    """
    ps = np.asarray(p, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = _splitmix64_np(np.uint64(seed & _M64))
        h = _splitmix64_np(h ^ ps)
        h = _splitmix64_np(h ^ np.uint64(slot & _M64))
    return (h >> np.uint64(11)).astype(np.float64) * (2.0**-53)


def sato_tate_angles(u: np.ndarray) -> np.ndarray:
    """Invert the CDF of (2/pi) sin^2(phi) dphi on [0, pi].

    Solves x - sin(x) = 2*pi*u for x = 2*phi by bisection (deterministic,
    derivative-free; the density vanishes at both endpoints so Newton alone
    is unsafe there).
    """
    u = np.asarray(u, dtype=np.float64)
    target = 2.0 * np.pi * u
    lo = np.zeros_like(target)
    hi = np.full_like(target, 2.0 * np.pi)
    for _ in range(54):
        mid = 0.5 * (lo + hi)
        below = (mid - np.sin(mid)) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.25 * (lo + hi)


# ---------------------------------------------------------------------------
# primes
# ---------------------------------------------------------------------------

def primes_up_to(n: int) -> np.ndarray:
    """Eratosthenes sieve; returns int64 array of primes <= n."""
    if n < 2:
        return np.array([], dtype=np.int64)
    isp = np.ones(n + 1, dtype=bool)
    isp[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if isp[i]:
            isp[i * i :: i] = False
    return np.nonzero(isp)[0].astype(np.int64)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SatakeParams:
    """Local parameters {alpha_1, ..., alpha_n} at prime p."""

    p: int
    alphas: tuple
    self_dual: bool = True
    tempered: bool = True

    @property
    def n(self) -> int:
        return len(self.alphas)


def validate_satake(params: SatakeParams, tol: float = _UNITARITY_TOL) -> None:
    """Check the structural invariants; raises ValueError on violation."""
    n = params.n
    if n < 3:
        raise ValueError(f"rank n={n} < 3")
    prod = complex(np.prod(np.asarray(params.alphas, dtype=complex)))
    if abs(prod - 1.0) > tol:
        raise ValueError(f"product of alphas is {prod}, not 1")
    if params.self_dual:
        a = np.sort_complex(np.asarray(params.alphas, dtype=complex))
        b = np.sort_complex(np.conj(np.asarray(params.alphas, dtype=complex)))
        if np.max(np.abs(a - b)) > tol:
            raise ValueError("multiset not closed under conjugation")
    if params.tempered:
        mods = np.abs(np.asarray(params.alphas, dtype=complex))
        if np.max(np.abs(mods - 1.0)) > tol:
            raise ValueError("tempered parameters must lie on the unit circle")


@dataclass(frozen=True)
class ApData:
    """In-memory prime -> a_p map read from a text file."""

    path: str
    primes: np.ndarray
    values: np.ndarray
    violations: tuple = ()
    digest: str = ""

    def lookup(self, ps) -> np.ndarray:
        """Vectorised a_p lookup; raises MissingPrime on any absent prime."""
        ps = np.atleast_1d(np.asarray(ps, dtype=np.int64))
        idx = np.searchsorted(self.primes, ps)
        bad = (idx >= len(self.primes)) | (self.primes[np.minimum(idx, len(self.primes) - 1)] != ps)
        if bad.any():
            raise MissingPrime(int(ps[bad][0]))
        return self.values[idx]


@dataclass(frozen=True)
class FormSpec:
    """A coefficient source: synthetic tempered, GL(2) lift, or degenerate."""

    n: int
    source: str  # "synthetic" | "lift" | "degenerate"
    seed: int = 0
    theta_assumed: float = 0.0
    label: str = ""
    ap_data: ApData | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"rank n={self.n} < 3")
        if not 0.0 <= self.theta_assumed <= 0.5:
            raise ValueError("theta_assumed must lie in [0, 1/2]")
        if self.source not in ("synthetic", "lift", "degenerate"):
            raise ValueError(f"unknown source {self.source!r}")
        if self.source == "lift" and self.ap_data is None:
            raise ValueError("lift source requires ap_data")

    @property
    def arithmetic(self) -> bool:
        """Degenerate constant-one forms are non-arithmetic (test-only)."""
        return self.source != "degenerate"

    def display_label(self) -> str:
        base = self.label or f"{self.source}-n{self.n}-s{self.seed}"
        return base if self.arithmetic else base + "[non-arithmetic]"

    def identity_hash(self) -> str:
        """Stable 16-hex-digit identity used as the coefficient cache key."""
        parts = [str(self.n), self.source, str(self.seed), repr(self.theta_assumed)]
        if self.ap_data is not None:
            parts.append(self.ap_data.digest)
        h = hashlib.sha256("|".join(parts).encode()).hexdigest()
        return h[:16]


@dataclass
class HeckeTable:
    """Dense A(m) = A(m,1,...,1) for 1 <= m <= M with float64 prefix sums.

    ``values[0]`` is an unused zero slot; ``prefix[m]`` = sum_{k<=m} values[k].
    Memory: ~8*M bytes for values plus ~8*M for the prefix array (real
    self-dual storage; complex doubles that).  A completed table is treated
    as immutable.
    """

    M: int
    values: np.ndarray
    prefix: np.ndarray
    self_dual: bool
    form: FormSpec

    def coefficient(self, m: int):
        if not 1 <= m <= self.M:
            raise IndexError(f"m={m} outside [1, {self.M}]")
        return self.values[m]

    def abs_square_sum(self, x: int) -> float:
        """sum_{m <= x} |A(m)|^2."""
        x = min(int(x), self.M)
        v = self.values[1 : x + 1]
        return float(np.real(np.vdot(v, v)))


# ---------------------------------------------------------------------------
# parameter constructors
# ---------------------------------------------------------------------------

def sample_tempered_satake(n: int, p: int, seed: int) -> SatakeParams:
    """Deterministic unit-circle parameters at prime p for a synthetic form.

    Each conjugate pair is e^(+-2 i theta_j) with theta_j drawn from the
    Sato-Tate measure (2/pi) sin^2(theta) dtheta, keyed by hash(seed, p, j);
    odd n adds the fixed point 1 so the multiset stays conjugation-closed
    with product 1.  The doubled angle gives each pair the symmetric-square
    structure of self-dual forms, which keeps E|A(p)|^2 = 1 for n = 3 and
    hence the mean-square slopes bounded.
    """
    if n < 3:
        raise ValueError(f"rank n={n} < 3")
    if not is_prime(p):
        raise ValueError(f"p={p} is not prime")
    npairs = n // 2
    us = np.array([keyed_uniform(seed, p, j) for j in range(npairs)], dtype=np.float64)
    phis = 2.0 * sato_tate_angles(us)
    alphas = []
    for phi in phis:
        alphas.append(complex(np.cos(phi), np.sin(phi)))
        alphas.append(complex(np.cos(phi), -np.sin(phi)))
    if n % 2 == 1:
        alphas.append(1.0 + 0.0j)
    return SatakeParams(p=p, alphas=tuple(alphas), self_dual=True, tempered=True)


def satake_from_gl2_lift(a_p: float, n: int, p: int = 2) -> SatakeParams:
    """Symmetric-power parameters {beta^(n-1), ..., beta^(1-n)} from a_p.

    For |a_p| <= 2 write a_p = 2 cos(phi), beta = e^(i phi) (tempered).  For
    |a_p| > 2 the pair beta, 1/beta is real and the result is flagged
    non-tempered.
    """
    a_p = float(a_p)
    if abs(a_p) <= 2.0:
        phi = math.acos(a_p / 2.0)
        beta = complex(math.cos(phi), math.sin(phi))
        tempered = True
    else:
        t = a_p / 2.0
        beta = complex(t + math.copysign(math.sqrt(t * t - 1.0), t), 0.0)
        tempered = False
    alphas = tuple(beta ** (n - 1 - 2 * j) for j in range(n))
    return SatakeParams(p=p, alphas=alphas, self_dual=True, tempered=tempered)


def satake_for_prime(form: FormSpec, p: int) -> SatakeParams:
    """Dispatch on the form's source.

    The degenerate form uses {1, 0, ..., 0}: every h_k is then exactly 1, which
    reproduces the constant-one coefficient sequence (not a unitary multiset;
    the form is flagged non-arithmetic everywhere it is reported).
    """
    if form.source == "synthetic":
        return sample_tempered_satake(form.n, p, form.seed)
    if form.source == "lift":
        a_p = float(form.ap_data.lookup(p)[0])
        return satake_from_gl2_lift(a_p, form.n, p=p)
    alphas = (1.0 + 0.0j,) + (0.0 + 0.0j,) * (form.n - 1)
    return SatakeParams(p=p, alphas=alphas, self_dual=True, tempered=False)


# ---------------------------------------------------------------------------
# symmetric polynomials
# ---------------------------------------------------------------------------

def _elementary_symmetric(alphas) -> np.ndarray:
    """[e_0, e_1, ..., e_n] via incremental expansion of prod(1 + a_j T)."""
    e = np.zeros(len(alphas) + 1, dtype=complex)
    e[0] = 1.0
    for k, a in enumerate(alphas, start=1):
        e[1 : k + 1] = e[1 : k + 1] + a * e[0:k]
    return e


def _h_sequence(alphas, kmax: int) -> np.ndarray:
    """[h_0, ..., h_kmax] from the Newton-type recurrence.

    1/prod(1 - a_j T) = sum h_k T^k gives
    h_k = sum_{j=1..n} (-1)^(j-1) e_j h_{k-j}.
    """
    n = len(alphas)
    e = _elementary_symmetric(alphas)
    h = np.zeros(kmax + 1, dtype=complex)
    h[0] = 1.0
    for k in range(1, kmax + 1):
        acc = 0.0 + 0.0j
        for j in range(1, min(n, k) + 1):
            term = e[j] * h[k - j]
            acc += term if j % 2 == 1 else -term
        h[k] = acc
    return h


def complete_homogeneous(alphas, k: int) -> complex:
    """h_k(alphas); h_0 = 1, h_k = 0 for k < 0."""
    if k < 0:
        return 0.0 + 0.0j
    return complex(_h_sequence(list(alphas), k)[k])


def _schur_partition(subscript: Sequence[int], n: int) -> list[int]:
    """Row exponent shifts for subscript (c_1, ..., c_{n-1}).

    The determinant rows carry exponents r + c_1 + ... + c_r for r = 0..n-1
    (bottom to top), i.e. the partition mu read top-down is
    (c_1+...+c_{n-1}, ..., c_1+c_2, c_1, 0).
    """
    if len(subscript) != n - 1:
        raise ValueError(f"subscript needs n-1={n - 1} entries, got {len(subscript)}")
    if any(c < 0 or int(c) != c for c in subscript):
        raise ValueError("subscript entries must be non-negative integers")
    partial = [0]
    for c in subscript:
        partial.append(partial[-1] + int(c))
    return partial[::-1]  # mu_1 >= mu_2 >= ... >= mu_n = 0


def schur_determinant(alphas, betas: Sequence[int]) -> complex:
    """Schur polynomial S_{betas}(alphas) via the Vandermonde determinant ratio.

    ``betas = (c_1, ..., c_{n-1})`` indexes the generalized Vandermonde whose
    rows have exponents r + c_1 + ... + c_r; S_{0,...,0,k} equals h_k.  Kept as
    the independent oracle for the recurrence-based evaluators; raises
    NearDegenerateAlphas when the Vandermonde falls below 1e-8 in modulus
    (callers should perturb or use the recurrence path).
    """
    a = np.asarray(list(alphas), dtype=complex)
    n = len(a)
    mu = _schur_partition(betas, n)
    vand = 1.0 + 0.0j
    for i in range(n):
        for j in range(i + 1, n):
            vand *= a[i] - a[j]
    if abs(vand) < _VANDERMONDE_TOL:
        raise NearDegenerateAlphas(
            f"|Vandermonde| = {abs(vand):.3e} < {_VANDERMONDE_TOL}"
        )
    exponents = [mu[i] + (n - 1 - i) for i in range(n)]
    mat = np.array([[a[j] ** e for j in range(n)] for e in exponents], dtype=complex)
    return complex(np.linalg.det(mat) / vand)


def _schur_jacobi_trudi(alphas, subscript: Sequence[int]) -> complex:
    """Schur polynomial via det[h_{mu_i - i + j}]; stable for repeated alphas."""
    a = list(alphas)
    n = len(a)
    mu = _schur_partition(subscript, n)
    h = _h_sequence(a, mu[0] + n)
    mat = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            idx = mu[i] - (i + 1) + (j + 1)
            if idx >= 0:
                mat[i, j] = h[idx]
    return complex(np.linalg.det(mat))


def _cast_self_dual(value: complex, params: SatakeParams):
    if not params.self_dual:
        return value
    if abs(value.imag) > _SELF_DUAL_IM_TOL * max(1.0, abs(value.real)):
        raise SelfDualViolation(
            f"imaginary residue {value.imag:.3e} at p={params.p}"
        )
    return value.real


def prime_power_eigenvalue(params: SatakeParams, k: int):
    """A(p^k,1,...,1) = h_k(alphas); real for self-dual parameters."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return _cast_self_dual(complete_homogeneous(params.alphas, k), params)


def multi_index_prime_power(params: SatakeParams, betas: Sequence[int]):
    """A(p^{beta_1}, ..., p^{beta_{n-1}}) = S_{beta_{n-1},...,beta_1}(alphas).

    Evaluated through the Jacobi-Trudi determinant in the h_k (never the
    Vandermonde ratio, which degenerates for repeated parameters); the index
    reversal matches the convention A(m_1,...,m_{n-1}) = conj(A(m_{n-1},...,m_1))
    on unitary product-1 inputs.
    """
    subscript = tuple(reversed([int(b) for b in betas]))
    return _cast_self_dual(_schur_jacobi_trudi(params.alphas, subscript), params)


# ---------------------------------------------------------------------------
# a_p files
# ---------------------------------------------------------------------------

def ingest_ap_file(path) -> ApData:
    """Read "<prime> <a_p>" records (one per line, '#' comments allowed).

    Primes must be strictly increasing.  Entries with |a_p| > 2 + 1e-9 are
    legal but recorded in ``violations`` (the lift is then non-tempered).
    """
    primes: list[int] = []
    values: list[float] = []
    violations: list[int] = []
    hasher = hashlib.sha256()
    with open(path, "rb") as fh:
        raw = fh.read()
    hasher.update(raw)
    last = 0
    for line_no, line in enumerate(raw.decode("utf-8").splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        fields = text.split()
        if len(fields) != 2:
            raise ParseError(path, line_no, f"expected 2 fields, got {len(fields)}")
        try:
            p = int(fields[0])
            a = float(fields[1])
        except ValueError as exc:
            raise ParseError(path, line_no, str(exc)) from None
        if not is_prime(p):
            raise ParseError(path, line_no, f"{p} is not prime")
        if p <= last:
            raise ParseError(path, line_no, f"primes not strictly increasing at {p}")
        last = p
        if abs(a) > 2.0 + 1e-9:
            violations.append(p)
        primes.append(p)
        values.append(a)
    return ApData(
        path=str(path),
        primes=np.array(primes, dtype=np.int64),
        values=np.array(values, dtype=np.float64),
        violations=tuple(violations),
        digest=hasher.hexdigest()[:16],
    )


# ---------------------------------------------------------------------------
# table construction
# ---------------------------------------------------------------------------

def _chebyshev_u(x: np.ndarray, degree: int) -> np.ndarray:
    """U_degree(x/2-normalised): U_k(cos phi) = sin((k+1)phi)/sin(phi).

    Computed from the three-term recurrence U_k = x*U_{k-1} - U_{k-2} with
    x = a_p, which is h_1 of the degree-(k+1) symmetric power lift and stays
    valid for |a_p| > 2.
    """
    u_prev = np.zeros_like(x)
    u = np.ones_like(x)
    for _ in range(degree):
        u_prev, u = u, x * u - u_prev
    return u


def _prime_eigenvalues(form: FormSpec, primes: np.ndarray) -> np.ndarray:
    """A(p) for every prime in ``primes`` (vectorised, order-independent)."""
    if form.source == "degenerate":
        return np.ones(len(primes), dtype=np.float64)
    if form.source == "lift":
        a = form.ap_data.lookup(primes)
        return _chebyshev_u(a, form.n - 1)
    acc = np.full(len(primes), 1.0 if form.n % 2 == 1 else 0.0)
    for j in range(form.n // 2):
        phis = 2.0 * sato_tate_angles(keyed_uniform(form.seed, primes, j))
        acc = acc + 2.0 * np.cos(phis)
    return acc


def _prime_power_values(form: FormSpec, p: int, emax: int) -> np.ndarray:
    """[A(p^0), ..., A(p^emax)] as float64 (self-dual sources only)."""
    if form.source == "degenerate":
        return np.ones(emax + 1, dtype=np.float64)
    params = satake_for_prime(form, p)
    h = _h_sequence(list(params.alphas), emax)
    worst = float(np.max(np.abs(h.imag)))
    if worst > _SELF_DUAL_IM_TOL * max(1.0, float(np.max(np.abs(h.real)))):
        raise SelfDualViolation(f"imaginary residue {worst:.3e} at p={p}")
    return h.real.astype(np.float64)


def build_coefficient_table(form: FormSpec, M: int) -> HeckeTable:
    """Dense multiplicative table A(1..M) via a prime-power sieve.

    Every m is multiplied by A(p^e) exactly once per prime divisor p, at its
    exact valuation e, so A(ab) == A(a)*A(b) holds for coprime a, b up to
    floating multiplication reassociation (exact when a or b is a prime
    power touched last).  Deterministic for a fixed FormSpec: per-prime
    randomness is keyed by hash(seed, p) and never by sieve order.
    """
    M = int(M)
    if M < 1:
        raise ValueError("M must be >= 1")
    values = np.ones(M + 1, dtype=np.float64)
    values[0] = 0.0
    if form.source != "degenerate" and M >= 2:
        primes = primes_up_to(M)
        c1 = _prime_eigenvalues(form, primes)
        split = math.isqrt(M)
        n_small = int(np.searchsorted(primes, split, side="right"))

        # p > sqrt(M): valuation is always exactly 1, no masking needed.
        # Group by multiplier r so each pass is one vectorised scatter.
        r = 1
        while True:
            hi = M // r
            if hi <= split:
                break
            lo_idx = max(n_small, 0)
            hi_idx = int(np.searchsorted(primes, hi, side="right"))
            if hi_idx > lo_idx:
                sel = primes[lo_idx:hi_idx]
                idx = r * sel
                values[idx] *= c1[lo_idx:hi_idx]
            r += 1

        # p <= sqrt(M): apply A(p^e) at exact valuation e.
        for i in range(n_small):
            p = int(primes[i])
            emax = 1
            while p ** (emax + 1) <= M:
                emax += 1
            hvals = _prime_power_values(form, p, emax)
            q = p
            for e in range(1, emax + 1):
                idx = np.arange(q, M + 1, q, dtype=np.int64)
                if q * p <= M:
                    keep = (idx // q) % p != 0
                    idx = idx[keep]
                values[idx] *= hvals[e]
                q *= p

    prefix = np.empty(M + 1, dtype=np.float64)
    prefix[0] = 0.0
    np.cumsum(values[1:], out=prefix[1:])
    return HeckeTable(M=M, values=values, prefix=prefix, self_dual=True, form=form)
