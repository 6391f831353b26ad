"""The ten-point acceptance battery, shared by tests/test_acceptance.py and scripts/.

Each criterion function returns a CriterionResult with a pass/fail verdict,
a human-readable detail string, and its wall time.  The battery uses one
frozen synthetic rank-3 form (seed 1001, vartheta = 0) and two table sizes:
M_MAIN for the X = 1e6 experiments and M_BIG for the fixed-window trend
check up to X = 4e6.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .errors import NearDegenerateAlphas
from .harness import load_or_build_cache, run
from .rankin import (
    H_f_one,
    empirical_rs_slope,
    local_Pn_value,
    rs_multi_index_sum,
    weighted_sin_sum,
)
from .satake import (
    FormSpec,
    SatakeParams,
    complete_homogeneous,
    keyed_uniform,
    multi_index_prime_power,
    primes_up_to,
    sample_tempered_satake,
    schur_determinant,
)
from .shortsum import (
    derived_cf_prefactor,
    error_diff_mean_square,
    paper_cf_prefactor,
    theorem1_experiment,
    theorem2_experiment,
)
from .specfn import omega_main_term, omega_quadrature, sine_square_integral

FORM_SEED = 1001
M_MAIN = 2_100_000
M_BIG = 8_200_000
X_MAIN = 1_000_000.0
THETA = 0.3


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"criterion {self.index:2d} [{self.name}]: {verdict} ({self.detail}) [{self.seconds:.1f}s]"


class AcceptanceLab:
    """Shared state: the frozen form, cached tables, and memoised estimates."""

    def __init__(self, workdir):
        self.workdir = Path(workdir)
        self.cache_dir = self.workdir / "cache"
        self.form = FormSpec(n=3, source="synthetic", seed=FORM_SEED,
                             theta_assumed=0.0, label="accept-n3")
        self._tables: dict = {}
        self.table_build_seconds: dict = {}

    def table(self, M: int):
        if M not in self._tables:
            t0 = time.perf_counter()
            table, _ = load_or_build_cache(self.form, M, self.cache_dir)
            self.table_build_seconds[M] = time.perf_counter() - t0
            self._tables[M] = table
        return self._tables[M]

    @property
    def main_table(self):
        return self.table(M_MAIN)

    @property
    def big_table(self):
        return self.table(M_BIG)


def _timed(index: int, name: str, fn) -> CriterionResult:
    t0 = time.perf_counter()
    passed, detail = fn()
    return CriterionResult(index=index, name=name, passed=passed, detail=detail,
                           seconds=time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def criterion_1_schur_oracle(lab: AcceptanceLab) -> CriterionResult:
    """200 random unitary product-1 parameter sets, n in {3,4,5}, k <= 8:
    recurrence vs Vandermonde determinant agree below 1e-9, within 5 s."""

    def body():
        primes = primes_up_to(2_000)
        worst = 0.0
        count = 0
        i = 0
        while count < 200:
            n = (3, 4, 5)[count % 3]
            p = int(primes[i % len(primes)])
            params = sample_tempered_satake(n, p, seed=9000 + i)
            i += 1
            try:
                for k in range(0, 9):
                    mine = complete_homogeneous(params.alphas, k)
                    oracle = schur_determinant(params.alphas, (0,) * (n - 2) + (k,))
                    worst = max(worst, abs(mine - oracle))
            except NearDegenerateAlphas:
                continue  # oracle contract says to skip these; recurrence path is fine
            count += 1
        return worst < 1e-9, f"worst |recurrence - determinant| = {worst:.2e} over 200 sets"

    res = _timed(1, "schur-oracle-equivalence", body)
    if res.seconds >= 5.0:
        res.passed = False
        res.detail += f"; runtime {res.seconds:.1f}s >= 5s"
    return res


def criterion_2_multiplicativity_duality(lab: AcceptanceLab) -> CriterionResult:
    """10^4 coprime pairs with ab <= 2e6 multiplicative below 1e-9, plus the
    conjugate-reversal relation on 10^3 prime-power tuples; under 60 s with sieve."""

    def body():
        table = lab.main_table  # timed build counts toward this criterion
        rng = np.random.default_rng(20260810)
        worst_mult = 0.0
        have = 0
        while have < 10_000:
            a = rng.integers(2, 1415, size=40_000)
            b = rng.integers(2, 1415, size=40_000)
            ok = (np.gcd(a, b) == 1) & (a * b <= 2_000_000)
            a, b = a[ok], b[ok]
            take = min(len(a), 10_000 - have)
            a, b = a[:take], b[:take]
            diff = np.abs(table.values[a * b] - table.values[a] * table.values[b])
            worst_mult = max(worst_mult, float(np.max(diff)) if len(diff) else 0.0)
            have += take
        worst_dual = 0.0
        primes = primes_up_to(300)
        for i in range(1_000):
            p = int(primes[i % len(primes)])
            params = sample_tempered_satake(3, p, seed=FORM_SEED)
            raw = SatakeParams(p=params.p, alphas=params.alphas, self_dual=False,
                               tempered=params.tempered)
            b1 = int(keyed_uniform(777, i, 1) * 6)
            b2 = int(keyed_uniform(777, i, 2) * 6)
            v = multi_index_prime_power(raw, (b1, b2))
            w = multi_index_prime_power(raw, (b2, b1))
            worst_dual = max(worst_dual, abs(v - np.conj(w)))
        passed = worst_mult < 1e-9 and worst_dual < 1e-9
        return passed, (f"worst multiplicativity gap = {worst_mult:.2e}, "
                        f"worst duality gap = {worst_dual:.2e}")

    res = _timed(2, "multiplicativity-and-duality", body)
    if res.seconds >= 60.0:
        res.passed = False
        res.detail += f"; runtime {res.seconds:.1f}s >= 60s"
    return res


def criterion_3_truncation_stability(lab: AcceptanceLab) -> CriterionResult:
    """local series value stable under k_max doubling (64 -> 128) below 1e-10
    over 100 random parameter sets with |T| <= 1/2, within 5 s."""

    def body():
        primes = primes_up_to(1_000)
        worst = 0.0
        for i in range(100):
            n = (3, 4, 5)[i % 3]
            p = int(primes[i % len(primes)])
            params = sample_tempered_satake(n, p, seed=4242 + i)
            T = (float(keyed_uniform(31337, i, 0)) - 0.5)  # in [-1/2, 1/2)
            if abs(T) < 1e-3:
                T = 0.25
            v1 = local_Pn_value(params, T, k_max=64).value
            v2 = local_Pn_value(params, T, k_max=128).value
            worst = max(worst, abs(v1 - v2))
        return worst < 1e-10, f"worst |k_max=64 vs 128| = {worst:.2e} over 100 sets"

    res = _timed(3, "local-factor-truncation-stability", body)
    if res.seconds >= 5.0:
        res.passed = False
        res.detail += f"; runtime {res.seconds:.1f}s >= 5s"
    return res


def criterion_4_slope_three_way(lab: AcceptanceLab) -> CriterionResult:
    """Slope drift at x = 1e6 below 0.10 and the three-way consistency
    slope / (multi-index ratio * Euler product) within 25% of 1, within 3 min."""

    def body():
        table = lab.main_table
        slope = empirical_rs_slope(table, 1_000_000)
        hf = H_f_one(lab.form, P_max=10_000, k_max=64)
        multi = rs_multi_index_sum(lab.form, 1_000_000, table=table)
        three_way = slope.slope / (multi.ratio * hf.value)
        passed = slope.drift < 0.10 and abs(three_way - 1.0) <= 0.25
        return passed, (f"drift = {slope.drift:.4f}, slope = {slope.slope:.4f}, "
                        f"H = {hf.value:.4f}, multi ratio = {multi.ratio:.4f}, "
                        f"three-way = {three_way:.4f}")

    res = _timed(4, "slope-and-three-way-consistency", body)
    if res.seconds >= 180.0:
        res.passed = False
        res.detail += f"; runtime {res.seconds:.1f}s >= 180s"
    return res


def criterion_5_weighted_sin_sum(lab: AcceptanceLab) -> CriterionResult:
    """Weighted sine sum vs slope * n * pi^2/(2L) within [0.5, 2.0] at
    L in {10, 20, 40}, X = 1e6, theta = 0.3, deviation shrinking in L."""

    def body():
        table = lab.main_table
        ratios = []
        for L in (10.0, 20.0, 40.0):
            res = weighted_sin_sum(table, X_MAIN, THETA, L)
            ratios.append(res.ratio)
        in_band = all(0.5 <= r <= 2.0 for r in ratios)
        deviations = [abs(r - 1.0) for r in ratios]
        shrinking = deviations[0] > deviations[1] > deviations[2]
        detail = ", ".join(f"L={L:g}: ratio={r:.4f}" for L, r in zip((10, 20, 40), ratios))
        return in_band and shrinking, detail

    res = _timed(5, "weighted-sin-sum-prediction", body)
    if res.seconds >= 60.0:
        res.passed = False
        res.detail += f"; runtime {res.seconds:.1f}s >= 60s"
    return res


def criterion_6_fixed_window(lab: AcceptanceLab) -> CriterionResult:
    """Fixed-window mean square at X = 1e6, Delta = X^0.75: ratio to
    B_f X^(2/3) in [0.6, 1.6], stderr/value < 0.1, and the X = 4e6 ratio
    closer to 1 than the X = 2.5e5 ratio; within 10 min including the sieve."""

    def body():
        table = lab.big_table
        ratios = {}
        stderr_frac = None
        for X in (250_000.0, 1_000_000.0, 4_000_000.0):
            res = theorem2_experiment(table, X, X**0.75, THETA, samples=10_000,
                                      seed=0, series_cutoff=1_000_000)
            ratios[X] = res.ratio
            if X == X_MAIN:
                stderr_frac = res.estimate.stderr / res.estimate.value
        main_ok = 0.6 <= ratios[X_MAIN] <= 1.6 and stderr_frac < 0.1
        trend_ok = abs(ratios[4_000_000.0] - 1.0) < abs(ratios[250_000.0] - 1.0)
        detail = (f"ratios: X=2.5e5: {ratios[250_000.0]:.4f}, X=1e6: {ratios[X_MAIN]:.4f}, "
                  f"X=4e6: {ratios[4_000_000.0]:.4f}; stderr/value = {stderr_frac:.4f}")
        return main_ok and trend_ok, detail

    res = _timed(6, "fixed-window-variance", body)
    if res.seconds >= 600.0:
        res.passed = False
        res.detail += f"; runtime {res.seconds:.1f}s >= 600s"
    return res


def criterion_7_scaled_window(lab: AcceptanceLab) -> CriterionResult:
    """Scaled-window variance at X = 1e6, theta = 0.3, L in {5,10,20,40}:
    log-log slope -1 +- 0.25, candidate prefactors 0.117480 / 1.304881,
    empirical_c stderr under 10%, nearest verdict stable over 10 seeds."""

    def body():
        table = lab.main_table
        Ls = (5.0, 10.0, 20.0, 40.0)
        values = []
        stderr_ok = True
        for L in Ls:
            res = theorem1_experiment(table, X_MAIN, L, THETA, samples=10_000,
                                      seed=0, force=True)
            values.append(res.estimate.value)
            stderr_ok &= res.estimate.stderr / res.estimate.value < 0.1
        lx = np.log(np.asarray(Ls))
        lv = np.log(np.asarray(values))
        slope = float(np.polyfit(lx, lv, 1)[0])
        slope_ok = -1.25 <= slope <= -0.75
        cp = paper_cf_prefactor(3)
        cd = derived_cf_prefactor(3)
        const_ok = abs(cp - 0.117480) < 1e-6 and abs(cd - 1.304881) < 1e-6
        verdicts = set()
        for seed in range(10):
            res = theorem1_experiment(table, X_MAIN, 10.0, THETA, samples=10_000,
                                      seed=seed, force=True)
            verdicts.add(res.constants.nearest)
        stable = len(verdicts) == 1
        detail = (f"log-log slope = {slope:.3f}, prefactors = ({cp:.6f}, {cd:.6f}), "
                  f"verdicts = {sorted(verdicts)}, stderr ok = {stderr_ok}")
        return slope_ok and const_ok and stable and stderr_ok, detail

    res = _timed(7, "scaled-window-shape-and-constants", body)
    if res.seconds >= 900.0:
        res.passed = False
        res.detail += f"; runtime {res.seconds:.1f}s >= 900s"
    return res


def criterion_8_omega_suite(lab: AcceptanceLab) -> CriterionResult:
    """Contour-integral suite: conjugate symmetry below 1e-8, envelope constant
    stable (max/min < 5) over y in {10..1e4}, cosine-zero alignment within 2%
    in y^(1/n), sine-square integral at pi^2/2 +- 1e-4; within 2 min."""

    def body():
        n = 3
        worst_im = 0.0
        # conjugate symmetry across the (nu, k) grid
        for nu in range(0, 4):
            for k in range(1, 4):
                res = omega_quadrature(nu, k, 500.0, 0.01, 120.0, 10.0, n, tol=1e-9)
                worst_im = max(worst_im, abs(res.value.imag))
        # envelope stability for (nu, k) = (0, 1): per-decade RMS of the
        # residual over the combined error scale y^(1/2-1/(2n)-1/n) + Y^(n/2-1+n delta)
        delta = 0.01
        consts = []
        for decade in (10.0, 100.0, 1_000.0, 10_000.0):
            ratios = []
            for j in range(8):
                y = decade * 10.0 ** (j / 8.0)
                Y = 10.0 * (2.0 / n) * y ** (1.0 / n)
                res = omega_quadrature(0, 1, y, delta, Y, 10.0, n, tol=1e-9)
                worst_im = max(worst_im, abs(res.value.imag))
                main = omega_main_term(0, 1, y, n).value
                envelope = (y ** (0.5 - 0.5 / n - 1.0 / n)
                            + Y ** (n / 2.0 - 1.0 + n * delta))
                ratios.append((abs(res.value.real - main) / envelope) ** 2)
            consts.append(math.sqrt(sum(ratios) / len(ratios)))
        env_ratio = max(consts) / max(min(consts), 1e-30)
        env_ok = env_ratio < 5.0
        # cosine zeros: 2 y^(1/3) = pi/2 + j pi, at y large enough that the
        # Bessel main term dominates the contour-truncation noise
        Yfix = 400.0
        worst_align = 0.0
        for j in (29, 35, 60):
            u_pred = (math.pi / 2.0 + j * math.pi) / 2.0

            def g(u: float) -> float:
                return omega_quadrature(0, 1, u**3, 0.01, Yfix, 10.0, n, tol=1e-9).value.real

            lo, hi = u_pred - 0.5, u_pred + 0.5
            glo, ghi = g(lo), g(hi)
            if glo * ghi > 0:
                worst_align = float("inf")
                continue
            for _ in range(30):
                mid = 0.5 * (lo + hi)
                gm = g(mid)
                if glo * gm <= 0:
                    hi, ghi = mid, gm
                else:
                    lo, glo = mid, gm
            u_found = 0.5 * (lo + hi)
            worst_align = max(worst_align, abs(u_found - u_pred) / u_pred)
        align_ok = worst_align < 0.02
        sine = sine_square_integral(10_000.0)
        sine_ok = abs(sine - math.pi**2 / 2.0) < 1e-4
        passed = worst_im < 1e-8 and env_ok and align_ok and sine_ok
        detail = (f"max |Im| = {worst_im:.2e}, envelope max/min = {env_ratio:.2f}, "
                  f"zero misalignment = {worst_align:.4f}, "
                  f"sine integral = {sine:.6f} (target {math.pi**2 / 2:.6f})")
        return passed, detail

    res = _timed(8, "omega-suite", body)
    if res.seconds >= 120.0:
        res.passed = False
        res.detail += f"; runtime {res.seconds:.1f}s >= 120s"
    return res


def criterion_9_error_smallness(lab: AcceptanceLab) -> CriterionResult:
    """Sampled mean square of E(x+w)-E(x) below 0.25x the matching main-term
    mean square at X = 1e6, theta = 0.3 (L = 5, the admissible window)."""

    def body():
        table = lab.main_table
        diff, main = error_diff_mean_square(table, X_MAIN, 5.0, THETA,
                                            samples=10_000, seed=0)
        ratio = diff.value / main.value
        return ratio < 0.25, (f"E-diff ms = {diff.value:.2f}, main ms = {main.value:.2f}, "
                              f"ratio = {ratio:.4f}")

    return _timed(9, "error-term-average-smallness", body)


# ---------------------------------------------------------------------------
# the harness battery and reproducibility
# ---------------------------------------------------------------------------

def harness_battery(lab: AcceptanceLab, outdir: Path) -> list:
    """Run the CSV-producing experiment battery behind criteria 4-9."""
    base = ExperimentConfig(
        n=3, source="synthetic", form_seed=FORM_SEED, vartheta=0.0, label="accept-n3",
        X=X_MAIN, L=10.0, theta=THETA, samples=10_000, seed=0,
        M=M_MAIN, P_max=10_000, k_max=64, series_cutoff=1_000_000,
        outdir=str(outdir), cache_dir=str(lab.cache_dir),
    )
    runs = [
        ("build-table", {}),
        ("rankin", {}),
        ("theorem1", {"L": 5.0}),
        ("theorem1", {"L": 10.0}),
        ("theorem1", {"L": 20.0}),
        ("theorem1", {"L": 40.0}),
        ("theorem2", {"X": 250_000.0, "M": M_BIG, "delta": 250_000.0**0.75}),
        ("theorem2", {"X": 1_000_000.0, "M": M_BIG, "delta": 1_000_000.0**0.75}),
        ("theorem2", {"X": 4_000_000.0, "M": M_BIG, "delta": 4_000_000.0**0.75}),
        ("omega-check", {}),
    ]
    outcomes = []
    for command, overrides in runs:
        cfg = replace(base, **overrides) if overrides else base
        outcome = run(command, cfg, force=True)
        if outcome.status != 0:
            raise RuntimeError(f"{command} failed with status {outcome.status}: {outcome.messages}")
        outcomes.append(outcome)
    return outcomes


def criterion_10_reproducibility(lab: AcceptanceLab) -> CriterionResult:
    """Re-executing the battery from the same config and caches reproduces
    byte-identical CSVs."""

    def body():
        out_a = lab.workdir / "battery_a"
        out_b = lab.workdir / "battery_b"
        harness_battery(lab, out_a)
        harness_battery(lab, out_b)
        names = ["rankin.csv", "variance.csv", "omega.csv"]
        mismatched = []
        for name in names:
            a = (out_a / name).read_bytes()
            b = (out_b / name).read_bytes()
            if a != b:
                mismatched.append(name)
        return not mismatched, (
            "all CSVs byte-identical across re-execution" if not mismatched
            else f"mismatched: {mismatched}"
        )

    return _timed(10, "byte-reproducibility", body)


CRITERIA = [
    criterion_1_schur_oracle,
    criterion_2_multiplicativity_duality,
    criterion_3_truncation_stability,
    criterion_4_slope_three_way,
    criterion_5_weighted_sin_sum,
    criterion_6_fixed_window,
    criterion_7_scaled_window,
    criterion_8_omega_suite,
    criterion_9_error_smallness,
    criterion_10_reproducibility,
]


def run_all(workdir) -> list:
    lab = AcceptanceLab(workdir)
    results = []
    for fn in CRITERIA:
        res = fn(lab)
        print(res.line(), flush=True)
        results.append(res)
    return results
