"""Experiment orchestration: cache management, command dispatch, CSV reports.

Every command writes its CSV rows plus one key=value manifest.  Identical
configuration and caches reproduce identical CSV bytes (floats are emitted
with shortest round-trip decimals); the manifest additionally records wall
time and cache checksums and is not part of the byte-reproducibility
contract.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__ as _VERSION
from .cache import read_table_cache, table_cache_path, write_table_cache
from .config import ExperimentConfig, config_echo
from .errors import (
    ConfigError,
    CorruptCache,
    InadmissibleParams,
    IoError,
    MsslabError,
    NonArithmeticForm,
    NonConvergence,
)
from .rankin import H_f_one, empirical_rs_slope, rs_multi_index_sum, weighted_sin_sum
from .satake import FormSpec, HeckeTable, build_coefficient_table, satake_for_prime, validate_satake
from .shortsum import theorem1_experiment, theorem2_experiment
from .specfn import omega_main_term, omega_quadrature, sine_square_integral

COMMANDS = ("gen-form", "build-table", "rankin", "theorem1", "theorem2",
            "omega-check", "report")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INADMISSIBLE = 3
EXIT_NONCONVERGENCE = 4
EXIT_IO = 5

RANKIN_COLUMNS = ["form_label", "x_or_Pmax", "quantity", "value", "drift", "tail_bound"]
VARIANCE_COLUMNS = ["form_label", "X", "n", "theta", "L_or_Delta", "estimate", "stderr",
                    "samples", "candidate_paper", "candidate_derived", "empirical_c", "nearest"]
OMEGA_COLUMNS = ["n", "nu", "k", "y", "delta", "Y", "Lambda", "re_value", "im_value",
                 "main_term", "residual", "envelope"]


@dataclass
class RunOutcome:
    command: str
    status: int
    files: list
    messages: list


def _fmt(v) -> str:
    """Shortest round-trip decimal for floats; plain str otherwise."""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _append_csv(path: Path, columns: list, rows: list) -> None:
    new = not path.exists()
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if new:
            writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_manifest(outdir: Path, command: str, cfg: ExperimentConfig,
                    entries: list, files: list, status: int, wall: float) -> Path:
    path = outdir / f"{command}.manifest.txt"
    lines = [f"command={command}", f"artifact_version={_VERSION}"]
    lines += [f"{k}={v}" for k, v in config_echo(cfg)]
    lines += [f"{k}={v}" for k, v in entries]
    lines += [f"output.{i}={f}" for i, f in enumerate(sorted(str(f) for f in files))]
    lines += [f"status={status}", f"wall_time_s={wall:.3f}"]
    path.write_text("\n".join(lines) + "\n")
    return path


# ---------------------------------------------------------------------------
# cache
# ---------------------------------------------------------------------------

def load_or_build_cache(form: FormSpec, M: int, cache_dir) -> tuple[HeckeTable, dict]:
    """Serve the coefficient table from cache when possible.

    The file name is the FormSpec identity hash, so a changed seed or source
    is automatically a miss.  A cached table with M' >= M serves its prefix;
    corrupt or undersized files are rebuilt (and rewritten) with a warning.
    """
    cache_dir = Path(cache_dir)
    path = table_cache_path(cache_dir, form)
    info = {"cache_file": str(path), "cache_hit": False, "cache_crc": "",
            "cache_warning": ""}
    if path.exists():
        try:
            n, m_cached, self_dual, values, crc = read_table_cache(path)
            if n == form.n and self_dual and m_cached >= M:
                values = values[: M + 1].copy()
                prefix = np.empty(M + 1, dtype=np.float64)
                prefix[0] = 0.0
                np.cumsum(values[1:], out=prefix[1:])
                info.update(cache_hit=True, cache_crc=crc)
                table = HeckeTable(M=M, values=values, prefix=prefix,
                                   self_dual=True, form=form)
                return table, info
            info["cache_warning"] = f"cached M={m_cached} < requested {M}; rebuilding"
        except CorruptCache as exc:
            info["cache_warning"] = f"rebuilding: {exc}"
    table = build_coefficient_table(form, M)
    crc = write_table_cache(path, table)
    info["cache_crc"] = crc
    return table, info


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_gen_form(cfg: ExperimentConfig, outdir: Path, force: bool) -> tuple[list, list, list]:
    form = cfg.form_spec()
    lines = [f"label={form.display_label()}", f"n={form.n}", f"source={form.source}",
             f"seed={form.seed}", f"vartheta={_fmt(form.theta_assumed)}",
             f"arithmetic={form.arithmetic}"]
    if form.arithmetic:
        for p in (2, 3, 5, 7, 11):
            params = satake_for_prime(form, p)
            validate_satake(params)
            alphas = ", ".join(f"{a.real:+.12f}{a.imag:+.12f}j" for a in np.asarray(params.alphas))
            lines.append(f"alpha[{p}]={alphas}")
    if form.source == "lift":
        lines.append(f"ap_file={form.ap_data.path}")
        lines.append(f"ap_count={len(form.ap_data.primes)}")
        lines.append(f"ap_violations={list(form.ap_data.violations)}")
    path = outdir / "form.txt"
    path.write_text("\n".join(lines) + "\n")
    return [path], [("form.label", form.display_label())], []


def _cmd_build_table(cfg: ExperimentConfig, outdir: Path, force: bool):
    form = cfg.form_spec()
    table, info = load_or_build_cache(form, cfg.M, cfg.resolved_cache_dir())
    entries = [(f"cache.{k}", str(v)) for k, v in info.items()]
    entries.append(("table.M", str(table.M)))
    entries.append(("table.values1", _fmt(table.values[1])))
    return [Path(info["cache_file"])], entries, []


def _cmd_rankin(cfg: ExperimentConfig, outdir: Path, force: bool):
    form = cfg.form_spec()
    table, info = load_or_build_cache(form, cfg.M, cfg.resolved_cache_dir())
    label = form.display_label()
    rows = []
    messages = []
    if form.arithmetic:
        hf = H_f_one(form, P_max=cfg.P_max, k_max=cfg.k_max)
        rows.append([label, cfg.P_max, "H_f_one", hf.value, hf.drift, hf.tail_estimate])
    else:
        messages.append("H_f_one skipped: non-arithmetic form")
    x_slope = min(int(cfg.X), table.M)
    slope = empirical_rs_slope(table, x_slope)
    rows.append([label, x_slope, "rs_slope", slope.slope, slope.drift, 0.0])
    sin_res = weighted_sin_sum(table, cfg.X, cfg.theta, cfg.L)
    rows.append([label, cfg.X, f"sin_sum_L{cfg.L:g}", sin_res.value, 0.0, 0.0])
    rows.append([label, cfg.X, f"sin_sum_prediction_L{cfg.L:g}", sin_res.prediction, 0.0, 0.0])
    if form.n == 3:
        x_multi = min(int(cfg.X), table.M, 1_000_000)
        multi = rs_multi_index_sum(form, x_multi, table=table)
        rows.append([label, x_multi, "multi_index_ratio", multi.ratio, 0.0, 0.0])
    csv_path = outdir / "rankin.csv"
    _append_csv(csv_path, RANKIN_COLUMNS, rows)
    entries = [(f"cache.{k}", str(v)) for k, v in info.items()]
    return [csv_path], entries, messages


def _variance_row(label: str, cfg: ExperimentConfig, n: int, window: float, result) -> list:
    est, rep = result.estimate, result.constants
    return [label, cfg.X, n, cfg.theta, window, est.value, est.stderr, est.samples,
            rep.candidate_paper, rep.candidate_derived, rep.empirical_c, rep.nearest]


def _cmd_theorem1(cfg: ExperimentConfig, outdir: Path, force: bool):
    form = cfg.form_spec()
    table, info = load_or_build_cache(form, cfg.M, cfg.resolved_cache_dir())
    res = theorem1_experiment(table, cfg.X, cfg.L, cfg.theta, samples=cfg.samples,
                              seed=cfg.seed, epsilon=cfg.epsilon, force=force)
    csv_path = outdir / "variance.csv"
    _append_csv(csv_path, VARIANCE_COLUMNS, [_variance_row(form.display_label(), cfg, form.n, cfg.L, res)])
    entries = [(f"cache.{k}", str(v)) for k, v in info.items()]
    entries.append(("admissible", res.admissibility.summary()))
    messages = [] if res.admissibility.ok else [f"admissibility: {res.admissibility.summary()}"]
    return [csv_path], entries, messages


def _cmd_theorem2(cfg: ExperimentConfig, outdir: Path, force: bool):
    form = cfg.form_spec()
    table, info = load_or_build_cache(form, cfg.M, cfg.resolved_cache_dir())
    delta = cfg.resolved_delta()
    res = theorem2_experiment(table, cfg.X, delta, cfg.theta, samples=cfg.samples,
                              seed=cfg.seed, epsilon=cfg.epsilon,
                              series_cutoff=min(cfg.series_cutoff, table.M), force=force)
    csv_path = outdir / "variance.csv"
    _append_csv(csv_path, VARIANCE_COLUMNS, [_variance_row(form.display_label(), cfg, form.n, delta, res)])
    entries = [(f"cache.{k}", str(v)) for k, v in info.items()]
    entries.append(("admissible", res.admissibility.summary()))
    entries.append(("bf_value", _fmt(res.bf.value)))
    messages = [] if res.admissibility.ok else [f"admissibility: {res.admissibility.summary()}"]
    return [csv_path], entries, messages


def _cmd_omega_check(cfg: ExperimentConfig, outdir: Path, force: bool):
    n = cfg.n
    rows = []
    for nu in range(0, 4):
        for k in range(1, 4):
            for y in (10.0, 100.0, 1000.0, 10000.0):
                Y = 10.0 * (2.0 / n) * y ** (1.0 / n)
                delta, lam = 0.01, 10.0
                res = omega_quadrature(nu, k, y, delta, Y, lam, n)
                main = omega_main_term(nu, k, y, n).value
                residual = abs(res.value.real - main)
                # the two explicit error scales of the main-term comparison
                envelope = (y ** (0.5 - 0.5 / n - 1.0 / n)
                            + Y ** (n / 2.0 - nu - k + n * delta))
                rows.append([n, nu, k, y, delta, Y, lam, res.value.real,
                             res.value.imag, main, residual, envelope])
    extra = sine_square_integral(10_000.0)
    csv_path = outdir / "omega.csv"
    _append_csv(csv_path, OMEGA_COLUMNS, rows)
    entries = [("sine_square_integral_B1e4", _fmt(extra))]
    return [csv_path], entries, []


def _cmd_report(cfg: ExperimentConfig, outdir: Path, force: bool):
    messages = []
    found = False
    for name in ("rankin.csv", "variance.csv", "omega.csv"):
        path = outdir / name
        if path.exists():
            found = True
            with open(path) as fh:
                rows = list(csv.reader(fh))
            messages.append(f"{name}: {max(0, len(rows) - 1)} rows")
            for row in rows[1:]:
                messages.append("  " + ", ".join(row[:6]))
    if not found:
        messages.append("no prior runs found (empty summary)")
    return [], [("report.files_found", str(found))], messages


_DISPATCH = {
    "gen-form": _cmd_gen_form,
    "build-table": _cmd_build_table,
    "rankin": _cmd_rankin,
    "theorem1": _cmd_theorem1,
    "theorem2": _cmd_theorem2,
    "omega-check": _cmd_omega_check,
    "report": _cmd_report,
}


def run(command: str, cfg: ExperimentConfig, force: bool = False,
        threads: int | None = None) -> RunOutcome:
    """Dispatch one command; returns the outcome with the CLI exit status.

    All computation is vectorised and deterministic (per-stratum and per-prime
    seeds), so results do not depend on ``threads``; the value is recorded in
    the manifest.  Exit: 0 ok, 2 config, 3 inadmissible (unless force),
    4 non-convergence, 5 I/O.
    """
    if command not in _DISPATCH:
        raise ConfigError("command", f"unknown command {command!r}")
    outdir = Path(cfg.outdir)
    start = time.perf_counter()
    status = EXIT_OK
    files: list = []
    entries: list = []
    messages: list = []
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        files, entries, messages = _DISPATCH[command](cfg, outdir, force)
    except InadmissibleParams as exc:
        status = EXIT_INADMISSIBLE
        messages = [str(exc)]
    except (NonConvergence,) as exc:
        status = EXIT_NONCONVERGENCE
        messages = [str(exc)]
    except ConfigError:
        raise
    except (NonArithmeticForm, MsslabError) as exc:
        status = EXIT_CONFIG
        messages = [f"{type(exc).__name__}: {exc}"]
    except OSError as exc:
        status = EXIT_IO
        messages = [str(exc)]
    wall = time.perf_counter() - start
    entries = list(entries) + [("threads", str(threads if threads else "auto"))]
    try:
        manifest = _write_manifest(outdir, command, cfg, entries, files, status, wall)
    except OSError as exc:
        raise IoError(f"cannot write manifest: {exc}") from exc
    files = list(files) + [manifest]
    return RunOutcome(command=command, status=status, files=files, messages=messages)
