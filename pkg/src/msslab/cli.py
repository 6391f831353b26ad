"""Command line interface: msslab <command> --config <path> [overrides]."""

from __future__ import annotations

import sys

import click

from .config import load_config
from .errors import ConfigError, IoError, MsslabError
from .harness import EXIT_CONFIG, EXIT_IO, run

_OVERRIDES = [
    click.option("--X", "X", type=float, default=None, help="Integration scale X."),
    click.option("--L", "L", type=float, default=None, help="Window divisor L."),
    click.option("--delta", type=float, default=None, help="Fixed window length Delta."),
    click.option("--theta", type=float, default=None, help="Main-term truncation exponent."),
    click.option("--samples", type=int, default=None, help="Stratified sample count."),
    click.option("--seed", type=int, default=None, help="Sampling seed."),
    click.option("--form", "source", type=click.Choice(["synthetic", "lift", "degenerate"]),
                 default=None, help="Coefficient source."),
    click.option("--vartheta", type=float, default=None, help="Assumed Ramanujan exponent."),
    click.option("--n", "n", type=int, default=None, help="Rank n >= 3."),
    click.option("--form-seed", type=int, default=None, help="Form RNG seed."),
    click.option("--M", "M", type=int, default=None, help="Coefficient table length."),
    click.option("--P-max", "P_max", type=int, default=None, help="Euler product prime cutoff."),
    click.option("--k-max", "k_max", type=int, default=None, help="Local series truncation."),
    click.option("--series-cutoff", type=int, default=None, help="B_f series cutoff."),
    click.option("--epsilon", type=float, default=None, help="Declared epsilon for admissibility."),
    click.option("--label", type=str, default=None, help="Form label for reports."),
    click.option("--ap-file", type=str, default=None, help="GL(2) eigenvalue file for lifts."),
    click.option("--out", "outdir", type=str, default=None, help="Output directory."),
    click.option("--cache-dir", type=str, default=None, help="Coefficient cache directory."),
]


def _with_overrides(fn):
    for opt in reversed(_OVERRIDES):
        fn = opt(fn)
    return fn


def _execute(command: str, config_path, force: bool, threads, overrides: dict) -> None:
    try:
        cfg = load_config(config_path, overrides)
        outcome = run(command, cfg, force=force, threads=threads)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except IoError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)
    except MsslabError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    for message in outcome.messages:
        click.echo(message)
    if outcome.status != 0 and force:
        click.echo(f"note: continuing despite status {outcome.status} (--force)")
        sys.exit(0)
    sys.exit(outcome.status)


@click.group()
def main():
    """Numerical laboratory for short-interval statistics of Hecke eigenvalues."""


def _make_command(name: str, help_text: str):
    @main.command(name=name, help=help_text)
    @click.option("--config", "config_path", type=click.Path(), default=None,
                  help="INI config with [form]/[experiment]/[output].")
    @click.option("--threads", type=int, default=None,
                  help="Worker pool size (recorded; results are thread-count independent).")
    @click.option("--force", is_flag=True, help="Proceed despite inadmissible parameters.")
    @_with_overrides
    def _cmd(config_path, threads, force, **overrides):
        _execute(name, config_path, force, threads, overrides)

    return _cmd


_make_command("gen-form", "Materialise and validate the configured form.")
_make_command("build-table", "Build (or reuse) the cached coefficient table.")
_make_command("rankin", "Euler product, slope, and weighted-sum experiments -> rankin.csv.")
_make_command("theorem1", "Scaled-window variance experiment -> variance.csv.")
_make_command("theorem2", "Fixed-window variance experiment -> variance.csv.")
_make_command("omega-check", "Contour-integral suite -> omega.csv.")
_make_command("report", "Summarise CSVs and manifests in the output directory.")


if __name__ == "__main__":
    main()
