"""Command-line interface.

Subcommands mirror the experiment modes (``spectrum``, ``closed``, ``open``)
plus ``figure`` for the frozen presets.  Flags override values from an
optional ``--config`` file.  Exit codes: 0 success, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .closed_dynamics import IntegrationError
from .experiments import (
    FIGURE_IDS,
    ConfigError,
    output_directory,
    parse_config,
    preset,
    run_experiment,
    run_figure,
    write_csv,
)

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _load_config(mode: str, config_path: str | None, **flags):
    text = Path(config_path).read_text(encoding="utf-8") if config_path else ""
    return parse_config(text, mode=mode, **flags)


def _warn_on_spin(n_qubits: int):
    if n_qubits % 2 == 1:
        click.echo(
            f"warning: N = {n_qubits} gives half-integer collective spin; parity "
            "eigenvalues are imaginary and sector labels do not apply",
            err=True,
        )
    elif n_qubits % 4 == 0:
        click.echo(
            f"warning: N = {n_qubits} gives even integer collective spin; the "
            "start and end ground states share a sector, so no crossing is forced",
            err=True,
        )


def _execute(config, default_output: str):
    _warn_on_spin(config.n_qubits)
    table = run_experiment(config)
    out = Path(config.output) if config.output else output_directory() / default_output
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(table, out)
    click.echo(f"wrote {out}")


def _run_guarded(action):
    try:
        action()
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except (ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except IntegrationError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)


def _common_options(fn):
    decorators = [
        click.option("--config", "config_path", type=click.Path(exists=True),
                     default=None, help="Flat key=value config file."),
        click.option("--n-qubits", type=int, default=None),
        click.option("--problem", type=click.Choice(["ising", "xxz"]), default=None),
        click.option("--delta", type=float, default=None,
                     help="XXZ anisotropy (default 1.5)."),
        click.option("--alpha", type=float, default=None,
                     help="Strength of the quadratic transverse term."),
        click.option("--t-anneal", type=float, default=None),
        click.option("--rtol", type=float, default=None),
        click.option("--atol", type=float, default=None),
        click.option("--output", type=click.Path(), default=None,
                     help="Output CSV path."),
    ]
    for dec in reversed(decorators):
        fn = dec(fn)
    return fn


@click.group()
def main():
    """Collective-spin annealing simulator: spectra, dynamics, figure presets."""


@main.command()
@_common_options
@click.option("--n-points", type=int, default=None, help="Grid points over s in [0, 1].")
def spectrum(config_path, n_points, **flags):
    """Eigenvalues and parity-sector labels along the ramp."""
    def action():
        config = _load_config("spectrum", config_path, n_points=n_points, **flags)
        _execute(config, "spectrum.csv")
    _run_guarded(action)


@main.command()
@_common_options
@click.option("--n-samples", type=int, default=None, help="Uniform sample count.")
def closed(config_path, n_samples, **flags):
    """Schrodinger evolution: energy, parity, and ground-state fidelity."""
    def action():
        config = _load_config("closed", config_path, n_samples=n_samples, **flags)
        _execute(config, "closed.csv")
    _run_guarded(action)


@main.command(name="open")
@_common_options
@click.option("--n-samples", type=int, default=None, help="Uniform sample count.")
@click.option("--noise", type=click.Choice(["redfield", "gksl"]), default=None,
              help="Dissipation model (required).")
@click.option("--eta", type=float, default=None, help="Bath coupling strength.")
@click.option("--t-env", type=float, default=None, help="Bath temperature (k_B = 1).")
@click.option("--omega-c", type=float, default=None, help="Spectral cutoff.")
@click.option("--epsilon", type=float, default=None, help="Spectral regulariser.")
@click.option("--gamma-mode", type=click.Choice(["kms", "literal"]), default=None,
              help="Bath spectrum branch family (default kms).")
def open_cmd(config_path, n_samples, noise, gamma_mode, **flags):
    """Master-equation evolution: energy, ground population, sanity columns."""
    def action():
        config = _load_config("open", config_path, n_samples=n_samples,
                              noise=noise, gamma_mode=gamma_mode, **flags)
        if config.noise == "redfield" and gamma_mode is None and config.gamma_mode == "kms":
            click.echo(
                "note: gamma-mode defaults to 'kms' (detailed-balance spectrum); "
                "pass --gamma-mode literal for the verbatim three-branch form",
                err=True,
            )
        _execute(config, "open.csv")
    _run_guarded(action)


@main.command()
@click.argument("figure_id", required=False)
@click.option("--list", "list_ids", is_flag=True, help="List available figure ids.")
@click.option("--out-dir", type=click.Path(), default=None,
              help="Directory for the emitted CSV files.")
def figure(figure_id, list_ids, out_dir):
    """Run a frozen figure preset (one CSV per member config)."""
    if list_ids:
        for fid in FIGURE_IDS:
            members = preset(fid)
            click.echo(f"{fid}: {len(members)} run(s)")
        return
    if figure_id is None:
        click.echo("config error: provide a figure id or --list", err=True)
        sys.exit(EXIT_CONFIG)

    def action():
        for member in preset(figure_id):
            _warn_on_spin(member.n_qubits)
        paths = run_figure(figure_id, out_dir)
        for path in paths:
            click.echo(f"wrote {path}")
    _run_guarded(action)


if __name__ == "__main__":
    main()
