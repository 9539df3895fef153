"""Command-line interface for rydberg-ssh."""

import logging
from pathlib import Path
import sys
import traceback

import typer

from rydberg_ssh.config import load_config
from rydberg_ssh.runner import OUTPUT_ENV_VAR, run

app = typer.Typer(add_completion=False)

EXIT_CONFIG_ERROR = 1
EXIT_NUMERIC_ERROR = 2


@app.callback()
def main() -> None:
    """Simulate SSH chains of microwave-coupled Rydberg levels."""


@app.command("run")
def run_command(
    config: Path = typer.Argument(
        ...,
        help="TOML run file describing the lattice and the experiment",
    ),
    out: Path | None = typer.Option(
        None,
        "--out",
        help=f"Output directory (overrides the run file; default ${OUTPUT_ENV_VAR} or ./output)",
    ),
    seed: int | None = typer.Option(
        None,
        help="Seed for detector noise in sfi_pipeline runs",
    ),
    verbose: bool = typer.Option(
        False,
        "--verbose",
        "-v",
        help="Enable verbose logging",
    ),
) -> None:
    """Run one experiment and write its CSV tables and JSON summary.

    Experiments: evolve, sweep_edge_detuning, sweep_protection, splitting_vs_size,
    dressed_scan, sfi_pipeline.
    """
    # Configure logging
    if verbose:
        logging.basicConfig(level=logging.DEBUG)
    else:
        logging.basicConfig(level=logging.INFO)

    try:
        summary = run(load_config(config), out_dir=out, seed=seed)
        typer.echo(f"Outputs written to: {summary.output_dir}", err=True)

    except ArithmeticError as e:
        typer.echo(f"Error: Numerical failure: {e}", err=True)
        if verbose:
            traceback.print_exc(file=sys.stderr)
        raise typer.Exit(code=EXIT_NUMERIC_ERROR) from None
    except (ValueError, LookupError, OSError) as e:
        typer.echo(f"Error: {e}", err=True)
        if verbose:
            traceback.print_exc(file=sys.stderr)
        raise typer.Exit(code=EXIT_CONFIG_ERROR) from None


if __name__ == "__main__":
    app()
