# type: ignore
# pylint: disable=no-value-for-parameter
import functools
import logging
from typing import Callable, Optional

import click

from dataio import ExperimentRun, load_config, output_dir, run_experiment, write_manifest
from experiments import SCENARIOS, try_scenario, write_report
from utils import consts
from utils.errors import RecoveryLabError, stage

logger = logging.getLogger(__name__)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log debug messages.")
def cli(verbose: bool):
    """
    Simulate sentiment-driven stock recoveries and analyse their time scales.

    Every subcommand reads an experiment config and writes its artifacts plus a
    manifest to the output directory.
    """
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(asctime)s %(name)s:%(lineno)d: %(message)s",
    )


def experiment_options(func):
    @click.option(
        "-c",
        "--config",
        "config_path",
        type=click.Path(dir_okay=False),
        required=True,
        help="Path to the experiment YAML config.",
    )
    @click.option("-o", "--out", type=click.Path(file_okay=False), help="Output directory, overrides 'output'.")
    @click.option("-s", "--seed", type=int, help="Base seed, overrides 'seed'.")
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        return func(*args, **kwargs)

    return wrapper


def execute(name: str, config_path: str, out: Optional[str], seed: Optional[int], action: Callable) -> None:
    try:
        with stage("config"):
            config = load_config(config_path, seed=seed, output=out)
        out_dir = output_dir(config)
        with stage(name):
            artifacts = action(ExperimentRun(config), out_dir)
        write_manifest(config, out_dir, artifacts)
    except RecoveryLabError as e:
        click.echo(f"Error: {e}", err=True)
        raise click.exceptions.Exit(1) from e
    for artifact in artifacts:
        click.echo(f"Wrote '{artifact}'")


@cli.command()
@experiment_options
def simulate(config_path, out, seed):
    """Simulate price paths, with and without sentiment, and name their recovery shape."""
    execute("simulate", config_path, out, seed, lambda run, d: run.write_simulation(d))


@cli.command()
@experiment_options
def synth(config_path, out, seed):
    """Write the normalized fund flow that drives the simulation."""
    execute("synth", config_path, out, seed, lambda run, d: run.write_flows(d))


@cli.command()
@experiment_options
def decompose(config_path, out, seed):
    """Sift the analysed series into IMFs and a residue."""
    execute("decompose", config_path, out, seed, lambda run, d: run.write_decomposition(d))


@cli.command()
@experiment_options
def timescale(config_path, out, seed):
    """Write the per-IMF time scale, correlation and significance table."""
    execute("timescale", config_path, out, seed, lambda run, d: run.write_timescale(d) + run.write_dominant(d))


@cli.command()
@experiment_options
def sst(config_path, out, seed):
    """Run the white-noise significance test on the IMFs."""
    execute("sst", config_path, out, seed, lambda run, d: run.write_sst(d))


@cli.command()
@experiment_options
def correlate(config_path, out, seed):
    """Correlate observed prices with the simulated paths."""
    execute("correlate", config_path, out, seed, lambda run, d: run.write_correlation(d))


@cli.command(name="run")
@experiment_options
@click.option(
    "--data-dir",
    envvar=consts.DATA_DIR_ENV_VAR,
    type=click.Path(file_okay=False),
    help="Directory that relative data paths are resolved against.",
)
def run_all(config_path, out, seed, data_dir):
    """Run every stage the config enables."""
    try:
        with stage("config"):
            config = load_config(config_path, seed=seed, output=out)
        bundle = run_experiment(config, data_dir=data_dir)
    except RecoveryLabError as e:
        click.echo(f"Error: {e}", err=True)
        raise click.exceptions.Exit(1) from e
    click.echo(f"Wrote {len(bundle.artifacts)} artifacts to '{bundle.output_dir}'")


@cli.command()
@click.option(
    "--scenario",
    "scenarios",
    type=click.Choice(list(SCENARIOS)),
    multiple=True,
    help="Scenario to run, repeatable. Defaults to all of them.",
)
@click.option("-o", "--out", type=click.Path(file_okay=False), default="out/report", show_default=True)
@click.option("-s", "--seed", type=int, help="First sweep seed.")
@click.option("--seed-count", type=click.IntRange(min=1), help="Number of sweep seeds.")
@click.option(
    "--data-dir",
    envvar=consts.DATA_DIR_ENV_VAR,
    type=click.Path(file_okay=False),
    help="Directory holding the price and flow CSV files.",
)
def report(scenarios, out, seed, seed_count, data_dir):
    """Run the scenarios and write a consolidated pass/fail table."""
    seeds = None
    if seed is not None or seed_count is not None:
        first = seed or 0
        seeds = list(range(first, first + (seed_count or consts.SWEEP_SEED_COUNT)))

    try:
        with click.progressbar(list(scenarios or SCENARIOS), label="Running scenarios") as bar:
            reports = [try_scenario(i, seeds=seeds, data_dir=data_dir, out=out) for i in bar]
        path = write_report(reports, out)
    except RecoveryLabError as e:
        click.echo(f"Error: {e}", err=True)
        raise click.exceptions.Exit(1) from e

    for r in reports:
        click.echo(f"{r.scenario}: {r.status}")
    click.echo(f"Wrote '{path}'")
    if any(r.status == "fail" for r in reports):
        raise click.exceptions.Exit(1)


if __name__ == "__main__":
    cli()
