import logging
from logging import getLogger
from pathlib import Path
from typing import Optional, Tuple

import click

from gauss_stab import __version__
from gauss_stab.config.gauss_stab_config import (
    GaussStabConfigError,
    get_gauss_stab_config,
)
from gauss_stab.framework.cli.cli_utils import write_jinja_template
from gauss_stab.framework.hooks.certificate_tracking_hook import CertificateTrackingHook
from gauss_stab.io.csv_tables import NonFiniteCell, write_scenario_tables, write_summary
from gauss_stab.io.plotdata import emit_plotdata
from gauss_stab.numerics.bumps import DEFAULT_SEED
from gauss_stab.pipeline.scenario_pipeline import run_scenarios
from gauss_stab.selftest import run_selftest

LOGGER = getLogger(__name__)
TEMPLATE_FOLDER_PATH = Path(__file__).parent.parent.parent / "template" / "project"
TEMPLATE_NAME = "gauss_stab.yml"

EXIT_PASSED = 0
EXIT_FAILED = 1
EXIT_CONFIG_ERROR = 2


@click.group(name="gauss-stab")
@click.version_option(__version__, prog_name="gauss-stab")
def cli():
    """Stability certificates for Bayesian estimation under Gaussian noise."""
    logging.basicConfig(format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")


@cli.command()
@click.option(
    "--config",
    "-c",
    "config_path",
    required=True,
    type=click.Path(dir_okay=False),
    help="The scenario file (yaml, 'format_version: 1').",
)
@click.option(
    "--out",
    "-o",
    "out_dir",
    required=True,
    type=click.Path(file_okay=False),
    help="The folder where tables and plot data are written.",
)
@click.option(
    "--jobs",
    "-j",
    type=click.IntRange(min=1),
    default=None,
    help="Number of scenarios evaluated concurrently. Defaults to 'run.jobs' of the scenario file.",
)
@click.option(
    "--scenario",
    "-s",
    "scenarios",
    multiple=True,
    help="Only run this scenario (and its sweep). Can be repeated.",
)
@click.option(
    "--plotdata/--no-plotdata",
    default=True,
    help="Should the plot data files be written next to the tables?",
)
@click.pass_context
def run(
    ctx: click.Context,
    config_path: str,
    out_dir: str,
    jobs: Optional[int],
    scenarios: Tuple[str, ...],
    plotdata: bool,
):
    """Run the certificates of every scenario and write the result tables.

    The exit code is 0 when every stability certificate passed, 1 when one
    failed or a scenario stage raised, and 2 when the scenario file is invalid.
    """
    try:
        config = get_gauss_stab_config(config_path)
        instances = config.instances(list(scenarios) or None)
    except GaussStabConfigError as error:
        click.secho(str(error), fg="red", err=True)
        ctx.exit(EXIT_CONFIG_ERROR)

    hooks = [CertificateTrackingHook(config.tracking)] if config.tracking.enabled else []
    results = run_scenarios(
        instances,
        jobs=jobs or config.run.jobs,
        seed=config.run.effective_seed,
        hooks=hooks,
    )

    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for result in results:
            write_scenario_tables(result, out_dir)
            if plotdata:
                emit_plotdata(result, out_dir)
        write_summary(results, out_dir)
    except (OSError, NonFiniteCell) as error:
        click.secho(f"Cannot write the results to '{out_dir}': {error}", fg="red", err=True)
        ctx.exit(EXIT_FAILED)

    for result in results:
        if result.passed:
            click.secho(f"PASS  {result.name}", fg="green")
        else:
            reasons = [f"{f.stage}: {f.error}" for f in result.failures] or ["certificate failed"]
            click.secho(f"FAIL  {result.name} ({'; '.join(reasons)})", fg="red")
    ctx.exit(EXIT_PASSED if all(result.passed for result in results) else EXIT_FAILED)


@cli.command()
@click.option(
    "--seed",
    type=int,
    default=DEFAULT_SEED,
    help="Seed of the random test functions. GAUSS_STAB_SEED takes precedence.",
)
@click.pass_context
def selftest(ctx: click.Context, seed: int):
    """Check the numerical invariants the certificates rely on."""
    outcomes = run_selftest(seed)
    for outcome in outcomes:
        click.secho(
            f"{'PASS' if outcome.passed else 'FAIL'}  {outcome.name}: {outcome.detail}",
            fg="green" if outcome.passed else "red",
        )
    ctx.exit(EXIT_PASSED if all(outcome.passed for outcome in outcomes) else EXIT_FAILED)


@cli.command()
@click.option(
    "--out",
    "-o",
    "out_path",
    default=TEMPLATE_NAME,
    type=click.Path(dir_okay=False),
    help="Where the scenario file is created. Default to './gauss_stab.yml'.",
)
@click.option(
    "--force",
    "-f",
    is_flag=True,
    default=False,
    help="Update the template without any checks.",
)
@click.option(
    "--silent",
    "-s",
    is_flag=True,
    default=False,
    help="Should message be logged when files are modified?",
)
def init(out_path: str, force: bool, silent: bool):
    """Create a scenario file with the benchmark priors."""
    out_path = Path(out_path)
    if out_path.is_file() and not force:
        click.secho(
            click.style(
                f"A scenario file already exists at '{out_path}' You can use the ``--force`` option to override it.",
                fg="red",
            )
        )
    else:
        try:
            write_jinja_template(
                src=TEMPLATE_FOLDER_PATH / TEMPLATE_NAME,
                dst=out_path,
                version=__version__,
                seed=DEFAULT_SEED,
            )
            if not silent:
                click.secho(click.style(f"'{out_path}' successfully updated.", fg="green"))
        except FileNotFoundError:
            click.secho(
                click.style(
                    f"No folder '{out_path.parent}' found. Please create it first.",
                    fg="red",
                )
            )
