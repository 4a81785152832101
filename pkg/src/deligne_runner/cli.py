import functools
import logging
import sys
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import click
import dask
from dask import delayed
from dask.distributed import Client, LocalCluster

from artin_deligne.core import BudgetExceededError, ConvergenceError
from artin_deligne.metric_synth import HYPERBOLIC, MOUSSONG
from artin_deligne.params_loader import load_config

from . import tasks

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s', stream=sys.stderr)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_REFUTED = 2

FUZZ_BATCH = 50
DEFAULT_COMPLEX = "heptagon-star"


def tool_version() -> str:
    try:
        return version("artin-deligne")
    except PackageNotFoundError:
        return "0+unknown"


def common_options(f):
    """Options shared by every command."""
    options = [
        click.option("--input", "input_path", type=click.Path(path_type=Path), help="Defining graph document (YAML)"),
        click.option("--mode", type=click.Choice([HYPERBOLIC, MOUSSONG]), default=HYPERBOLIC, show_default=True),
        click.option("--radius", type=int, default=None, help="Link ball radius (default: m for pair vertices, 2 for generators)"),
        click.option("--trials", type=int, default=None, help="Sampled checks and stability trials"),
        click.option("--seed", type=int, default=None, help="Seed for every randomized check"),
        click.option("--out", "out", type=str, default="-", show_default=True, help="Report path, '-' for standard output"),
        click.option("--dot", "dot_dir", type=click.Path(path_type=Path), default=None, help="Directory for DOT files"),
        click.option("--complex", "complex_spec", type=str, default=None,
                     help=f"Test complex name ({', '.join(sorted(tasks.BUILDERS))}) or complex document path"),
        click.option("--config", "config_path", type=click.Path(path_type=Path), default=None, help="Run configuration (YAML)"),
        click.option("--parallel/--no-parallel", default=False, help="Run independent sections with Dask"),
        click.option("--verbose", is_flag=True, help="Debug logging"),
    ]
    for option in reversed(options):
        f = option(f)
    return f


class Run:
    """Effective settings of one invocation."""

    def __init__(self, command, input_path, mode, radius, trials, seed, out, dot_dir, complex_spec,
                 config_path, parallel, verbose):
        if verbose:
            logging.getLogger().setLevel(logging.DEBUG)
        config = load_config(config_path)
        overrides = {"link_radius": radius, "trials": trials, "seed": seed}
        self.config = config._replace(**{k: v for k, v in overrides.items() if v is not None})
        self.command = command
        self.input_path = input_path
        self.mode = mode
        self.out = out
        self.dot_dir = dot_dir
        self.complex_spec = complex_spec
        self.parallel = parallel

    def graph(self):
        if self.input_path is None:
            raise click.UsageError("--input is required for this command")
        return tasks.load_graph(self.input_path)

    def settings(self):
        return {"command": self.command, "mode": self.mode, "complex": self.complex_spec,
                "config": self.config.to_record()}

    def emit(self, g, sections) -> int:
        record = {
            "tool": {"name": "artin-deligne", "version": tool_version()},
            "input": tasks.serialize(g) if g is not None else None,
            "settings": self.settings(),
            "parameter_hash": tasks.parameter_hash(g, self.settings()),
            **sections,
        }
        text = tasks.dump_json(record, self.config.float_digits)
        if self.out == "-":
            click.echo(text, nl=False)
        else:
            tasks.write_atomic(Path(self.out), text)
            logger.info(f"Report written to {self.out}")
        refuted = [name for name, section in sections.items() if not section.get("verified", True)]
        if refuted:
            logger.warning(f"Refuted or failed sections: {', '.join(refuted)}")
            return EXIT_REFUTED
        return EXIT_OK


def command(name):
    """Wraps a section builder into a click command with uniform exit codes."""
    def decorate(build):
        @main.command(name=name)
        @common_options
        @functools.wraps(build)
        def runner(**kwargs):
            try:
                run = Run(name, **kwargs)
                g, sections = build(run)
                code = run.emit(g, sections)
            except click.UsageError:
                raise
            except (ValueError, OSError) as e:
                logger.error(f"{type(e).__name__}: {e}")
                code = EXIT_INPUT
            except (BudgetExceededError, ConvergenceError) as e:
                logger.error(f"{type(e).__name__}: {e}")
                code = EXIT_REFUTED
            sys.exit(code)
        return runner
    return decorate


class ExitCodeGroup(click.Group):
    """Click group whose usage errors exit with EXIT_INPUT so that 2 always means refuted."""

    def main(self, *args, **kwargs):
        kwargs.pop("standalone_mode", None)
        try:
            return super().main(*args, standalone_mode=False, **kwargs)
        except click.UsageError as e:
            e.show()
            sys.exit(EXIT_INPUT)
        except click.ClickException as e:
            e.show()
            sys.exit(e.exit_code)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_INPUT)


@click.group(cls=ExitCodeGroup)
def main():
    """Metric, link, tree and geodesic computations for two-dimensional Artin groups of hyperbolic type."""


def _client(parallel: bool):
    if not parallel:
        return None
    cluster = LocalCluster()
    client = Client(cluster)
    click.echo(f"Dask dashboard available at: {client.dashboard_link}", err=True)
    return client


def _geodesics_section(run: Run):
    Y = tasks.load_complex(run.complex_spec or DEFAULT_COMPLEX)
    cover = tasks.geodesics_setup(Y, run.config)
    acute, _ = Y.is_acute()
    fuzz = control = None
    if acute:
        trials, seed, cap = run.config.trials, run.config.seed, run.config.chain_cap
        controls = max(1, trials // 10)
        if run.parallel:
            batches = [delayed(tasks.fuzz_task)(cover, min(FUZZ_BATCH, trials - start), seed, 1.0, start, False, cap)
                       for start in range(0, trials, FUZZ_BATCH)]
            control_task = delayed(tasks.fuzz_task)(cover, controls, seed, tasks.NEGATIVE_CONTROL_SCALE, 0, False, cap)
            *parts, control = dask.compute(*batches, control_task)
            fuzz = functools.reduce(lambda a, b: a.merge(b), parts)
        else:
            fuzz = tasks.fuzz_task(cover, trials, seed, 1.0, 0, True, cap)
            control = tasks.fuzz_task(cover, controls, seed, tasks.NEGATIVE_CONTROL_SCALE, 0, True, cap)
    else:
        logger.warning(f"{Y.name} is not acute; stability trials are skipped")
    return tasks.geodesics_summary(cover, run.config, fuzz, control)


@command("validate")
def validate(run: Run):
    """Classify the defining graph."""
    g = run.graph()
    return g, {"validate": tasks.validate_task(g)}


@command("metric")
def metric(run: Run):
    """Synthesize epsilon, l and the fundamental triangles."""
    g = run.graph()
    record, _ = tasks.metric_task(g, run.mode, run.config)
    return g, {"metric": record}


@command("links")
def links_command(run: Run):
    """Certify the girth of every vertex link."""
    g = run.graph()
    _, p = tasks.metric_task(g, run.mode, run.config)
    return g, {"links": tasks.links_task(g, p, run.config, run.dot_dir)}


@command("cone")
def cone(run: Run):
    """Certify the links of the coned-off complex."""
    g = run.graph()
    _, p = tasks.metric_task(g, run.mode, run.config)
    return g, {"cone": tasks.cone_task(g, p, run.config, run.dot_dir)}


@command("trees")
def trees(run: Run):
    """Cut graph and standard-tree stabilizers."""
    g = run.graph()
    return g, {"trees": tasks.trees_task(g, run.dot_dir)}


@command("geodesics")
def geodesics(run: Run):
    """Cover constants, cover properties, stability trials and acylindricity constants on a test complex."""
    g = tasks.load_graph(run.input_path) if run.input_path is not None else None
    client = _client(run.parallel)
    try:
        return g, {"geodesics": _geodesics_section(run)}
    finally:
        if client is not None:
            client.close()


@command("report")
def report(run: Run):
    """Every section in one report; the geodesic section only with --complex."""
    g = run.graph()
    client = _client(run.parallel)
    try:
        if run.parallel:
            validate_d = delayed(tasks.validate_task)(g)
            metric_d = delayed(tasks.metric_task)(g, run.mode, run.config)
            trees_d = delayed(tasks.trees_task)(g, run.dot_dir)
            validate_r, (metric_r, p), trees_r = dask.compute(validate_d, metric_d, trees_d)
        else:
            validate_r = tasks.validate_task(g)
            metric_r, p = tasks.metric_task(g, run.mode, run.config)
            trees_r = tasks.trees_task(g, run.dot_dir)
        sections = {"validate": validate_r, "metric": metric_r, "links": tasks.links_task(g, p, run.config, run.dot_dir)}
        if p.mode == HYPERBOLIC:
            sections["cone"] = tasks.cone_task(g, p, run.config, run.dot_dir)
        sections["trees"] = trees_r
        if run.complex_spec is not None:
            sections["geodesics"] = _geodesics_section(run)
        return g, sections
    finally:
        if client is not None:
            client.close()


if __name__ == "__main__":
    main()
