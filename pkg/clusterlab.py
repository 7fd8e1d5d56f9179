import json
import logging
import random
import sys
from typing import Optional

import click

import clusterlab_config as cc
import paperlab as pl
from annulus import AnnulusError, ArcLift, MarkedAnnulus, Triangulation, variable_of_arc
from engine import EngineError, Seed, exchange_graph
from laurent import LaurentError
from quiver import LimitExceeded, Quiver, QuiverError, classify_tilde_A

LIBRARY_ERRORS = (LaurentError, QuiverError, EngineError, AnnulusError, LimitExceeded)


def setup_logging(config: cc.ClusterLabConfig, default_file: Optional[str] = None) -> None:
    log_file = config.log_file or default_file
    if log_file:
        logging.basicConfig(
            level=config.level,
            format="%(asctime)s %(message)s",
            datefmt="%b %d %H:%M:%S",
            filename=log_file,
            filemode="w",
            force=True,
        )
    else:
        logging.basicConfig(
            level=config.level,
            format="%(asctime)s %(message)s",
            datefmt="%b %d %H:%M:%S",
            force=True,
        )
    logging.info("----------------------------------------------")
    logging.info("Cluster Lab Python Library: %s", pl.get_lab_version())
    logging.info("----------------------------------------------")


def load_config() -> cc.ClusterLabConfig:
    try:
        return cc.ClusterLabConfig()
    except cc.ConfigError as exception:
        logging.basicConfig(
            level=logging.INFO,
            format="%(asctime)s %(message)s",
            datefmt="%b %d %H:%M:%S",
            force=True,
        )
        logging.info("error in configuration file: %s", exception.file)
        logging.info(str(exception))
        sys.exit(1)


def emit(data) -> None:
    click.echo(json.dumps(data, indent=2))


def read_json(file):
    try:
        return json.load(file)
    except json.JSONDecodeError as exception:
        raise click.BadParameter(f"{file.name} is not valid JSON: {exception}")


def fail(exception: Exception) -> None:
    logging.info("%s: %s", type(exception).__name__, exception)
    click.echo(f"error: {exception}", err=True)
    sys.exit(1)


@click.group()
@click.option("--seed-rng", type=int, default=None, help="seed of every random choice")
@click.pass_context
def cli(ctx, seed_rng):
    """exact cluster algebra computations and checks for type tilde A"""
    config = load_config()
    setup_logging(config)
    ctx.obj = {
        "config": config,
        "seed": config.rng_seed if seed_rng is None else seed_rng,
    }


@cli.command("mutate-quiver")
@click.option("--quiver", "quiver_file", type=click.File("r"), required=True)
@click.option("--at", "k", type=int, required=True, help="point to mutate at, from 0")
def mutate_quiver(quiver_file, k):
    try:
        emit(Quiver.from_json(read_json(quiver_file)).mutate(k).to_json())
    except LIBRARY_ERRORS as exception:
        fail(exception)


@cli.command("mutate-seed")
@click.option("--seed", "seed_file", type=click.File("r"), required=True)
@click.option("--at", "k", type=int, required=True, help="direction to mutate in, from 0")
@click.option("--trace", is_flag=True, help="also print the exchange relation")
def mutate_seed(seed_file, k, trace):
    try:
        seed = Seed.from_json(read_json(seed_file))
        mutated = seed.mutate(k)
        if trace:
            plus, minus = seed.exchange_polynomials(k)
            emit({
                "relation": f"{seed.cluster[k]} * {mutated.cluster[k]} = {plus} + {minus}",
                "seed": mutated.to_json(),
            })
        else:
            emit(mutated.to_json())
    except LIBRARY_ERRORS as exception:
        fail(exception)


@cli.command("exchange-graph")
@click.option("--seed", "seed_file", type=click.File("r"), required=True)
@click.option("--depth", type=int, default=None, help="mutation depth, limits.depth by default")
@click.option("--limit", type=int, default=None, help="node limit, limits.node_limit by default")
@click.option("--dot", type=click.Path(dir_okay=False, writable=True), default=None)
@click.pass_context
def exchange_graph_command(ctx, seed_file, depth, limit, dot):
    config = ctx.obj["config"]
    try:
        graph = exchange_graph(
            Seed.from_json(read_json(seed_file)),
            config.depth if depth is None else depth,
            config.node_limit if limit is None else limit,
        )
    except LIBRARY_ERRORS as exception:
        fail(exception)
    if dot:
        with open(dot, "w") as dot_file:
            dot_file.write(graph.to_dot() + "\n")
    emit(graph.to_json())


@cli.command()
@click.option("--quiver", "quiver_file", type=click.File("r"), required=True)
@click.pass_context
def classify(ctx, quiver_file):
    try:
        label = classify_tilde_A(Quiver.from_json(read_json(quiver_file)), ctx.obj["config"].node_limit)
    except LIBRARY_ERRORS as exception:
        fail(exception)
    emit(label.to_json())


@cli.group()
def annulus():
    """triangulations of the annulus C(p,q)"""


@annulus.command("flip")
@click.option("--triangulation", "triangulation_file", type=click.File("r"), required=True)
@click.option("--arc", "index", type=int, required=True, help="index of the arc to flip")
def annulus_flip(triangulation_file, index):
    try:
        triangulation = Triangulation.from_json(read_json(triangulation_file))
        result = triangulation.flip_result(index)
    except LIBRARY_ERRORS as exception:
        fail(exception)
    emit({
        "old_arc": result.old_arc.to_json(),
        "new_arc": result.new_arc.to_json(),
        "triangulation": result.triangulation.to_json(),
    })


@annulus.command("variable")
@click.option("--p", type=int, required=True)
@click.option("--q", type=int, required=True)
@click.option("--arc", "arc_file", type=click.File("r"), required=True)
@click.pass_context
def annulus_variable(ctx, p, q, arc_file):
    config = ctx.obj["config"]
    try:
        marked = MarkedAnnulus(p, q)
        arc = ArcLift.from_json(read_json(arc_file))
        variable = variable_of_arc(
            marked.canonical(arc.e1, arc.e2),
            marked,
            max_flips=config.max_flips,
            rng=random.Random(ctx.obj["seed"]),
        )
    except LIBRARY_ERRORS as exception:
        fail(exception)
    emit({"arc": str(arc), "variable": variable.to_json(), "text": str(variable)})


@cli.command()
@click.option(
    "--report",
    "name",
    type=click.Choice(sorted(pl.REPORTS) + ["all"]),
    required=True,
)
@click.option("--p", type=int, default=None)
@click.option("--q", type=int, default=None)
@click.option("--depth", type=int, default=None)
@click.option("--K", "K", type=int, default=None, help="last induction step")
@click.pass_context
def verify(ctx, name, p, q, depth, K):
    """run verification reports, exit status 0 only when every report passes"""
    config = ctx.obj["config"]
    try:
        reports = pl.run_report(
            name, p=p, q=q, depth=depth, K=K, node_limit=config.node_limit, seed=ctx.obj["seed"]
        )
    except pl.PaperlabError as exception:
        if exception.report is not None:
            emit(exception.report.to_json())
            click.echo(exception.report.summary(), err=True)
        fail(exception)
    except LIBRARY_ERRORS as exception:
        fail(exception)
    emit([report.to_json() for report in reports])
    for report in reports:
        click.echo(report.summary(), err=True)
    if not all(report.passed for report in reports):
        sys.exit(1)


@cli.command()
@click.pass_context
def prompt(ctx):
    """interactive shell over the same commands"""
    import clusterprompt

    clusterprompt.ClusterPrompt(ctx.obj["config"], ctx.obj["seed"]).run()


if __name__ == "__main__":
    cli()
