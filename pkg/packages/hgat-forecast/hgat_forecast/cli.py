import functools
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import click
import typer
from click.core import Context, ParameterSource

# Add parent path to use local src as package for tests
root_dir = os.path.abspath(os.path.join(os.path.dirname(__file__), os.path.pardir))
sys.path.append(root_dir)

from hgat_common.cli.commands import get_typer_app, version
from hgat_common.cli.docs import MainTexts
from hgat_common.config import hgat_common_config
from hgat_common.logger import configure_logs, logger
from hgat_common.logging_utils.decorators import log_exception
from hgat_forecast.config import HgatForecastConfig, hgat_forecast_config, load_config
from hgat_forecast.exceptions import HgatForecastError, LayoutError, TrainingConfigError
from hgat_forecast.numerics.tensor import set_default_dtype
from hgat_forecast.schemas.checkpoint import CHECKPOINT_SCHEMA_VERSION
from hgat_forecast.schemas.options import Regime
from hgat_forecast.schemas.prediction import PREDICTION_SCHEMA_VERSION
from hgat_forecast.schemas.scenario import SCENARIO_SCHEMA_VERSION

SCENARIO_KINDS = ("all", "straight", "curve", "intersection", "blocking")

app = get_typer_app(
    f"scenario schema {SCENARIO_SCHEMA_VERSION}",
    f"checkpoint schema {CHECKPOINT_SCHEMA_VERSION}",
    f"prediction schema {PREDICTION_SCHEMA_VERSION}",
)

# config keys given explicitly on the command line; they beat a --config file
_explicit_options: Dict[str, Any] = {}


def exit_on_error(func):
    """Contract violations end the command with one red line on stderr and
    exit code 2; anything else is logged with its traceback and exits 1."""
    logged = log_exception(logger, ignore=(HgatForecastError, OSError, click.exceptions.Exit, click.ClickException))(func)

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return logged(*args, **kwargs)
        except (HgatForecastError, OSError) as e:
            typer.secho(f"error: {e}", fg=typer.colors.RED, err=True)
            raise typer.Exit(code=2)
        except (click.exceptions.Exit, click.ClickException):
            raise
        except Exception:
            raise typer.Exit(code=1)

    return wrapper


def resolve_config(config_file: Optional[Path]) -> HgatForecastConfig:
    if config_file is None:
        config = hgat_forecast_config
    else:
        if not config_file.is_file():
            raise TrainingConfigError(f"config file {config_file} does not exist")
        config = load_config(config_file, **_explicit_options)
    set_default_dtype(config.NUMERIC_DTYPE.value)
    return config


def parse_ks(value: str) -> Tuple[int, ...]:
    try:
        ks = tuple(int(k) for k in value.split(",") if k.strip())
    except ValueError:
        raise typer.BadParameter(f"expected comma separated integers, got {value!r}")
    if not ks:
        raise typer.BadParameter("at least one K is needed")
    return ks


def parse_removal_sets(values: Optional[Sequence[str]]) -> Optional[List[Tuple[str, ...]]]:
    """``--remove a,b`` gives one removal set per flag; ``none`` is the
    full graph."""
    if not values:
        return None
    return [
        tuple(r.strip() for r in value.split(",") if r.strip()) if value != "none" else ()
        for value in values
    ]


def scene_graph_for(scenario, options, removed_relations: Sequence[str]):
    from hgat_forecast.graph.builder import assemble_scene_graph

    if scenario.num_observed != options.t_obs:
        raise LayoutError(
            f"scenario {scenario.id} has {scenario.num_observed} observed steps,"
            f" the model expects {options.t_obs}"
        )
    return assemble_scene_graph(scenario, options.graph, removed_relations)


def config_option():
    return typer.Option(None, "--config", help="KEY=value file (HGAT_ prefixed keys)")


@app.command()
@exit_on_error
def generate(
    out: Path = typer.Option(..., help="Directory to write scenario JSON files to"),
    kind: str = typer.Option("all", help=f"One of {', '.join(SCENARIO_KINDS)}"),
    count: int = typer.Option(8, min=1, help="Number of scenarios"),
    agents: int = typer.Option(4, min=1, help="Agents per scenario (the first is focal)"),
    seed: int = typer.Option(0, help="Master seed"),
    config_file: Optional[Path] = config_option(),
):
    """Generate synthetic scenarios."""
    from hgat_forecast.scenario import generate_dataset, save_dataset, timestep_layout
    from hgat_forecast.scenario.generator import generate_blocking_scene, scenario_seeds

    if kind not in SCENARIO_KINDS:
        raise typer.BadParameter(f"unknown kind {kind!r}, use one of {SCENARIO_KINDS}")
    layout = timestep_layout(resolve_config(config_file))
    if kind == "blocking":
        scenarios = [generate_blocking_scene(s, layout) for s in scenario_seeds(seed, count)]
    else:
        scenarios = generate_dataset(count, kind, agents, seed, layout)
    paths = save_dataset(scenarios, out)
    typer.echo(f"wrote {len(paths)} scenarios to {out}")


@app.command()
@exit_on_error
def train(
    data: Path = typer.Option(..., help="Directory of training scenarios"),
    out: Path = typer.Option(..., help="Checkpoint path; the loss log is written next to it"),
    regime: Regime = typer.Option(Regime.none, help="none, frozen or e2e"),
    base: Optional[Path] = typer.Option(None, help="Pretrained checkpoint (required for frozen)"),
    seed: Optional[int] = typer.Option(None, help="Overrides the SEED config key"),
    config_file: Optional[Path] = config_option(),
):
    """Train a model in one of the three regimes."""
    from hgat_forecast.scenario import load_dataset
    from hgat_forecast.training import loss_log_path
    from hgat_forecast.training import train as run_training

    if regime == Regime.frozen and base is None:
        raise TrainingConfigError("--regime frozen needs --base CKPT")
    config = resolve_config(config_file)
    overrides: Dict[str, Any] = {"regime": regime}
    if seed is not None:
        overrides["seed"] = seed
    training = config.training_options(**overrides)
    result = run_training(load_dataset(data), config.model_options(), training, out, base)
    final = result.losses[-1]
    typer.echo(
        f"trained {len(result.losses)} steps ({regime.value}), final loss {final.total:.4f};"
        f" checkpoint {out}, loss log {loss_log_path(out)}"
    )


@app.command("eval")
@exit_on_error
def evaluate_command(
    ckpt: Path = typer.Option(..., help="Checkpoint to evaluate"),
    data: Path = typer.Option(..., help="Directory of scenarios with ground truth"),
    k: str = typer.Option("1,6", help="Comma separated K values"),
    out: Optional[Path] = typer.Option(None, help="CSV report path"),
    config_file: Optional[Path] = config_option(),
):
    """Evaluate minADE, minFDE, MR and brier-minFDE on the focal agents."""
    from hgat_forecast.metrics import evaluate_model, write_report
    from hgat_forecast.model import uses_refinement
    from hgat_forecast.scenario import load_dataset
    from hgat_forecast.training import load_model

    ks = parse_ks(k)
    config = resolve_config(config_file)
    model, manifest = load_model(ckpt)
    report = evaluate_model(
        model,
        load_dataset(data),
        ks,
        refine=uses_refinement(manifest.regime),
        miss_threshold=config.MISS_THRESHOLD_M,
        removed_relations=manifest.removed_relations,
        threads=config.THREADS,
    )
    for s in (report[k_value] for k_value in report.ks):
        typer.echo(
            f"K={s.k} minADE={s.min_ade:.3f} minFDE={s.min_fde:.3f}"
            f" MR={s.miss_rate:.3f} brier-minFDE={s.brier_min_fde:.3f} n={s.count}"
        )
    if out is not None:
        write_report(report, out)
        typer.echo(f"report written to {out}")


@app.command()
@exit_on_error
def predict(
    ckpt: Path = typer.Option(..., help="Checkpoint to run"),
    scenario: Path = typer.Option(..., help="Scenario JSON file"),
    out: Path = typer.Option(..., help="Prediction JSON path"),
    config_file: Optional[Path] = config_option(),
):
    """Predict world-frame trajectories for the scored agents of a scenario."""
    from hgat_forecast.forecaster import prediction_to_document, write_prediction
    from hgat_forecast.model import uses_refinement
    from hgat_forecast.scenario import load_scenario
    from hgat_forecast.training import load_model

    resolve_config(config_file)
    model, manifest = load_model(ckpt)
    graph = scene_graph_for(load_scenario(scenario), model.options, manifest.removed_relations)
    refine = uses_refinement(manifest.regime)
    output = model.predict(graph, refine=refine)
    document = prediction_to_document(output.final, graph, 1.0 / model.options.rate_hz, refined=refine)
    write_prediction(document, out)
    typer.echo(f"predicted {len(document.agents)} agents, written to {out}")


@app.command()
@exit_on_error
def attention(
    ckpt: Path = typer.Option(..., help="Checkpoint to run"),
    scenario: Path = typer.Option(..., help="Scenario JSON file"),
    out: Path = typer.Option(..., help="Attention JSON lines path"),
    config_file: Optional[Path] = config_option(),
):
    """Dump every attention coefficient of the encoders as JSON lines."""
    from hgat_forecast.hgat import AttentionTrace, summarize_attention, write_attention_jsonl
    from hgat_forecast.scenario import load_scenario
    from hgat_forecast.training import load_model

    resolve_config(config_file)
    model, manifest = load_model(ckpt)
    graph = scene_graph_for(load_scenario(scenario), model.options, manifest.removed_relations)
    trace = AttentionTrace()
    model.predict(graph, refine=False, trace=trace)
    write_attention_jsonl(trace, out)
    for (stage, relation), share in sorted(summarize_attention(trace).items()):
        typer.echo(f"{stage:>5} {relation:<14} {share:.3f}")
    typer.echo(f"{len(trace)} attention records written to {out}")


@app.command()
@exit_on_error
def ablate(
    data: Path = typer.Option(..., help="Directory of training scenarios"),
    out: Path = typer.Option(..., help="CSV with one row per removal set and K"),
    remove: Optional[List[str]] = typer.Option(
        None,
        help="Comma separated edge types to remove (repeatable, 'none' for the full graph);"
        " default: the standard sets",
    ),
    eval_data: Optional[Path] = typer.Option(None, help="Evaluation scenarios (default: --data)"),
    k: str = typer.Option("1,6", help="Comma separated K values"),
    checkpoint_dir: Optional[Path] = typer.Option(None, help="Keep one checkpoint per run here"),
    config_file: Optional[Path] = config_option(),
):
    """Retrain end to end with scene graph edge types removed and evaluate."""
    from hgat_forecast.ablation import ablate as run_ablation
    from hgat_forecast.ablation import removal_label, write_ablation
    from hgat_forecast.graph.relations import check_removable
    from hgat_forecast.scenario import load_dataset

    ks = parse_ks(k)
    sets = parse_removal_sets(remove)
    for removed in sets or ():
        check_removable(removed)
    config = resolve_config(config_file)
    rows = run_ablation(
        load_dataset(data),
        config.model_options(),
        config.training_options(),
        sets,
        load_dataset(eval_data) if eval_data is not None else None,
        ks,
        config.MISS_THRESHOLD_M,
        checkpoint_dir,
    )
    write_ablation(rows, out)
    for row in rows:
        for k_value in row.report.ks:
            typer.echo(f"{removal_label(row.removed):<52} K={k_value} brier-minFDE={row.report[k_value].brier_min_fde:.3f}")
    typer.echo(f"ablation table written to {out}")


@app.command()
def print_config(config_file: Optional[Path] = config_option()):
    """To test config values, print the configuration parsed from ENV, a
    config file and CMD."""
    typer.echo("Printing configuration values")
    config = hgat_forecast_config if config_file is None else load_config(config_file, **_explicit_options)
    typer.echo(str(config))
    typer.echo(str(hgat_common_config))


def _print_version(ctx: Context, param, value: bool):
    if not value or ctx.resilient_parsing:
        return
    version()
    ctx.exit()


def get_cli_object() -> click.Group:
    main_texts = MainTexts("HGAT-FORECAST", "forecast")

    def on_start(ctx: Context, **kwargs):
        _explicit_options.clear()
        for key, value in kwargs.items():
            if key in hgat_forecast_config.entries and ctx.get_parameter_source(key) == ParameterSource.COMMANDLINE:
                _explicit_options[key] = value
        configure_logs()
        if ctx.invoked_subcommand is None:
            typer.secho(main_texts.header, bold=True, fg=typer.colors.MAGENTA)
            typer.echo(ctx.get_usage())
            typer.echo(main_texts.docs)

    group = hgat_forecast_config.get_cli_object(
        [hgat_common_config], typer_app=app, help=main_texts.docs, on_start=on_start
    )
    return click.option(
        "--version",
        is_flag=True,
        expose_value=False,
        is_eager=True,
        callback=_print_version,
        help="Print the package and file schema versions and exit",
    )(group)


def cli():
    get_cli_object()()


if __name__ == "__main__":
    cli()
