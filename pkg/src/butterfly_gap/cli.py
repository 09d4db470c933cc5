import dataclasses
import json
import logging
import sys
from typing import Optional, Tuple

import click

from . import analysis
from .channels import ChannelKind, ChannelModel
from .exceptions import ButterflyGapError, ConfigurationError, DomainError
from .rates import erasure_rates
from .rates.erasure_rates import ExponentMode
from .rates.quantum_bound import closed_form_bound
from .settings import Settings, get_settings, use_settings
from .sim.base_classes import StrategyKind
from .sim.erasure_sim import enumerate_exact, simulate
from .sim.strategies import make_strategy
from .topology import build_grid
from .verification import format_report, run_checks

USAGE_ERROR, COMPUTATION_ERROR = 1, 2

CHANNELS = [kind.value for kind in ChannelKind]
STRATEGIES = [kind.value for kind in StrategyKind]
MODES = [mode.value for mode in ExponentMode]


class ExitCodeGroup(click.Group):
    """Click group exiting with 0 on success, 1 on usage errors and 2 on failed computations."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.UsageError as exc:
            exc.show()
            sys.exit(USAGE_ERROR)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(USAGE_ERROR)
        except click.ClickException as exc:
            exc.show()
            sys.exit(exc.exit_code)
        except (DomainError, ConfigurationError) as exc:
            click.echo(f"Error: {exc}", err=True)
            sys.exit(USAGE_ERROR)
        except ButterflyGapError as exc:
            click.echo(f"Error: {exc}", err=True)
            sys.exit(COMPUTATION_ERROR)
        sys.exit(rv if isinstance(rv, int) else 0)


# PARSERS
def _parse_range(ctx, param, value: Optional[str]) -> Optional[Tuple[float, float, float]]:
    if value is None:
        return None
    try:
        lo, hi, step = (float(x) for x in value.split(":"))
        analysis.param_grid(lo, hi, step)
        return lo, hi, step
    except (ValueError, ConfigurationError) as exc:
        raise click.BadParameter(f"expected lo:hi:step with a non-empty range ({exc})")


def _parse_bracket(ctx, param, value: Optional[str]) -> Optional[Tuple[float, float]]:
    if value is None:
        return None
    try:
        lo, hi = (float(x) for x in value.split(":"))
    except ValueError:
        raise click.BadParameter("expected lo:hi")
    if not lo < hi:
        raise click.BadParameter("the bracket is empty")
    return lo, hi


def _parse_grid(ctx, param, value: Optional[str]) -> Optional[Tuple[int, int]]:
    if value is None:
        return None
    try:
        nx, ny = (int(x) for x in value.lower().split("x"))
    except ValueError:
        raise click.BadParameter("expected NXxNY, for example 4x3")
    if nx < 1 or ny < 1:
        raise click.BadParameter("grid sizes start at 1")
    return nx, ny


def _parse_list(ctx, param, value: Optional[str]) -> Optional[Tuple[int, ...]]:
    if value is None:
        return None
    try:
        return tuple(int(x) for x in value.split(","))
    except ValueError:
        raise click.BadParameter("expected a comma separated list of integers")


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        click.echo(text, nl=False)
        return
    try:
        with open(out, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise click.FileError(out, hint=str(exc))


def _plotscript(csv_path: str, config: dict) -> str:
    """Gnuplot script drawing the rate and bound columns of a sweep CSV."""
    columns = ", \\\n     ".join(
        f'"{csv_path}" using 1:{k} with lines title columnheader({k})' for k in (2, 3, 4)
    )
    return (
        f"# {json.dumps(config, sort_keys=True)}\n"
        'set datafile separator ","\n'
        f'set xlabel "{config.get("channel", "param")} parameter"\n'
        'set ylabel "rate per use and receiver"\n'
        "set key autotitle columnhead\n"
        f"plot {columns}\n"
    )


# COMMANDS
@click.group(cls=ExitCodeGroup)
@click.option("--debug/--no-debug", default=False)
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="User ini file overriding the packaged defaults.")
def cli(debug: bool, config_file: Optional[str]):
    """Classical rates versus quantum bounds of butterfly networks."""
    logging.basicConfig(level=logging.DEBUG if debug else logging.WARNING)
    if debug:
        click.echo("Running butterfly-gap with debug = True")
    use_settings(Settings(user_file=config_file) if config_file else None)


@cli.command()
@click.option("--channel", type=click.Choice(CHANNELS), default="erasure", show_default=True)
@click.option("--param", type=click.FloatRange(0.0, 1.0), default=0.0, show_default=True)
@click.option("--nx", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--ny", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--asymptotic", is_flag=True, help="Use the nx -> infinity limits.")
@click.option("--joint-input", is_flag=True, help="Shared product input over all senders (depolarizing).")
@click.option("--exponent-mode", type=click.Choice(MODES), default=ExponentMode.NY_CORRECTED.value, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def rate(channel, param, nx, ny, asymptotic, joint_input, exponent_mode, fmt, out):
    """Quantum bound and classical rates of one network."""
    config = analysis.RateConfig(channel, nx, ny, asymptotic, exponent_mode, joint_input)
    report = analysis.rate_report(config, param, maxflow=not asymptotic)
    if fmt == "json":
        _emit(json.dumps(report.to_dict(), sort_keys=True) + "\n", out)
        return 0
    lines = ["name,value,method"]
    lines += [f"{name},{analysis.format_float(e.value)},{e.method}" for name, e in report.entries.items()]
    _emit("\n".join(lines) + "\n", out)
    return 0


@cli.command()
@click.option("--channel", type=click.Choice(["depolarizing", "erasure"]), default="erasure", show_default=True)
@click.option("--param-range", "param_range", callback=_parse_range, required=True, help="lo:hi:step, inclusive.")
@click.option("--nx", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--ny", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--asymptotic", is_flag=True, help="Use the nx -> infinity limits.")
@click.option("--joint-input", is_flag=True)
@click.option("--exponent-mode", type=click.Choice(MODES), default=ExponentMode.NY_CORRECTED.value, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--emit-plotscript", type=click.Path(dir_okay=False), default=None,
              help="Also write a gnuplot script for the CSV written to --out.")
def sweep(channel, param_range, nx, ny, asymptotic, joint_input, exponent_mode, fmt, out, emit_plotscript):
    """Rates and gaps over a parameter range."""
    if emit_plotscript and (out is None or fmt != "csv"):
        raise click.UsageError("--emit-plotscript needs a CSV written with --out")
    config = analysis.RateConfig(channel, nx, ny, asymptotic, exponent_mode, joint_input)
    table = analysis.gap_sweep(config, analysis.param_grid(*param_range))
    record = dict(
        table.config,
        param_range=":".join(repr(x) for x in param_range),
        format=fmt,
        seed=get_settings().get("simulation.DEFAULT", "seed"),
    )
    table = analysis.SweepTable(record, table.rows)
    if fmt == "json":
        _emit(json.dumps(table.to_dict(), sort_keys=True) + "\n", out)
    else:
        _emit(table.to_csv(), out)
    if emit_plotscript:
        _emit(_plotscript(out, record), emit_plotscript)
    return 0


def _closed_form_rate(nx: int, ny: int, assisted: bool, mode: str):
    if ny == 1:
        if assisted:
            return lambda eps: erasure_rates.rate_parallel_assisted_strict(nx, eps)
        return lambda eps: erasure_rates.rate_parallel(nx, eps)
    if assisted:
        return None
    if nx == 1:
        return lambda eps: erasure_rates.rate_series(ny, eps)
    return lambda eps: erasure_rates.rate_grid(nx, ny, eps, mode)


@cli.command()
@click.option("--nx", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--ny", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--grid", "shape", callback=_parse_grid, default=None, help="NXxNY, overrides --nx/--ny.")
@click.option("--assisted", is_flag=True, help="Inter-node assisted rate (eta').")
@click.option("--bracket", callback=_parse_bracket, default=None, help="lo:hi")
@click.option("--tol", type=click.FloatRange(min=0.0, min_open=True), default=None)
@click.option("--exponent-mode", type=click.Choice(MODES), default=ExponentMode.NY_CORRECTED.value, show_default=True)
@click.option("--trials", type=click.IntRange(min=1), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=click.IntRange(min=1), default=None)
@click.option("--nx-list", callback=_parse_list, default=None, help="With --ny-list: assisted crossing grid.")
@click.option("--ny-list", callback=_parse_list, default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def crossing(nx, ny, shape, assisted, bracket, tol, exponent_mode, trials, seed, workers, nx_list, ny_list, fmt, out):
    """Erasure probability where a classical rate meets the quantum bound."""
    if (nx_list is None) != (ny_list is None):
        raise click.UsageError("--nx-list and --ny-list go together")
    if nx_list is not None:
        result = analysis.eta_prime_grid(nx_list, ny_list, trials=trials, seed=seed, tol=tol, workers=workers)
        if fmt == "json":
            payload = {
                "config": {"nx_list": list(result.nx_list), "ny_list": list(result.ny_list)},
                "results": {
                    "eta_prime": result.values.tolist(),
                    "error": result.errors.tolist(),
                    "relative_increase": result.relative_increase.tolist(),
                },
            }
            _emit(json.dumps(payload, sort_keys=True) + "\n", out)
        else:
            _emit(result.to_csv(), out)
        return 0

    if shape is not None:
        nx, ny = shape
    lo, hi = bracket or (None, None)
    rate_fn = _closed_form_rate(nx, ny, assisted, exponent_mode)
    if rate_fn is None:
        point = analysis.mc_crossing(nx, ny, "cc", lo, hi, tol, trials, seed, workers)
    else:
        bound = lambda eps: closed_form_bound(nx, ny, ChannelModel.erasure(eps))  # noqa: E731
        point = analysis.find_crossing(rate_fn, bound, lo, hi, tol)
        if assisted and nx > 1:
            point = dataclasses.replace(point, method="closed-form strict")

    config = {"nx": nx, "ny": ny, "assisted": assisted, "exponent_mode": exponent_mode}
    if fmt == "json":
        _emit(json.dumps({"config": config, "results": point.to_dict()}, sort_keys=True) + "\n", out)
        return 0
    error = "" if point.error is None else f" +- {analysis.format_float(point.error, 3)}"
    _emit(
        f"{'eta_prime' if assisted else 'eta'} = {analysis.format_float(point.value)}{error}\n"
        f"bracket = [{point.bracket[0]}, {point.bracket[1]}]\n"
        f"method = {point.method}\n",
        out,
    )
    return 0


@cli.command("simulate")
@click.option("--param", type=click.FloatRange(0.0, 1.0), required=True, help="Erasure probability.")
@click.option("--nx", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--ny", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--strategy", type=click.Choice(STRATEGIES), default="flood", show_default=True)
@click.option("--trials", type=click.IntRange(min=1), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=click.IntRange(min=1), default=None)
@click.option("--exact", is_flag=True, help="Enumerate every edge state instead of sampling.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def simulate_cmd(param, nx, ny, strategy, trials, seed, workers, exact, out):
    """Monte Carlo rate of a strategy on an erasure grid."""
    net = build_grid(nx, ny, ChannelModel.erasure(param))
    chosen = make_strategy(strategy)
    chosen.check_topology(net)
    if exact:
        config = {"nx": nx, "ny": ny, "strategy": strategy, "epsilon": param}
        payload = {"config": config, "results": {"mean": enumerate_exact(net, chosen, param), "method": "enumeration"}}
    else:
        estimate = simulate(net, chosen, param, trials=trials, seed=seed, workers=workers)
        results = estimate.to_dict()
        payload = {"config": results.pop("config"), "results": results}
    _emit(json.dumps(payload, sort_keys=True) + "\n", out)
    return 0


@cli.command()
@click.option("--quick", is_flag=True, help="Skip the Monte Carlo checks.")
def verify(quick):
    """Run the consistency suite, exit status 2 if a check fails."""
    results = run_checks(quick)
    click.echo(format_report(results), nl=False)
    return 0 if all(r.passed for r in results) else COMPUTATION_ERROR


def main() -> None:
    cli(prog_name="butterfly-gap")


if __name__ == "__main__":
    main()
