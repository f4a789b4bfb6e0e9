#!/usr/bin/env python3
"""
Main CLI interface for vg-stein.

Subcommands expose the distribution functions, the Stein solver, the
Stein-factor constants, the six-moment bound, probability distances and the
certification harness. Report data goes to stdout (or --output) as JSON or
CSV; logs go to stderr.

Exit codes: 0 on success, 1 on a failing certification or numerical error,
2 on a usage error.
"""

import functools
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import click
from pydantic import ValidationError

from . import __version__
from .models.config import SUITES, CertifyConfig, CliConfig
from .models.params import ReparamVG, VGParams
from .models.stein import TestFunction
from .modules import certify, distances, moment_bounds, stein_factors, stein_solver, vg_dist
from .modules.bessel import BesselError
from .settings import get_settings
from .utils.file_manager import (
    FileManagerError, ReportWriter, load_certify_config, load_cumulants, load_sample_csv,
)
from .utils.helpers import format_duration, setup_logging
from .utils.quadrature import QuadratureError
from .utils.validators import ReportValidator

logger = logging.getLogger(__name__)

USAGE_ERRORS = (
    ValidationError, FileManagerError, certify.CertificationError, stein_factors.RegistryError,
)
NUMERICAL_ERRORS = (
    BesselError, QuadratureError, vg_dist.VGDistributionError, stein_solver.SteinSolverError,
    stein_factors.SteinFactorError, moment_bounds.MomentBoundError, distances.DistanceError,
)


def handle_errors(func: Callable[..., Any]) -> Callable[..., Any]:
    """Map bad input to exit code 2 and numerical failures to exit code 1."""
    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except USAGE_ERRORS as e:
            raise click.UsageError(str(e)) from e
        except NUMERICAL_ERRORS as e:
            logger.error(f"{func.__name__} failed: {e}")
            click.echo(f"Error: {e}", err=True)
            sys.exit(1)
        except ValueError as e:
            raise click.UsageError(str(e)) from e
    return wrapper


def law_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """--r, --theta, --sigma, --mu for commands acting on one law."""
    func = click.option('--mu', type=float, default=0.0, show_default=True, help='Location μ')(func)
    func = click.option('--sigma', type=float, required=True, help='Scale σ > 0')(func)
    func = click.option('--theta', type=float, default=0.0, show_default=True, help='Skewness θ')(func)
    func = click.option('--r', 'r', type=float, required=True, help='Shape r > 0')(func)
    return func


def _law(r: float, theta: float, sigma: float, mu: float) -> VGParams:
    return VGParams(r=r, theta=theta, sigma=sigma, mu=mu)


def _emit(ctx: click.Context, subcommand: str, options: Dict[str, Any],
          records: List[Dict[str, Any]], seed: Optional[int] = None) -> None:
    """Write {version, config, records} (JSON) or the flat records (CSV)."""
    cli_config = CliConfig(subcommand=subcommand, options=_plain(options),
                           output_format=ctx.obj['format'], seed=seed)
    _write(ctx, {"version": __version__, "config": cli_config.model_dump(), "records": records})


def _write(ctx: click.Context, document: Dict[str, Any]) -> None:
    writer = ReportWriter()
    output: Optional[Path] = ctx.obj['output']
    if ctx.obj['format'] == 'csv':
        header = "# config: " + json.dumps(document["config"], sort_keys=True) + "\n"
        text = header + writer.to_csv(document["records"])
        if output is None:
            click.echo(text, nl=False)
        else:
            output.parent.mkdir(parents=True, exist_ok=True)
            output.write_text(text, encoding='utf-8')
        return
    writer.save_json(document, output)


def _plain(value: Any) -> Any:
    """Options as JSON-ready values (tuples to lists, paths to strings)."""
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    return value


@click.group()
@click.option('--debug', is_flag=True, help='Enable debug logging')
@click.option('--format', 'output_format', type=click.Choice(['json', 'csv']), default='json',
              show_default=True, help='Output format')
@click.option('--output', type=click.Path(dir_okay=False, path_type=Path), default=None,
              help='Write the report to a file instead of stdout')
@click.option('--log-file', type=click.Path(dir_okay=False, path_type=Path), default=None,
              help='Also write logs to this file')
@click.pass_context
def cli(ctx: click.Context, debug: bool, output_format: str, output: Optional[Path],
        log_file: Optional[Path]) -> None:
    """vg-stein: variance-gamma Stein-method numerics."""
    settings = get_settings()
    setup_logging(logging.DEBUG if debug else getattr(logging, settings.log_level), log_file=log_file)

    ctx.ensure_object(dict)
    ctx.obj['format'] = output_format
    ctx.obj['output'] = output


# ================================
# Distribution
# ================================

@cli.command()
@law_options
@click.option('--x', 'xs', type=float, multiple=True, required=True, help='Evaluation point (repeatable)')
@click.pass_context
@handle_errors
def pdf(ctx: click.Context, r: float, theta: float, sigma: float, mu: float, xs: Sequence[float]) -> None:
    """Density of VG(r, θ, σ, μ)."""
    p = _law(r, theta, sigma, mu)
    records = [{"x": x, "pdf": float(vg_dist.pdf(p, x))} for x in xs]
    _emit(ctx, "pdf", dict(params=p.model_dump(), x=list(xs)), records)


@cli.command()
@law_options
@click.option('--x', 'xs', type=float, multiple=True, required=True, help='Evaluation point (repeatable)')
@click.pass_context
@handle_errors
def cdf(ctx: click.Context, r: float, theta: float, sigma: float, mu: float, xs: Sequence[float]) -> None:
    """Distribution function of VG(r, θ, σ, μ)."""
    p = _law(r, theta, sigma, mu)
    values = vg_dist.cdf(p, list(xs))
    records = [{"x": x, "cdf": float(v)} for x, v in zip(xs, values)]
    _emit(ctx, "cdf", dict(params=p.model_dump(), x=list(xs)), records)


@cli.command()
@law_options
@click.pass_context
@handle_errors
def mode(ctx: click.Context, r: float, theta: float, sigma: float, mu: float) -> None:
    """Mode, and for r > 1 the density there and its closed-form bound."""
    p = _law(r, theta, sigma, mu)
    m = vg_dist.mode(p)
    record: Dict[str, Any] = {"mode": m}
    if p.r > 1.0:
        record.update(pdf_at_mode=float(vg_dist.pdf(p, m)), density_sup_bound=vg_dist.density_sup_bound(p))
    _emit(ctx, "mode", dict(params=p.model_dump()), [record])


@cli.command()
@law_options
@click.pass_context
@handle_errors
def cumulants(ctx: click.Context, r: float, theta: float, sigma: float, mu: float) -> None:
    """Cumulants κ1..κ6, mean and variance."""
    p = _law(r, theta, sigma, mu)
    mean, variance = vg_dist.mean_variance(p)
    record = {**vg_dist.cumulants(p).model_dump(), "mean": mean, "variance": variance,
              "abs_moment_bound": vg_dist.abs_moment_bound(p)}
    _emit(ctx, "cumulants", dict(params=p.model_dump()), [record])


@cli.command()
@law_options
@click.option('--n', 'n', type=click.IntRange(min=1), required=True, help='Number of draws')
@click.option('--seed', type=int, required=True, help='Generator seed')
@click.pass_context
@handle_errors
def sample(ctx: click.Context, r: float, theta: float, sigma: float, mu: float, n: int, seed: int) -> None:
    """Seeded variates from VG(r, θ, σ, μ)."""
    p = _law(r, theta, sigma, mu)
    draws = vg_dist.sample(p, n, seed)
    _emit(ctx, "sample", dict(params=p.model_dump(), n=n), [{"value": float(v)} for v in draws], seed=seed)


# ================================
# Stein equation
# ================================

@cli.command()
@law_options
@click.option('--h', 'descriptor', required=True, help='Test function: indicator:z, sine:a, identity or square')
@click.option('--x', 'xs', type=float, multiple=True, required=True, help='Evaluation point (repeatable)')
@click.option('--derivs', type=click.IntRange(0, 3), default=1, show_default=True, help='Highest derivative')
@click.option('--method', type=click.Choice(stein_solver.METHODS), default='rearranged', show_default=True,
              help="How f'' and f''' are obtained")
@click.pass_context
@handle_errors
def solve(ctx: click.Context, r: float, theta: float, sigma: float, mu: float, descriptor: str,
          xs: Sequence[float], derivs: int, method: str) -> None:
    """Solution of the Stein equation and its derivatives."""
    p = _law(r, theta, sigma, mu)
    tf = TestFunction.from_descriptor(descriptor)
    mean = stein_solver.expectation(p, tf)
    records = []
    for x in xs:
        ev = stein_solver.evaluate(p, tf, x, order=derivs, method=method, mean=mean)
        records.append({"test_function": tf.descriptor, **ev.model_dump()})
    _emit(ctx, "solve", dict(params=p.model_dump(), h=tf.descriptor, x=list(xs), derivs=derivs,
                             method=method, expectation=mean), records)


@cli.command()
@law_options
@click.option('--which', type=click.Choice(['A', 'B', 'C', 'D', 'M', 'N', 'C1C2']), required=True,
              help='Constant to compute')
@click.pass_context
@handle_errors
def constants(ctx: click.Context, r: float, theta: float, sigma: float, mu: float, which: str) -> None:
    """Stein-factor constants of the law."""
    p = _law(r, theta, sigma, mu)
    records: List[Dict[str, Any]] = []
    if which == 'A':
        records.append({"name": "A", "value": stein_factors.const_A(p)})
    elif which == 'B':
        records.append({"name": "B", "value": stein_factors.const_B(p)})
    elif which == 'C':
        records.append({"name": "C", "value": stein_factors.const_C(p)})
    elif which == 'D':
        records.append({"name": "D", "value": stein_factors.const_D(p)})
        if p.r > 1.0:
            records.append({"name": "D_exact", "value": stein_factors.const_D(p, exact=True)})
    elif which in ('M', 'N'):
        rp: ReparamVG = p.reparam()
        m, n = stein_factors.const_M_N(rp.nu, rp.gamma)
        records.append({"name": which, "value": m if which == 'M' else n, "nu": rp.nu, "gamma": rp.gamma})
    else:
        c1, c2 = moment_bounds.c1_c2(p)
        records.extend([{"name": "C1", "value": c1}, {"name": "C2", "value": c2}])
    _emit(ctx, "constants", dict(params=p.model_dump(), which=which), records)


# ================================
# Bounds and distances
# ================================

@cli.command('six-moment')
@click.option('--cumulants', 'cumulant_file', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help='JSON/TOML/YAML file with kappa (and optionally target)')
@click.option('--sample', 'sample_file', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help='CSV sample to estimate the cumulants from')
@click.option('--r', 'r', type=float, default=None, help='Target shape (overrides the file)')
@click.option('--theta', type=float, default=None, help='Target skewness (overrides the file)')
@click.option('--sigma', type=float, default=None, help='Target scale (overrides the file)')
@click.option('--form', type=click.Choice(moment_bounds.FORMS), default='raw', show_default=True)
@click.option('--metric', type=click.Choice(['w', 'k']), default='w', show_default=True)
@click.pass_context
@handle_errors
def six_moment(ctx: click.Context, cumulant_file: Optional[Path], sample_file: Optional[Path],
               r: Optional[float], theta: Optional[float], sigma: Optional[float],
               form: str, metric: str) -> None:
    """Six-moment bound on the distance between F and VG_c(r, θ, σ)."""
    if (cumulant_file is None) == (sample_file is None):
        raise click.UsageError("Give exactly one of --cumulants or --sample")

    target: Optional[VGParams] = None
    note: Optional[str] = None
    if cumulant_file is not None:
        target, kappa, note = load_cumulants(cumulant_file)
    else:
        kappa = moment_bounds.estimate_cumulants(load_sample_csv(sample_file))
        note = f"estimated from {sample_file.name}"

    base = target.model_dump() if target is not None else {}
    overrides = {k: v for k, v in (("r", r), ("theta", theta), ("sigma", sigma)) if v is not None}
    merged = {**base, **overrides}
    if "r" not in merged or "sigma" not in merged:
        raise click.UsageError("Target law needs r and sigma (from the file or --r/--sigma)")
    target = VGParams.centered(merged["r"], merged.get("theta", 0.0), merged["sigma"])

    data = moment_bounds.six_moment_input(target, kappa)
    decomposition = moment_bounds.bound_decomposition(data, form)
    value = decomposition.value if metric == 'w' else stein_factors.dk_from_dw(target, decomposition.value)
    record = {"metric": metric, "bound": value, "kappa": kappa.model_dump(), "note": note,
              **decomposition.model_dump()}
    _emit(ctx, "six-moment", dict(target=target.model_dump(), form=form, metric=metric,
                                  cumulants=cumulant_file, sample=sample_file), [record])


@cli.command()
@click.option('--between', nargs=2, type=str, default=None, metavar='PARAMS_A PARAMS_B',
              help="Two laws as 'r,theta,sigma[,mu]'")
@click.option('--empirical', type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
              help='CSV sample compared with the first law of --between (or --law)')
@click.option('--law', 'law_text', type=str, default=None, help="Law for --empirical as 'r,theta,sigma[,mu]'")
@click.pass_context
@handle_errors
def distance(ctx: click.Context, between: Optional[Sequence[str]], empirical: Optional[Path],
             law_text: Optional[str]) -> None:
    """Kolmogorov and Wasserstein distances."""
    records: List[Dict[str, Any]] = []
    if empirical is not None:
        text = law_text or (between[0] if between else None)
        if text is None:
            raise click.UsageError("--empirical needs a law (--law or --between)")
        p = VGParams.from_string(text)
        data = load_sample_csv(empirical)
        for name, result in (("d_K", distances.d_k_empirical(data, p)), ("d_W", distances.d_w_empirical(data, p))):
            records.append({"metric": name, "law": p.model_dump(), "n": int(data.size), **result.model_dump()})
        options = dict(law=p.model_dump(), empirical=empirical)
    elif between:
        pA, pB = (VGParams.from_string(t) for t in between)
        for name, result in (("d_K", distances.d_k_between(pA, pB)), ("d_W", distances.d_w_between(pA, pB))):
            records.append({"metric": name, "law_a": pA.model_dump(), "law_b": pB.model_dump(),
                            **result.model_dump()})
        options = dict(between=[pA.model_dump(), pB.model_dump()])
    else:
        raise click.UsageError("Give --between PARAMS_A PARAMS_B or --empirical SAMPLE")
    _emit(ctx, "distance", options, records)


# ================================
# Certification
# ================================

@cli.command('certify')
@click.option('--suite', 'suites', type=click.Choice(['all', *SUITES]), multiple=True,
              help='Suite to run (repeatable, default all)')
@click.option('--config', 'config_file', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              default=None, help='JSON/TOML/YAML certification config')
@click.option('--bound-id', 'bound_ids', multiple=True, help='Restrict thm31 to these bound ids')
@click.option('--threads', type=click.IntRange(min=1), default=None, help='Worker processes')
@click.option('--seed', type=int, default=None, help='Seed for random parameter pairs')
@click.pass_context
@handle_errors
def certify_command(ctx: click.Context, suites: Sequence[str], config_file: Optional[Path],
                    bound_ids: Sequence[str], threads: Optional[int], seed: Optional[int]) -> None:
    """Certify the implemented inequalities on grids; exit 1 on any failing report."""
    overrides: Dict[str, Any] = {}
    if suites:
        overrides['suites'] = list(suites)
    if bound_ids:
        overrides['bound_ids'] = list(bound_ids)
    if threads is not None:
        overrides['threads'] = threads
    if seed is not None:
        overrides['seed'] = seed
    config = (load_certify_config(config_file, overrides) if config_file is not None
              else CertifyConfig(**overrides))

    start = time.time()
    bundle = certify.run_full_certification(config)
    logger.info(f"Certification took {format_duration(time.time() - start)}")
    certify.print_summary(bundle)

    cli_config = CliConfig(subcommand="certify", output_format=ctx.obj['format'], seed=config.seed,
                           options=_plain(dict(suites=list(suites), config=config_file,
                                               bound_ids=list(bound_ids), threads=threads)))
    document = bundle.model_dump()
    document["config"] = {"cli": cli_config.model_dump(), "certify": bundle.config}
    _write(ctx, document)
    if bundle.failures:
        click.echo(f"{bundle.failures} failing report(s)", err=True)
        sys.exit(1)


@cli.command()
@click.argument('bundle_path', type=click.Path(exists=True, dir_okay=False, path_type=Path))
def validate(bundle_path: Path) -> None:
    """Validate a certification bundle written by `certify`."""
    try:
        data = json.loads(bundle_path.read_text(encoding='utf-8'))
    except (OSError, json.JSONDecodeError) as e:
        raise click.UsageError(f"Cannot read bundle '{bundle_path}': {e}") from e
    if not isinstance(data, dict):
        raise click.UsageError(f"'{bundle_path}' does not hold a JSON object")

    validator = ReportValidator()
    results = validator.validate_bundle(data)
    for result in results:
        if not result.passed:
            click.echo(f"[{result.severity}] {result.check_name}: {result.message}", err=True)
    passed = sum(1 for r in results if r.passed)
    click.echo(f"{passed}/{len(results)} checks passed", err=True)
    if not validator.is_valid(results):
        sys.exit(1)


@cli.command()
def version() -> None:
    """Show version information."""
    click.echo(f"vg-stein v{__version__}")


if __name__ == '__main__':
    cli()
