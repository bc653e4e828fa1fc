"""CLI interface for rieszflow."""

import logging
import sys
from typing import List, Optional

import click
from dotenv import load_dotenv

from rieszflow.analytic_flows import (
    CenteredComposite,
    DelayedInteractionFlow,
    Disc1DFlow,
    DoubleWellSplit,
    GeodesicComparison,
    InteractionFlow,
    MSigmaState,
    OneParticleFlow,
)
from rieszflow.commands.common import (
    FORMATS,
    STDOUT,
    GlobalOptions,
    parse_vector,
    read_measure,
    time_grid,
)
from rieszflow.commands.disc import disc_impl
from rieszflow.commands.equilibrium import equilibrium_impl
from rieszflow.commands.flow import flow_impl, msigma_impl
from rieszflow.commands.flow1d import flow1d_impl
from rieszflow.commands.halftone import halftone_impl
from rieszflow.commands.mms import mms_impl
from rieszflow.commands.particles import particles_impl
from rieszflow.errors import RieszFlowError
from rieszflow.flow1d import Flow1DConfig
from rieszflow.halftone import HalftoneConfig, load_pgm
from rieszflow.kernels import Riesz, Wendland
from rieszflow.measures import DiscreteMeasure, QuantileGrid, quantile_of_atomic
from rieszflow.particles import INIT_MODES, SimConfig

load_dotenv()

FLOW_KINDS = [
    "interaction",
    "delayed",
    "one-particle",
    "disc1d",
    "geodesic",
    "composite",
    "double-well",
    "msigma",
]


def setup_logging(verbose: bool = False):
    """Setup logging configuration for CLI."""
    level = logging.DEBUG if verbose else logging.ERROR
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        handlers=[logging.StreamHandler()],
    )


@click.group()
@click.option(
    "--seed", envvar="RIESZFLOW_SEED", type=int, default=0, help="Random seed (default: 0)"
)
@click.option(
    "--out",
    envvar="RIESZFLOW_OUT",
    default=STDOUT,
    help="Output file, '-' for standard output (default: -)",
)
@click.option(
    "--format",
    "output_format",
    envvar="RIESZFLOW_FORMAT",
    type=click.Choice(FORMATS),
    default=None,
    help="Output format (default: csv; json for equilibrium)",
)
@click.option(
    "--threads",
    envvar="RIESZFLOW_THREADS",
    type=click.IntRange(min=0),
    default=0,
    help="Worker threads for pairwise sums, 0 = auto (default: 0)",
)
@click.option("--verbose", is_flag=True, help="Enable verbose logging")
@click.pass_context
def cli(ctx, seed: int, out: str, output_format: Optional[str], threads: int, verbose: bool):
    """rieszflow - Wasserstein flows of Riesz kernel discrepancies."""
    setup_logging(verbose)
    ctx.obj = GlobalOptions(
        seed=seed, out=out, format=output_format, threads=threads, verbose=verbose
    )


# Common options for reuse across commands


def riesz_options(f):
    """Riesz exponent option."""
    f = click.option(
        "--r", "r", type=float, default=1.0, help="Riesz exponent in (0, 2) (default: 1)"
    )(f)
    return f


def local_output_options(f):
    """Per-command --seed and --out, overriding the global options."""
    f = click.option(
        "--seed", "local_seed", type=int, help="Random seed (overrides the global --seed)"
    )(f)
    f = click.option("--out", "local_out", help="Output file (overrides the global --out)")(f)
    return f


def run_options(f):
    """Options shared by the particle runs."""
    f = click.option("--steps", type=int, default=100, help="Euler steps (default: 100)")(f)
    f = click.option(
        "--snapshot-every",
        type=int,
        default=10,
        help="Emit a snapshot every k steps (default: 10)",
    )(f)
    f = click.option(
        "--half-width",
        type=float,
        default=1e-9,
        help="Half-width of the initial cube (default: 1e-9)",
    )(f)
    f = click.option("--tau0", type=float, help="Base step size (default: 1/(10M))")(f)
    f = click.option("--tau-max", type=float, help="Step size cap (default: 10/M)")(f)
    f = click.option(
        "--strict/--no-strict",
        default=True,
        help="Fail when the discrepancy rises beyond the Euler slack (default: strict)",
    )(f)
    f = click.option("--progress", is_flag=True, help="Show a progress bar")(f)
    return f


def _positive(value, name: str):
    if value is not None and value <= 0:
        raise click.BadParameter("must be positive", param_hint=name)


# Subcommand: disc
@cli.command(name="disc")
@click.option("--mu", required=True, help="Point cloud: inline JSON or a .csv/.json file")
@click.option("--nu", required=True, help="Target cloud: inline JSON or a .csv/.json file")
@click.option(
    "--kernel",
    type=click.Choice(["riesz", "wendland"]),
    default="riesz",
    help="Kernel (default: riesz)",
)
@riesz_options
@click.pass_obj
def disc(options: GlobalOptions, mu: str, nu: str, kernel: str, r: float):
    """Discrepancy between two point clouds and its decomposition."""
    mu_measure = read_measure(mu, name="--mu")
    nu_measure = read_measure(nu, dim=mu_measure.dim, name="--nu")
    disc_impl(mu_measure, nu_measure, kernel, r, options)


# Subcommand: equilibrium
@cli.command(name="equilibrium")
@click.option("--d", "d", type=int, required=True, help="Dimension")
@riesz_options
@click.option("--tau", type=float, help="Step size for the proximal scale c_tau")
@click.pass_obj
def equilibrium(options: GlobalOptions, d: int, r: float, tau: Optional[float]):
    """Equilibrium measure eta* of the Riesz interaction energy."""
    if d < 1:
        raise click.BadParameter("must be >= 1", param_hint="--d")
    _positive(tau, "--tau")
    equilibrium_impl(d, r, tau, options)


def _msigma_target(target: str, q: Optional[str], n: int) -> QuantileGrid:
    if target == "dirac":
        return QuantileGrid.dirac(float(parse_vector(q or "0", "--q")[0]), n)
    if target == "uniform":
        return QuantileGrid.uniform(-1.0, 1.0, n)
    return quantile_of_atomic(read_measure(target, dim=1, name="--target"), n)


# Subcommand: flow
@cli.command(name="flow")
@click.option("--kind", type=click.Choice(FLOW_KINDS), required=True, help="Flow curve")
@click.option("--d", "d", type=int, default=1, help="Dimension (default: 1)")
@riesz_options
@click.option("--t0", type=float, default=0.0, help="Delay of the delayed flow")
@click.option("--p", "p", help="Start point, comma-separated (one-particle, composite)")
@click.option("--q", "q", help="Target point, comma-separated")
@click.option("--mu", help="Initial 1D cloud for disc1d (default: delta_{-1})")
@click.option("--n", "n", type=int, default=256, help="Quantile grid size (default: 256)")
@click.option("--w", "w", type=float, default=0.5, help="Right mass of the double well")
@click.option("--t-max", type=float, default=1.0, help="Final time (default: 1)")
@click.option("--samples", type=int, default=11, help="Time samples (default: 11)")
@click.option(
    "--kernel",
    type=click.Choice(["riesz", "wendland"]),
    default="riesz",
    help="Kernel of the msigma flow (default: riesz)",
)
@click.option("--m0", type=float, default=-1.0, help="Initial mean (msigma)")
@click.option("--sigma0", type=float, default=0.0, help="Initial deviation (msigma)")
@click.option("--dt", type=float, default=1e-2, help="Euler step (msigma)")
@click.option(
    "--target",
    "msigma_target",
    default="dirac",
    help="msigma target: dirac (at --q), uniform (on [-1, 1]) or a 1D cloud (default: dirac)",
)
@click.pass_obj
def flow(
    options: GlobalOptions,
    kind: str,
    d: int,
    r: float,
    t0: float,
    p: Optional[str],
    q: Optional[str],
    mu: Optional[str],
    n: int,
    w: float,
    t_max: float,
    samples: int,
    kernel: str,
    m0: float,
    sigma0: float,
    dt: float,
    msigma_target: str,
):
    """Sample an analytic flow curve on a time grid."""
    times = time_grid(t_max, samples)

    if kind == "msigma":
        _positive(dt, "--dt")
        target = _msigma_target(msigma_target, q, n)
        k = Wendland() if kernel == "wendland" else Riesz(r)
        steps = int(round(t_max / dt))
        msigma_impl(MSigmaState(m0, sigma0), k, target, dt, steps, options)
        return

    if kind in ("one-particle", "composite"):
        if not p or not q:
            raise click.UsageError(f"Options --p and --q are required for --kind {kind}")
        p_vec, q_vec = parse_vector(p, "--p"), parse_vector(q, "--q")
        if p_vec.size != q_vec.size:
            raise click.UsageError("--p and --q must have the same dimension")

    if kind == "interaction":
        curve = InteractionFlow(d, r)
    elif kind == "delayed":
        curve = DelayedInteractionFlow(t0, InteractionFlow(d, r))
    elif kind == "one-particle":
        curve = OneParticleFlow(tuple(p_vec), tuple(q_vec), r)
    elif kind == "composite":
        curve = CenteredComposite(p_vec.size, r, tuple(p_vec), tuple(q_vec))
    elif kind == "geodesic":
        curve = GeodesicComparison(d)
    elif kind == "disc1d":
        start = read_measure(mu, dim=1, name="--mu") if mu else DiscreteMeasure.dirac([-1.0])
        target = float(parse_vector(q or "0", "--q")[0])
        curve = Disc1DFlow(quantile_of_atomic(start, n), target)
    else:
        curve = DoubleWellSplit(w)

    flow_impl(curve, times, options)


# Subcommand: mms
@cli.command(name="mms")
@riesz_options
@click.option("--tau", type=float, required=True, help="Step size")
@click.option("--steps", type=int, required=True, help="Number of steps")
@click.option(
    "--emit",
    type=click.Choice(["times", "f-curves"]),
    default="times",
    help="times: n,t_n; f-curves: n,t_n,f_tau,f_limit (default: times)",
)
@click.pass_obj
def mms(options: GlobalOptions, r: float, tau: float, steps: int, emit: str):
    """Minimizing movement scheme for the interaction energy from delta_0."""
    _positive(tau, "--tau")
    if steps < 1:
        raise click.BadParameter("must be >= 1", param_hint="--steps")
    mms_impl(r, tau, steps, emit, options)


# Subcommand: flow1d
@cli.command(name="flow1d")
@click.option("--mu", default="[-1]", help="Initial 1D cloud (default: delta_{-1})")
@click.option("--nu", help="Target 1D cloud; omit for the pure interaction flow")
@click.option("--n", "n", type=int, default=256, help="Quantile grid size (default: 256)")
@click.option("--dt", type=float, default=1e-3, help="Euler step (default: 1e-3)")
@click.option("--steps", type=int, default=1000, help="Euler steps (default: 1000)")
@click.option(
    "--snapshot-every", type=int, default=100, help="Emit every k steps (default: 100)"
)
@click.option("--progress", is_flag=True, help="Show a progress bar")
@click.pass_obj
def flow1d(
    options: GlobalOptions,
    mu: str,
    nu: Optional[str],
    n: int,
    dt: float,
    steps: int,
    snapshot_every: int,
    progress: bool,
):
    """Euler flow of the r=1 discrepancy in quantile space."""
    cfg = Flow1DConfig(
        n=n, dt=dt, steps=steps, snapshot_every=snapshot_every, show_progress=progress
    )
    start = read_measure(mu, dim=1, name="--mu")
    target = read_measure(nu, dim=1, name="--nu") if nu else None
    flow1d_impl(start, target, cfg, options)


# Subcommand: particles
@cli.command(name="particles")
@click.option("--d", "d", type=int, default=2, help="Dimension (default: 2)")
@riesz_options
@click.option("--M", "M", type=int, default=500, help="Particle count (default: 500)")
@click.option("--target", help="Target cloud: inline JSON or file (default: delta_{e1})")
@click.option("--center", help="Initial centre, comma-separated (default: -e1)")
@click.option(
    "--init",
    type=click.Choice(INIT_MODES),
    default="cube",
    help="cube: tiny cube around the centre; direction: steepest descent warm start",
)
@click.option("--energy-out", help="Write the energy trace step,model_time,discrepancy")
@run_options
@local_output_options
@click.pass_obj
def particles(
    options: GlobalOptions,
    d: int,
    r: float,
    M: int,
    target: Optional[str],
    center: Optional[str],
    init: str,
    energy_out: Optional[str],
    steps: int,
    snapshot_every: int,
    half_width: float,
    tau0: Optional[float],
    tau_max: Optional[float],
    strict: bool,
    progress: bool,
    local_seed: Optional[int],
    local_out: Optional[str],
):
    """Euler-forward particle flow of the discrepancy."""
    options = options.override(seed=local_seed, out=local_out)
    if d < 1:
        raise click.BadParameter("must be >= 1", param_hint="--d")
    _positive(tau0, "--tau0")
    _positive(tau_max, "--tau-max")
    if target:
        target_measure = read_measure(target, dim=d, name="--target")
    else:
        target_measure = DiscreteMeasure.dirac([1.0] + [0.0] * (d - 1))
    center_vec = tuple(parse_vector(center, "--center")) if center else None

    cfg = SimConfig(
        M=M,
        d=d,
        r=r,
        target=target_measure,
        steps=steps,
        tau0=tau0,
        tau_max=tau_max,
        center=center_vec,
        half_width=half_width,
        init=init,
        seed=options.seed,
        snapshot_every=snapshot_every,
        strict_energy=strict,
        show_progress=progress,
        workers=options.workers,
    )
    particles_impl(cfg, energy_out, options)


# Subcommand: halftone
@cli.command(name="halftone")
@click.option(
    "--input", "input_path", type=click.Path(exists=True), required=True, help="PGM image"
)
@click.option("--dots", type=int, default=1000, help="Number of dots (default: 1000)")
@click.option("--stride", type=int, default=1, help="Pixel subsampling stride (default: 1)")
@click.option("--svg", "svg_out", help="Write the dots as SVG")
@click.option("--csv", "csv_out", help="Write the dots as CSV (default: --out)")
@click.option("--dot-radius", type=float, default=1.0, help="SVG dot radius (default: 1)")
@click.option(
    "--canvas-height", type=float, default=512.0, help="SVG height in px (default: 512)"
)
@run_options
@local_output_options
@click.pass_obj
def halftone(
    options: GlobalOptions,
    input_path: str,
    dots: int,
    stride: int,
    svg_out: Optional[str],
    csv_out: Optional[str],
    dot_radius: float,
    canvas_height: float,
    steps: int,
    snapshot_every: int,
    half_width: float,
    tau0: Optional[float],
    tau_max: Optional[float],
    strict: bool,
    progress: bool,
    local_seed: Optional[int],
    local_out: Optional[str],
):
    """Stipple a grayscale PGM image."""
    options = options.override(seed=local_seed, out=local_out)
    _positive(tau0, "--tau0")
    _positive(tau_max, "--tau-max")
    cfg = HalftoneConfig(
        image=load_pgm(input_path),
        M=dots,
        steps=steps,
        stride=stride,
        tau0=tau0,
        tau_max=tau_max,
        half_width=half_width,
        seed=options.seed,
        snapshot_every=snapshot_every,
        strict_energy=strict,
        show_progress=progress,
        workers=options.workers,
    )
    halftone_impl(cfg, csv_out, svg_out, dot_radius, canvas_height, options)


def main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI; 0 on success, 1 on usage errors, 2 on runtime errors."""
    args = sys.argv[1:] if argv is None else list(argv)
    if not args:
        with click.Context(cli, info_name="rieszflow") as ctx:
            click.echo(ctx.get_help(), err=True)
        return 1
    try:
        cli.main(args=args, prog_name="rieszflow", standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return 1
    except click.ClickException as e:
        e.show()
        return 2
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except RieszFlowError as e:
        click.echo(f"Error: {e}", err=True)
        return 2
    return 0


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
