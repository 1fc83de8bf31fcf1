import math
from functools import wraps
from pathlib import Path

import click

from novikov_cli.core.grid import Window
from novikov_cli.core.lattice_angles import (
    approximate_angle, enumerate_magic_angles, equivalence_lattice,
    superposition_periods,
)
from novikov_cli.core.levelsets import (
    classify_growing_window, critical_interval, extract_contours, sample,
    singular_net,
)
from novikov_cli.core.verification import (
    verify_diameter_bound, verify_incommensurate, verify_interval_width,
    verify_theorem_convergence,
)
from novikov_cli.service.config import (
    COSINE_FAMILY, RANDOM_FAMILY, RunConfig, build_default_map,
    load_config_file,
)
from novikov_cli.service.decorators import (
    CommandResponse, ResponseDecorator, view_options,
)
from novikov_cli.service.exporters import (
    dumps_json, render_svg, write_contours_csv, write_grid, write_json,
    write_ppm, write_rows_csv,
)
from novikov_cli.utils.logger import get_logger
from novikov_cli.utils.runner import run_ordered
from novikov_cli.utils.variables import DEFAULT_MAX_ORDER_SUM, ENV_JOBS
from novikov_cli.version import __version__

_LOG = get_logger(__name__)

VERIFICATION_FAILED_CODE = 2


def _load_config(ctx: click.Context, param, value):
    if value:
        _LOG.debug(f'Loading flag defaults from {value}')
        ctx.default_map = build_default_map(ctx.command,
                                            load_config_file(value))
    return value


@click.group()
@click.version_option(__version__)
@click.option('--config', type=click.Path(dir_okay=False),
              callback=_load_config, is_eager=True, expose_value=False,
              help='JSON or YAML file with default values of the flags')
def novikov():
    """Level-line topology of superposed periodic potentials"""


# -- shared options ---------------------------------------------------------

def _stack(*decorators):
    def apply(func):
        for decorator in reversed(decorators):
            func = decorator(func)
        return func
    return apply


symmetry_option = click.option(
    '--symmetry', type=click.Choice(['3', '4', '6']), default='4',
    show_default=True, help='Rotation symmetry order of the lattices')

angle_options = _stack(
    click.option('--alpha', type=float, help='Rotation angle (radians)'),
    click.option('--degrees', is_flag=True,
                 help='Read --alpha in degrees'),
    click.option('--m', 'm', type=int, help='Magic angle index m'),
    click.option('--n', 'n', type=int, help='Magic angle index n'),
    click.option('--negative', is_flag=True,
                 help='Negative series of order 3 magic angles'),
)

potential_options = _stack(
    symmetry_option,
    click.option('--T', 'T', type=float, default=2 * math.pi,
                 show_default=True, help='Period of the first layer'),
    click.option('--T-prime', 'T_prime', type=float,
                 help='Period of the second layer (default: T)'),
    click.option('--family', type=click.Choice([COSINE_FAMILY,
                                                RANDOM_FAMILY]),
                 default=COSINE_FAMILY, show_default=True),
    click.option('--seed', type=int, default=0, show_default=True),
    click.option('--cutoff', type=int, default=2, show_default=True,
                 help='Harmonic cutoff of random potentials'),
    click.option('--potential', type=click.Path(exists=True,
                                                dir_okay=False),
                 help='JSON document of a potential or superposition'),
    click.option('--kind', type=click.Choice(['linear', 'pointwise']),
                 default='linear', show_default=True),
    click.option('--q', 'q', type=(int, int, float), multiple=True,
                 help='Monomial i j c of Q for pointwise composition'),
    click.option('--a', 'a', type=(float, float), default=(0.0, 0.0),
                 show_default=True, help='Shift of the second layer'),
    click.option('--lambda', 'lam', type=float, default=1.0,
                 show_default=True, help='Stretch of the second layer'),
)

grid_options = _stack(
    click.option('--nx', type=int, help='Samples along the first axis'),
    click.option('--ny', type=int, help='Samples along the second axis'),
    click.option('--tol', type=float, help='Bisection tolerance'),
    click.option('--jobs', type=int, default=1, envvar=ENV_JOBS,
                 show_default=True, help='Parallel workers'),
)


def _periods(config: RunConfig):
    return superposition_periods(config.magic_angle(), config.T)


def _window(config: RunConfig):
    """(window, periodic): superposition periods or a square window"""
    if config.window:
        return Window.square(config.center, config.window), False
    periods = _periods(config)
    return Window.from_vectors(periods.b1, periods.b2), True


window_options = _stack(
    click.option('--window', type=float,
                 help='Side of a square aperiodic window'),
    click.option('--center', type=(float, float), default=(0.0, 0.0),
                 show_default=True),
)


def _sampled(config: RunConfig):
    window, periodic = _window(config)
    nx = config.nx or 128
    return sample(config.superposition(), window, nx, config.ny or nx,
                  periodic, config.jobs)


def command_response(name: str):
    """Builds RunConfig from the command parameters"""
    def decorator(func):
        @wraps(func)
        def wrapper(**kwargs):
            config = RunConfig.from_params(name, **kwargs)
            return func(config)
        return wrapper
    return decorator


# -- lattice arithmetic -----------------------------------------------------

@novikov.command()
@symmetry_option
@click.option('--max-m', type=int, required=True)
@view_options
@ResponseDecorator(click.echo)
@command_response('angles')
def angles(config: RunConfig) -> CommandResponse:
    """Enumerates magic angles with m <= max-m"""
    found = enumerate_magic_angles(config.symmetry, config.extra['max_m'])
    items = [a.to_dict() for a in found]
    return CommandResponse(items=items, table_title='Magic angles')


@novikov.command()
@symmetry_option
@click.option('--alpha', type=float, required=True)
@click.option('--degrees', is_flag=True)
@click.option('--count', type=int, default=3, show_default=True)
@view_options
@ResponseDecorator(click.echo)
@command_response('approx')
def approx(config: RunConfig) -> CommandResponse:
    """Magic angles approximating a generic angle"""
    found = approximate_angle(config.angle(), config.symmetry,
                              config.extra['count'])
    items = [{**a.to_dict(), 'error': a.angle_radians - config.angle()}
             for a in found]
    return CommandResponse(items=items, table_title='Approximants')


@novikov.command()
@symmetry_option
@click.option('--m', 'm', type=int, required=True)
@click.option('--n', 'n', type=int, required=True)
@click.option('--negative', is_flag=True)
@click.option('--T', 'T', type=float, default=2 * math.pi, show_default=True)
@click.option('--formula', is_flag=True,
              help='Keep the unreduced formula pair')
@view_options
@ResponseDecorator(click.echo)
@command_response('periods')
def periods(config: RunConfig) -> CommandResponse:
    """Periods and shift-equivalence lattices at a magic angle"""
    angle = config.magic_angle()
    pair = superposition_periods(angle, config.T,
                                 minimal=not config.extra['formula'])
    result = {
        'angle': angle.to_dict(),
        'periods': pair.to_dict(),
        'equivalence': equivalence_lattice(angle, config.T).to_dict(),
        'symmetric_shifts': equivalence_lattice(
            angle, config.T, with_symmetry_centers=True).to_dict(),
    }
    items = [{'vector': name, 'x': float(v[0]), 'y': float(v[1])}
             for name, v in (('b1', pair.b1), ('b2', pair.b2))]
    return CommandResponse(result=result, items=items,
                           table_title='Superposition periods')


# -- grids and contours -----------------------------------------------------

@novikov.command('sample')
@potential_options
@angle_options
@grid_options
@window_options
@click.option('--out', type=click.Path(dir_okay=False), required=True,
              help='NVGRID01 output file')
@click.option('--ppm', type=click.Path(dir_okay=False),
              help='Optional PPM heatmap')
@view_options
@ResponseDecorator(click.echo)
@command_response('sample')
def sample_command(config: RunConfig) -> CommandResponse:
    """Samples the superposition on its periods or a square window"""
    grid = _sampled(config)
    write_grid(grid, config.out)
    if config.extra.get('ppm'):
        write_ppm(grid, config.extra['ppm'])
    return CommandResponse(result={
        'nx': grid.nx, 'ny': grid.ny, 'periodic': grid.periodic,
        'min': grid.min, 'max': grid.max, 'out': config.out,
    }, message=f'Grid {grid.nx}x{grid.ny} written to {config.out}')


@novikov.command()
@potential_options
@angle_options
@grid_options
@window_options
@click.option('--level', type=float, required=True)
@click.option('--out', type=click.Path(dir_okay=False),
              help='Contour CSV output')
@click.option('--svg', type=click.Path(dir_okay=False))
@view_options
@ResponseDecorator(click.echo)
@command_response('trace')
def trace(config: RunConfig) -> CommandResponse:
    """Level lines at one level"""
    grid = _sampled(config)
    level = config.extra['level']
    lines = extract_contours(grid, level)
    if config.out:
        write_contours_csv(lines, config.out)
    if config.extra.get('svg'):
        render_svg(grid, level, lines, config.extra['svg'])
    items = [{'polyline_id': i, 'vertices': len(p.vertices),
              'closed': p.closed,
              'winding': list(p.winding) if p.winding else None}
             for i, p in enumerate(lines)]
    return CommandResponse(items=items, table_title=f'Level lines at {level}',
                           message=None if items else 'No level lines')


# -- critical levels --------------------------------------------------------

@novikov.command()
@potential_options
@angle_options
@grid_options
@view_options
@ResponseDecorator(click.echo)
@command_response('critical')
def critical(config: RunConfig) -> CommandResponse:
    """Interval of levels carrying open level lines at a magic angle"""
    report = critical_interval(config.superposition(), _periods(config),
                               config.nx, config.ny, config.tol, config.jobs)
    return CommandResponse(result=report.to_dict(), items=[{
        'c_hat_1': report.c_hat_1, 'c_hat_2': report.c_hat_2,
        'tol': report.tol, 'degenerate': report.degenerate,
    }], table_title='Critical interval')


@novikov.command()
@potential_options
@angle_options
@grid_options
@click.option('--out', type=click.Path(dir_okay=False),
              help='Contour CSV of the net')
@click.option('--svg', type=click.Path(dir_okay=False))
@view_options
@ResponseDecorator(click.echo)
@command_response('net')
def net(config: RunConfig) -> CommandResponse:
    """Singular net of a symmetric superposition"""
    result = singular_net(config.superposition(), _periods(config),
                          config.nx, config.ny, config.tol, config.jobs)
    if config.out:
        write_contours_csv(result.net, config.out)
    if config.extra.get('svg'):
        render_svg(result.grid, result.c0, result.net, config.extra['svg'],
                   title=f'c0 = {result.c0:.6g}')
    return CommandResponse(result=result.to_dict(), items=[{
        'c0': result.c0, 'polylines': len(result.net),
        'degenerate': result.report.degenerate,
    }], table_title='Singular net')


@novikov.command()
@potential_options
@angle_options
@click.option('--center', type=(float, float), default=(0.0, 0.0),
              show_default=True)
@click.option('--size', 'sizes', type=float, multiple=True, required=True,
              help='Window sides, repeatable')
@click.option('--samples-per-length', type=float, default=8.0,
              show_default=True)
@click.option('--level', type=float, required=True)
@click.option('--jobs', type=int, default=1, envvar=ENV_JOBS)
@view_options
@ResponseDecorator(click.echo)
@command_response('classify')
def classify(config: RunConfig) -> CommandResponse:
    """Situation at one level on growing aperiodic windows"""
    found = classify_growing_window(
        config.superposition(), config.center, config.extra['sizes'],
        config.extra['samples_per_length'], config.extra['level'],
        config.jobs)
    items = [{'size': size, 'situation': s.value} for size, s in found]
    return CommandResponse(items=items, table_title='Window situations')


# -- verification -----------------------------------------------------------

@novikov.group()
def verify():
    """Checks of the interval, diameter and convergence bounds"""


def _verification_response(report, title: str, items: list,
                           out: str | None) -> CommandResponse:
    payload = report.to_dict()
    if out:
        folder = Path(out)
        write_json(payload, folder / 'report.json')
        write_rows_csv(items, folder / 'summary.csv')
        nets = []
        if getattr(report, 'net', None) is not None:
            nets.append(report.net)
        for entry in getattr(report, 'entries', ()):
            if entry.net is not None:
                nets.append(entry.net)
        for index, found in enumerate(nets):
            render_svg(found.grid, found.c0, found.net,
                       folder / f'net_{index}.svg',
                       title=f'c0 = {found.c0:.6g}')
    code = 0 if report.passed else VERIFICATION_FAILED_CODE
    return CommandResponse(
        code=code, result=payload, items=items, table_title=title,
        message=None if report.passed else f'{title}: bound violated')


@verify.command()
@potential_options
@click.option('--m', 'm', type=int, required=True)
@click.option('--n', 'n', type=int, required=True)
@click.option('--negative', is_flag=True)
@click.option('--shifts', type=int, default=20, show_default=True)
@grid_options
@click.option('--out', type=click.Path(file_okay=False))
@view_options
@ResponseDecorator(click.echo)
@command_response('verify widths')
def widths(config: RunConfig) -> CommandResponse:
    """Interval widths over random shifts at a magic angle"""
    report = verify_interval_width(
        config.build_family(), config.magic_angle(), config.extra['shifts'],
        config.nx, config.tol, config.seed, config.jobs)
    items = [{'a_x': s.a[0], 'a_y': s.a[1], 'c_hat_1': s.c_hat_1,
              'c_hat_2': s.c_hat_2, 'width': s.width}
             for s in report.samples]
    return _verification_response(report, 'Interval widths', items,
                                  config.out)


@verify.command()
@potential_options
@angle_options
@click.option('--delta-c', 'delta_cs', type=float, multiple=True,
              required=True, help='Level offset from c0, repeatable')
@click.option('--periods', 'n_periods', type=int, default=2,
              show_default=True, help='Periods per side of the patch')
@grid_options
@click.option('--out', type=click.Path(file_okay=False))
@view_options
@ResponseDecorator(click.echo)
@command_response('verify diameters')
def diameters(config: RunConfig) -> CommandResponse:
    """Component diameters near the singular net"""
    if config.has_magic_angle:
        potential = config.superposition()
        periods = _periods(config)
    else:
        potential = config.build_family().v1
        periods = None
    report = verify_diameter_bound(
        potential, config.extra['delta_cs'], periods, config.nx,
        config.extra['n_periods'], config.tol, config.jobs)
    items = [r.to_dict() for r in report.rows]
    return _verification_response(report, 'Diameter bound', items,
                                  config.out)


@verify.command()
@potential_options
@click.option('--alpha', type=float, required=True)
@click.option('--degrees', is_flag=True)
@click.option('--depth', type=int, default=3, show_default=True)
@click.option('--max-order-sum', type=int, default=DEFAULT_MAX_ORDER_SUM,
              show_default=True)
@grid_options
@click.option('--out', type=click.Path(file_okay=False))
@view_options
@ResponseDecorator(click.echo)
@command_response('verify convergence')
def convergence(config: RunConfig) -> CommandResponse:
    """Brackets around c0 along rational approximations of an angle"""
    report = verify_theorem_convergence(
        config.build_family(), config.angle(), config.extra['depth'],
        nx=config.nx, tol=config.tol,
        max_order_sum=config.extra['max_order_sum'], jobs=config.jobs)
    return _verification_response(report, 'Convergence',
                                  _entry_rows(report), config.out)


@verify.command()
@potential_options
@click.option('--alpha', type=float, required=True)
@click.option('--degrees', is_flag=True)
@click.option('--s-max', type=int, default=3, show_default=True)
@grid_options
@click.option('--out', type=click.Path(file_okay=False))
@view_options
@ResponseDecorator(click.echo)
@command_response('verify incommensurate')
def incommensurate(config: RunConfig) -> CommandResponse:
    """Brackets along periodic approximants of incommensurate periods"""
    report = verify_incommensurate(
        config.build_family(), config.angle(), config.extra['s_max'],
        lam=config.lam, nx=config.nx, tol=config.tol, jobs=config.jobs)
    return _verification_response(report, 'Incommensurate convergence',
                                  _entry_rows(report), config.out)


def _entry_rows(report) -> list[dict]:
    return [{'approximant': dumps_json(e.approximant).replace('\n', ''),
             'c0': e.c0, 'lower': e.lower, 'upper': e.upper,
             'width': e.width, 'pass': e.passed} for e in report.entries]


# -- sweep ------------------------------------------------------------------

@novikov.command()
@potential_options
@click.option('--max-m', type=int, required=True)
@click.option('--max-order-sum', type=int, default=DEFAULT_MAX_ORDER_SUM,
              show_default=True)
@grid_options
@click.option('--out', type=click.Path(dir_okay=False), help='CSV output')
@view_options
@ResponseDecorator(click.echo)
@command_response('sweep')
def sweep(config: RunConfig) -> CommandResponse:
    """c0 of the symmetric superposition at every magic angle"""
    family = config.build_family()
    cap = config.extra['max_order_sum']
    found = [a for a in enumerate_magic_angles(config.symmetry,
                                               config.extra['max_m'])
             if a.order_sum <= cap]

    def measure(angle) -> dict:
        result = singular_net(family.at(angle.angle_radians),
                              superposition_periods(angle, config.T),
                              config.nx, config.ny, config.tol)
        return {'m': angle.m, 'n': angle.n, 'sign': angle.sign,
                'alpha': angle.angle_radians, 'c0': result.c0,
                'width': result.report.width,
                'nx': result.report.resolution[0]}

    rows = run_ordered(measure, found, config.jobs)
    if config.out:
        write_rows_csv(rows, config.out)
    return CommandResponse(items=rows, table_title='c0 sweep')
