import json

import pytest
from click.testing import CliRunner

from novikov_cli.core import verification
from novikov_cli.novikov_cli import novikov
from novikov_cli.service.exporters import CONTOUR_CSV_COLUMNS, read_grid


@pytest.fixture
def runner():
    return CliRunner(mix_stderr=False)


def _json(result) -> dict:
    assert result.exit_code == 0, result.output + result.stderr
    return json.loads(result.stdout)


def test_angles(runner):
    payload = _json(runner.invoke(novikov, ['angles', '--max-m', '3',
                                            '--json']))
    assert payload['status'] == 'SUCCESS'
    assert [item['tan'] for item in payload['items']] == \
        ['5/12', '3/4', '4/3']


def test_angles_cli_view(runner):
    result = runner.invoke(novikov, ['angles', '--max-m', '3'])
    assert result.exit_code == 0
    assert result.stdout.startswith('Magic angles')


def test_approx_in_degrees(runner):
    payload = _json(runner.invoke(novikov, [
        'approx', '--alpha', '45', '--degrees', '--count', '3', '--json']))
    assert [item['m'] for item in payload['items']] == [2, 5, 12]


def test_periods(runner):
    payload = _json(runner.invoke(novikov, [
        'periods', '--m', '2', '--n', '1', '--json']))
    result = payload['result']
    assert result['angle']['tan'] == '3/4'
    assert result['periods']['minimal'] is True
    assert result['symmetric_shifts']['with_symmetry_centers'] is True
    assert [item['vector'] for item in payload['items']] == ['b1', 'b2']


def test_validation_error_exit_code(runner):
    result = runner.invoke(novikov, ['angles', '--max-m', '1'])
    assert result.exit_code == 1
    error = json.loads(result.stderr)
    assert error['code'] == 1
    assert error['status'] == 'FAILED'


def test_invalid_magic_pair(runner):
    result = runner.invoke(novikov, ['periods', '--m', '2', '--n', '2'])
    assert result.exit_code == 1


def test_exclusive_angle_sources(runner):
    result = runner.invoke(novikov, [
        'critical', '--alpha', '0.3', '--m', '2', '--n', '1'])
    assert result.exit_code == 1


def test_sample_writes_grid_and_heatmap(runner, tmp_path):
    out, ppm = tmp_path / 'g.bin', tmp_path / 'g.ppm'
    payload = _json(runner.invoke(novikov, [
        'sample', '--m', '2', '--n', '1', '--nx', '16', '--out', str(out),
        '--ppm', str(ppm), '--json']))
    assert payload['result']['periodic'] is True
    grid = read_grid(out)
    assert (grid.nx, grid.ny) == (16, 16)
    assert ppm.read_bytes().startswith(b'P6')


def test_trace_writes_contours(runner, tmp_path):
    out = tmp_path / 'lines.csv'
    payload = _json(runner.invoke(novikov, [
        'trace', '--m', '2', '--n', '1', '--nx', '32', '--level', '0.5',
        '--out', str(out), '--json']))
    assert payload['items']
    header = out.read_text().splitlines()[0]
    assert header == ','.join(CONTOUR_CSV_COLUMNS)


def test_config_file_supplies_defaults(runner, tmp_path):
    config = tmp_path / 'cfg.yaml'
    config.write_text('max-m: 3\nnx: 32\n')
    payload = _json(runner.invoke(novikov, [
        '--config', str(config), 'angles', '--json']))
    assert len(payload['items']) == 3


def test_verify_diameters(runner, tmp_path):
    result = runner.invoke(novikov, [
        'verify', 'diameters', '--delta-c', '0.5', '--nx', '32',
        '--out', str(tmp_path), '--json'])
    payload = _json(result)
    assert payload['result']['pass'] is True
    assert (tmp_path / 'report.json').exists()
    assert (tmp_path / 'summary.csv').exists()
    assert (tmp_path / 'net_0.svg').exists()


def _failed_report(result) -> dict:
    assert result.exit_code == 2, result.output + result.stderr
    assert json.loads(result.stderr)['code'] == 2
    payload = json.loads(result.stdout)
    assert payload['status'] == 'FAILED'
    assert payload['result']['pass'] is False
    return payload


def test_same_config_gives_identical_output(runner, tmp_path):
    config = tmp_path / 'run.yaml'
    config.write_text('family: random\nseed: 7\nm: 2\nn: 1\nnx: 32\n'
                      'a: [0.3, 0.1]\n')
    args = ['--config', str(config), 'critical', '--json']
    first = runner.invoke(novikov, args)
    second = runner.invoke(novikov, args)
    assert first.exit_code == 0, first.output + first.stderr
    assert first.stdout == second.stdout


def test_critical(runner):
    payload = _json(runner.invoke(novikov, [
        'critical', '--m', '2', '--n', '1', '--nx', '64', '--json']))
    result = payload['result']
    assert result['c_hat_1'] <= result['c_hat_2']
    assert result['resolution'] == [64, 64]
    assert payload['items'][0]['tol'] == result['tol']


def test_net_writes_contours_and_drawing(runner, tmp_path):
    out, svg = tmp_path / 'net.csv', tmp_path / 'net.svg'
    payload = _json(runner.invoke(novikov, [
        'net', '--m', '2', '--n', '1', '--nx', '64', '--out', str(out),
        '--svg', str(svg), '--json']))
    item, = payload['items']
    assert item['polylines'] > 0
    assert out.read_text().splitlines()[0] == ','.join(CONTOUR_CSV_COLUMNS)
    assert svg.exists()


def test_net_of_shifted_superposition_is_refused(runner):
    result = runner.invoke(novikov, [
        'net', '--m', '2', '--n', '1', '--a', '0.4', '0.1', '--nx', '16'])
    assert result.exit_code == 1


def test_classify(runner):
    payload = _json(runner.invoke(novikov, [
        'classify', '--alpha', '0.3', '--level', '0.0', '--size', '10',
        '--size', '20', '--samples-per-length', '4', '--json']))
    assert [item['size'] for item in payload['items']] == [10.0, 20.0]
    assert {item['situation'] for item in payload['items']} <= \
        {'A_MINUS', 'A_PLUS', 'OPEN', 'UNDETERMINED'}


def test_sweep_writes_csv(runner, tmp_path):
    out = tmp_path / 'c0.csv'
    payload = _json(runner.invoke(novikov, [
        'sweep', '--max-m', '3', '--nx', '48', '--out', str(out),
        '--json']))
    assert [(item['m'], item['n']) for item in payload['items']] == \
        [(3, 2), (2, 1), (3, 1)]
    assert len(out.read_text().splitlines()) == 4


def test_verify_widths(runner, tmp_path):
    payload = _json(runner.invoke(novikov, [
        'verify', 'widths', '--m', '2', '--n', '1', '--shifts', '2',
        '--nx', '48', '--out', str(tmp_path), '--json']))
    assert payload['result']['pass'] is True
    assert len(payload['items']) == 2
    assert (tmp_path / 'summary.csv').exists()


def test_verify_widths_violation_exits_with_two(runner, monkeypatch):
    monkeypatch.setattr(verification, 'width_bound', lambda *args: -100.0)
    _failed_report(runner.invoke(novikov, [
        'verify', 'widths', '--m', '2', '--n', '1', '--shifts', '2',
        '--nx', '48', '--json']))


def test_verify_convergence(runner):
    payload = _json(runner.invoke(novikov, [
        'verify', 'convergence', '--alpha', '45', '--degrees', '--depth',
        '2', '--nx', '48', '--json']))
    assert payload['result']['pass'] is True
    assert [item['pass'] for item in payload['items']] == [True, True]


def test_verify_convergence_violation_exits_with_two(runner, monkeypatch):
    monkeypatch.setattr(verification, 'magic_delta', lambda *args: 10.0)
    payload = _failed_report(runner.invoke(novikov, [
        'verify', 'convergence', '--alpha', '45', '--degrees', '--depth',
        '2', '--nx', '48', '--json']))
    assert payload['result']['widths_decreasing'] is False


def test_verify_incommensurate(runner):
    payload = _json(runner.invoke(novikov, [
        'verify', 'incommensurate', '--alpha', '0.3', '--T-prime',
        '3.8832220774509327', '--s-max', '1', '--nx', '48', '--json']))
    entry, = payload['result']['approximants']
    assert entry['checks'] == {'periodic': True,
                               'residual_within_bound': True}


def test_verify_incommensurate_violation_exits_with_two(runner,
                                                        monkeypatch):
    monkeypatch.setattr(verification, 'APPROXIMANT_PERIODICITY_TOL', -1.0)
    payload = _failed_report(runner.invoke(novikov, [
        'verify', 'incommensurate', '--alpha', '0.3', '--T-prime',
        '3.8832220774509327', '--s-max', '1', '--nx', '48', '--json']))
    entry, = payload['result']['approximants']
    assert entry['checks']['periodic'] is False
