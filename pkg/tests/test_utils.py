import json
import math

import numpy as np
import pandas as pd
import pytest

from qomsim.base import ConfigError
from qomsim.core import MechanicalParams
from qomsim.spectra import sql_displacement
from qomsim.utils import (NEG_INF_TAG, POS_INF_TAG, frequency_grid, get_n_threads, parse_value, read_config, read_json,
                          to_builtin, write_csv, write_json)


def write_lines(path, *lines):
    path.write_text('\n'.join(lines) + '\n')
    return str(path)


@pytest.mark.parametrize('text, value', [('3', 3), (' 2.5 ', 2.5), ('1e3', 1000.), ('"tuned"', 'tuned'),
                                         ("'a b'", 'a b'), ('10 kg', '10 kg'), ('classical', 'classical')])
def test_parse_value(text, value):
    parsed = parse_value(text)
    assert parsed == value
    assert type(parsed) is type(value)


def test_read_config(tmp_path):
    config_file = write_lines(tmp_path / 'run.cfg',
                              '# noise budget of a 10 kg mirror',
                              'mass = 10 kg',
                              '',
                              'omega_q=30   # rad/s',
                              'mode = "classical"')
    assert read_config(config_file) == {'mass': '10 kg', 'omega_q': 30, 'mode': 'classical'}


@pytest.mark.parametrize('lines', [('mass 10',), ('= 3',), ('mass = 1', 'mass = 2')])
def test_read_config_rejects_malformed_lines(tmp_path, lines):
    with pytest.raises(ConfigError):
        read_config(write_lines(tmp_path / 'bad.cfg', *lines))


def test_read_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        read_config(str(tmp_path / 'absent.cfg'))


def test_thread_cap(monkeypatch):
    monkeypatch.delenv('QOMSIM_THREADS', raising=False)
    assert get_n_threads() == 4
    assert get_n_threads(7) == 7
    assert get_n_threads(0) == 1
    monkeypatch.setenv('QOMSIM_THREADS', '2')
    assert get_n_threads() == 2
    assert get_n_threads(1) == 1
    monkeypatch.setenv('QOMSIM_THREADS', 'many')
    with pytest.raises(ConfigError):
        get_n_threads()
    monkeypatch.setenv('QOMSIM_THREADS', '0')
    with pytest.raises(ConfigError):
        get_n_threads()


def test_log_frequency_grid():
    omega = frequency_grid(1., 100., 200)
    assert omega.size == 401
    assert omega[0] == pytest.approx(1.) and omega[-1] == pytest.approx(100.)
    np.testing.assert_allclose(np.diff(np.log10(omega)), 1. / 200)


def test_linear_frequency_grid():
    omega = frequency_grid(10., 11., 1, scale='linear')
    assert omega.size == 2
    np.testing.assert_allclose(omega, [10., 11.])
    assert frequency_grid(1., 10., 4, scale='linear').size == 5


@pytest.mark.parametrize('grid', [(None, 10.), (1., None), (0., 10.), (10., 10.), (10., 1.), (1., 10., 0)])
def test_invalid_frequency_grid(grid):
    with pytest.raises(ConfigError):
        frequency_grid(*grid)


def test_csv_keeps_full_precision(tmp_path):
    frame = pd.DataFrame({'omega': [1. / 3, 2.], 'total': [np.pi, 1e-40]})
    output_file = str(tmp_path / 'curves' / 'budget.csv')
    write_csv(frame, output_file)
    with open(output_file, 'rb') as f:
        content = f.read()
    assert content.startswith(b'omega,total\n')
    assert b'\r' not in content
    np.testing.assert_array_equal(pd.read_csv(output_file, float_precision='round_trip').values, frame.values)


def test_json_report(tmp_path):
    report = {'n': np.int64(3), 'ratio': np.float64(0.25), 'ok': np.bool_(True), 'curve': np.arange(3.),
              'pair': (1, 2.), 'omega_q': math.inf, 'root': 1 + 2j}
    output_file = str(tmp_path / 'report.json')
    write_json(report, output_file)
    loaded = read_json(output_file)
    assert loaded == {'n': 3, 'ratio': 0.25, 'ok': True, 'curve': [0., 1., 2.], 'pair': [1, 2.],
                      'omega_q': math.inf, 'root': {'real': 1., 'imag': 2.}}
    with open(output_file) as f:
        assert f.read().endswith('}\n')


def test_to_builtin_stringifies_keys():
    assert to_builtin({1: np.float32(0.5)}) == {'1': 0.5}


def test_resonant_sql_round_trips_as_a_sentinel(tmp_path):
    mech = MechanicalParams(2., omega_m=3.)
    sql = sql_displacement(mech, [3., 6.])
    frame = pd.DataFrame({'omega_rad_s': [3., 6.], 'sql': sql})
    csv_file = str(tmp_path / 'sql.csv')
    write_csv(frame, csv_file)
    with open(csv_file) as f:
        rows = f.read().splitlines()
    assert rows[1] == '3.0000000000000000e+00,+inf'
    loaded = pd.read_csv(csv_file, float_precision='round_trip')
    assert loaded['sql'].dtype.kind == 'f'
    assert np.isinf(loaded['sql'][0]) and loaded['sql'][1] == sql[1]

    json_file = str(tmp_path / 'sql.json')
    write_json({'sql': sql, 'floor': -math.inf}, json_file)
    with open(json_file) as f:
        text = f.read()
    assert 'Infinity' not in text
    strict = json.loads(text, parse_constant=lambda token: pytest.fail('non-standard token %s' % token))
    assert strict['sql'][0] == POS_INF_TAG and strict['floor'] == NEG_INF_TAG
    report = read_json(json_file)
    assert report['sql'] == [math.inf, sql[1]] and report['floor'] == -math.inf


def test_non_finite_values_are_tagged():
    assert to_builtin([math.nan, math.inf, -math.inf, 1.5]) == [None, POS_INF_TAG, NEG_INF_TAG, 1.5]
