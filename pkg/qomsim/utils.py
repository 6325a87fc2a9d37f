import os
import sys
import json
import logging
import math
import numpy as np
from qomsim.base import ConfigError

__author__ = "The QOMSIM developers"
__copyright__ = "Copyright 2026 The QOMSIM developers"
__credits__ = ["The QOMSIM developers"]
__license__ = "MIT"
__version__ = "0.1.0"
__maintainer__ = "The QOMSIM developers"
__email__ = ""
__status__ = "Development"

logger = logging.getLogger(__name__)

DEFAULT_N_THREADS = 4
FLOAT_FORMAT = "%.16e"
## sentinels written in place of infinite values
POS_INF_TAG, NEG_INF_TAG = "+inf", "-inf"


def setup_logging(verbose=False):
    """
    Configure the root logger once for a command-line run.
    Args:
        verbose: Bool, default is False. DEBUG level if True, INFO otherwise.
    """
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(level=level, format='%(asctime)s %(name)s %(levelname)s: %(message)s')
    logging.getLogger().setLevel(level)


def get_n_threads(n_threads=None):
    """
    Number of worker threads for ensembles and sweeps. QOMSIM_THREADS caps the value.
    Args:
        n_threads: int, requested number of threads; None means the default of 4.

    Returns: int
    """
    if n_threads is None:
        n_threads = DEFAULT_N_THREADS
    cap = os.environ.get('QOMSIM_THREADS')
    if cap is not None:
        try:
            cap = int(cap)
        except ValueError:
            raise ConfigError("QOMSIM_THREADS must be an integer, got '%s'" % cap)
        if cap < 1:
            raise ConfigError("QOMSIM_THREADS must be at least 1, got %d" % cap)
        n_threads = min(n_threads, cap)
    return max(1, int(n_threads))


def parse_value(text):
    "Numbers become int or float, anything else stays a string"
    text = text.strip()
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if len(text) >= 2 and text[0] == text[-1] and text[0] in ('"', "'"):
        return text[1:-1]
    return text


def read_config(config_file):
    """
    Read a flat `key = value` config file. Everything after '#' on a line is a comment.
    Args:
        config_file: str, path to the config file

    Returns: dict
    """
    if not os.path.isfile(config_file):
        raise ConfigError("config file does not exist: %s" % config_file)
    mapping = {}
    with open(config_file, 'r') as f:
        for number, raw in enumerate(f, start=1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ConfigError("%s:%d: expected 'key = value', got '%s'" % (config_file, number, raw.rstrip()))
            key, value = line.split('=', 1)
            key = key.strip()
            if not key:
                raise ConfigError("%s:%d: empty key" % (config_file, number))
            if key in mapping:
                raise ConfigError("%s:%d: duplicated key '%s'" % (config_file, number, key))
            mapping[key] = parse_value(value)
    return mapping


def frequency_grid(grid_min, grid_max, points_per_decade=200, scale='log'):
    """
    Frequency grid in rad/s, logarithmic by default.
    Args:
        grid_min: float, lowest frequency
        grid_max: float, highest frequency
        points_per_decade: int, density of the grid; for a linear grid, the number of points per decade of the
            ratio grid_max/grid_min, at least 2 points in total
        scale: str, 'log' or 'linear'

    Returns: np.ndarray
    """
    if grid_min is None or grid_max is None:
        raise ConfigError("grid_min and grid_max are required")
    grid_min = float(grid_min)
    grid_max = float(grid_max)
    if not (grid_min > 0 and grid_max > grid_min):
        raise ConfigError("empty frequency grid: need 0 < grid_min < grid_max, got [%g, %g]" % (grid_min, grid_max))
    if int(points_per_decade) < 1:
        raise ConfigError("points_per_decade must be positive, got %s" % points_per_decade)
    n_points = int(np.ceil(np.log10(grid_max / grid_min) * int(points_per_decade))) + 1
    n_points = max(n_points, 2)
    if scale == 'log':
        return np.logspace(np.log10(grid_min), np.log10(grid_max), n_points)
    return np.linspace(grid_min, grid_max, n_points)


def ensure_dir(path):
    if path and not os.path.exists(path):
        os.makedirs(path)


def format_float(value):
    "Cell text of a float in the project CSV dialect; infinities become the tagged sentinels"
    if np.isnan(value):
        return ''
    if np.isinf(value):
        return POS_INF_TAG if value > 0 else NEG_INF_TAG
    return FLOAT_FORMAT % value


def write_csv(df, output_file):
    """
    Write a table with the project CSV dialect: comma separated, header, LF endings, 17 significant digits and
    infinities as the '+inf'/'-inf' sentinels.
    """
    ensure_dir(os.path.dirname(output_file))
    df = df.copy()
    for column in df.columns:
        values = df[column]
        if values.dtype.kind == 'f' and np.isinf(values.values).any():
            df[column] = [format_float(v) for v in values.values]
    df.to_csv(output_file, index=False, sep=',', float_format=FLOAT_FORMAT, lineterminator='\n', encoding='utf-8')


def to_builtin(value):
    "Convert numpy scalars and arrays so that json can serialize them; infinities become tagged strings"
    if isinstance(value, dict):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return POS_INF_TAG if value > 0 else NEG_INF_TAG
        return value
    if isinstance(value, complex):
        return {'real': to_builtin(value.real), 'imag': to_builtin(value.imag)}
    return value


def from_builtin(value):
    "Inverse of the sentinel tagging of to_builtin"
    if isinstance(value, dict):
        return {k: from_builtin(v) for k, v in value.items()}
    if isinstance(value, list):
        return [from_builtin(v) for v in value]
    if value == POS_INF_TAG:
        return math.inf
    if value == NEG_INF_TAG:
        return -math.inf
    return value


def write_json(report, output_file):
    ensure_dir(os.path.dirname(output_file))
    with open(output_file, 'w', newline='\n') as f:
        json.dump(to_builtin(report), f, indent=2, sort_keys=True, allow_nan=False)
        f.write('\n')


def read_json(input_file):
    with open(input_file, 'r') as f:
        return from_builtin(json.load(f))


def time_bar(i, num):
    sys.stdout.write('\r')
    progress = (i + 1) * 1.0 / num
    prog_int = int(progress * 50)
    sys.stdout.write('\t\t[%s%s] %.2f%%' % ('=' * prog_int, ' ' * (50 - prog_int), progress * 100))
    if i + 1 == num:
        sys.stdout.write('\n')
    sys.stdout.flush()
