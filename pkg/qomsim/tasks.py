from qomsim.base import ConfigError, RunConfig
from qomsim.utils import read_config, setup_logging
from qomsim.workflow import WORKFLOWS

__author__ = "The QOMSIM developers"
__copyright__ = "Copyright 2026 The QOMSIM developers"
__credits__ = ["The QOMSIM developers"]
__license__ = "MIT"
__version__ = "0.1.0"
__maintainer__ = "The QOMSIM developers"
__email__ = ""
__status__ = "Development"


def load_config(subcommand, config_file, output_dir=None, output_format=None, seed=None):
    """
    Read a config file and apply the command-line overrides.
    Returns: RunConfig
    """
    if subcommand not in WORKFLOWS:
        raise ConfigError("unknown subcommand '%s'" % subcommand)
    return RunConfig.from_mapping(subcommand, read_config(config_file), output_dir, output_format, seed)


def run_task(subcommand, config_file, output_dir=None, output_format=None, seed=None, verbose=False):
    """
    qomsim core function: run one subcommand from a config file.

    Args:
        subcommand: str, one of spectrum, conditional, trajectory, control, tomography, teleport, mqm
        config_file: str, path to the flat `key = value` config file
        output_dir: str, overrides the `out` key
        output_format: str, 'csv' or 'json', overrides the `format` key
        seed: int, overrides the `seed` key
        verbose: Bool, default is False. DEBUG logging and a progress bar for ensembles.

    Returns: dict, the report written to <out>/<subcommand>_report.json

    """
    setup_logging(verbose)
    print('qomsim %s...' % subcommand)
    config = load_config(subcommand, config_file, output_dir, output_format, seed)
    wf = WORKFLOWS[subcommand](config, verbose=verbose)
    report = wf.run()
    print('Finish...')
    return report


def spectrum(config_file, output_dir=None, output_format=None, seed=None, verbose=False):
    return run_task('spectrum', config_file, output_dir, output_format, seed, verbose)


def conditional(config_file, output_dir=None, output_format=None, seed=None, verbose=False):
    return run_task('conditional', config_file, output_dir, output_format, seed, verbose)


def trajectory(config_file, output_dir=None, output_format=None, seed=None, verbose=False):
    return run_task('trajectory', config_file, output_dir, output_format, seed, verbose)


def control(config_file, output_dir=None, output_format=None, seed=None, verbose=False):
    return run_task('control', config_file, output_dir, output_format, seed, verbose)


def tomography(config_file, output_dir=None, output_format=None, seed=None, verbose=False):
    return run_task('tomography', config_file, output_dir, output_format, seed, verbose)


def teleport(config_file, output_dir=None, output_format=None, seed=None, verbose=False):
    return run_task('teleport', config_file, output_dir, output_format, seed, verbose)


def mqm(config_file, output_dir=None, output_format=None, seed=None, verbose=False):
    return run_task('mqm', config_file, output_dir, output_format, seed, verbose)
