import argparse

__author__ = "The QOMSIM developers"
__copyright__ = "Copyright 2026 The QOMSIM developers"
__credits__ = ["The QOMSIM developers"]
__license__ = "MIT"
__version__ = "0.1.0"
__maintainer__ = "The QOMSIM developers"
__email__ = ""
__status__ = "Development"


def _run(task, args):
    return task(args.config, args.out, args.format, args.seed, args.verbose)


def spectrum_func(args):
    """
    The default function to compute a noise budget.
    Args:
        args: args from parser

    Returns:

    """
    from qomsim.tasks import spectrum
    return _run(spectrum, args)


def conditional_func(args):
    """
    The default function to compute a conditional state.
    Args:
        args: args from parser

    Returns:

    """
    from qomsim.tasks import conditional
    return _run(conditional, args)


def trajectory_func(args):
    """
    The default function to simulate an ensemble of conditional trajectories.
    Args:
        args: args from parser

    Returns:

    """
    from qomsim.tasks import trajectory
    return _run(trajectory, args)


def control_func(args):
    from qomsim.tasks import control
    return _run(control, args)


def tomography_func(args):
    from qomsim.tasks import tomography
    return _run(tomography, args)


def teleport_func(args):
    from qomsim.tasks import teleport
    return _run(teleport, args)


def mqm_func(args):
    from qomsim.tasks import mqm
    return _run(mqm, args)


## subcommand, help, dispatcher
SUBCOMMANDS = (
    ('spectrum', 'Noise budget of a tuned interferometer or of a position measurement with classical noise.',
     spectrum_func),
    ('conditional', 'Conditional state, purity and effective occupation of a continuously measured test mass.',
     conditional_func),
    ('trajectory', 'Monte-Carlo ensemble of conditional trajectories and their measurement records.',
     trajectory_func),
    ('control', 'Feedback cooling, critical temperature and radiation-pressure damping.', control_func),
    ('tomography', 'State verification: tomography error, steering and breathing experiments.', tomography_func),
    ('teleport', 'Teleportation between two oscillators and two-mirror entanglement.', teleport_func),
    ('mqm', 'Gravity decoherence and Schrodinger-Newton observables.', mqm_func),
)


def _add_common_arguments(parser):
    parser.add_argument(
        '--config',
        help='Path to the flat `key = value` config file of the run.',
        required=True
    )

    parser.add_argument(
        '--out',
        help='Output directory, overrides the `out` key. Default is the current directory.',
        default=None
    )

    parser.add_argument(
        '--format',
        help='Output format of the curves, overrides the `format` key. Default is csv.',
        choices=['csv', 'json'], default=None
    )

    parser.add_argument(
        '--seed',
        help='Seed of the Wiener source, overrides the `seed` key. Default is 0.',
        type=int, default=None
    )

    parser.add_argument(
        '-v', '--verbose',
        help='Increase output verbosity',
        default=False, action="store_true"
    )


def parse_command_line():
    """
    Definition for the commandline parser
    Returns:

    """

    parser = argparse.ArgumentParser(
        prog='qomsim',
        description='Quantum measurement and control of mechanical test masses: noise budgets, conditional states, '
                    'trajectories, feedback cooling, verification and macroscopic quantum tests.')

    subparser = parser.add_subparsers(
        title='''Task to perform per needs:''',
        description='''What kind of task do you want to use with qomsim?
            (spectrum, conditional, trajectory, control, tomography, teleport, mqm).''',
        dest='task',
        help='''****** Tasks proposed by qomsim ******''')

    subparser.required = True

    for name, help_text, func in SUBCOMMANDS:
        task_parser = subparser.add_parser(name, help=help_text)
        _add_common_arguments(task_parser)
        task_parser.set_defaults(func=func)

    return parser
