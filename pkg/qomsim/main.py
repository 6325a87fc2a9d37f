import sys

from qomsim import cli
from qomsim.base import ConfigError, DomainError, NumericalError

__author__ = "The QOMSIM developers"
__copyright__ = "Copyright 2026 The QOMSIM developers"
__credits__ = ["The QOMSIM developers"]
__license__ = "MIT"
__version__ = "0.1.0"
__maintainer__ = "The QOMSIM developers"
__email__ = ""
__status__ = "Development"

EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3


def main(argv=None):

    parser = cli.parse_command_line()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ConfigError as e:
        sys.stderr.write('qomsim: configuration error: %s\n' % e)
        return EXIT_CONFIG_ERROR
    except (DomainError, NumericalError) as e:
        sys.stderr.write('qomsim: numerical failure: %s\n' % e)
        return EXIT_NUMERICAL_FAILURE
    return 0


if __name__ == '__main__':
    sys.exit(main())
