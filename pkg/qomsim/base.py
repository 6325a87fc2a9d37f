import abc
import copy

__author__ = "The QOMSIM developers"
__copyright__ = "Copyright 2026 The QOMSIM developers"
__credits__ = ["The QOMSIM developers"]
__license__ = "MIT"
__version__ = "0.1.0"
__maintainer__ = "The QOMSIM developers"
__email__ = ""
__status__ = "Development"


class Error(Exception):
    """Root of every error raised by qomsim."""
    pass


class ConfigError(Error):
    """Thrown when a run configuration or a command-line input is missing or invalid."""
    pass


class DomainError(Error):
    """Thrown when the inputs of an operation lie outside its domain."""
    pass


class NumericalError(Error):
    """Thrown when a numerical routine fails or produces unphysical output."""
    pass


class WorkFlow:
    __metaclass__ = abc.ABCMeta

    @abc.abstractmethod
    def run(self):
        pass


class Input:
    __metaclass__ = abc.ABCMeta

    @abc.abstractmethod
    def get_parameters(self):
        pass

    @abc.abstractmethod
    def get_output_dir(self):
        pass


OUTPUT_FORMATS = ('csv', 'json')


class RunConfig(Input):
    """
    The main class to hold the inputs of one qomsim run.

    A run is described by a subcommand, a flat map of physical parameters, an output directory, an output format,
    a frequency-grid spec and a seed. Parameters come from a flat `key = value` file; the command-line flags
    override the keys `out`, `format` and `seed`.
    """

    def __init__(self, subcommand, parameters, output_dir='.', output_format='csv', seed=0,
                 grid_min=None, grid_max=None, points_per_decade=200, grid_scale='log'):
        self._subcommand = subcommand
        self._parameters = dict(parameters)
        self._output_dir = output_dir
        self._output_format = output_format
        self._seed = seed
        self._grid_min = grid_min
        self._grid_max = grid_max
        self._points_per_decade = points_per_decade
        self._grid_scale = grid_scale

        if self._output_format not in OUTPUT_FORMATS:
            raise ConfigError("format must be one of %s, got '%s'" % (', '.join(OUTPUT_FORMATS), self._output_format))
        try:
            self._seed = int(self._seed)
        except (TypeError, ValueError):
            raise ConfigError("seed must be an integer, got '%s'" % seed)
        if self._seed < 0:
            raise ConfigError("seed must be nonnegative, got %d" % self._seed)
        if self._grid_scale not in ('log', 'linear'):
            raise ConfigError("grid_scale must be 'log' or 'linear', got '%s'" % self._grid_scale)

    @classmethod
    def from_mapping(cls, subcommand, mapping, output_dir=None, output_format=None, seed=None):
        """
        Build a config from the key map read from a config file; explicit arguments override the file.
        Args:
            subcommand: str, name of the subcommand
            mapping: dict, parsed `key = value` pairs
            output_dir: str, overrides the `out` key
            output_format: str, overrides the `format` key
            seed: int, overrides the `seed` key

        Returns: RunConfig
        """
        parameters = dict(mapping)
        reserved = {}
        for key in ('out', 'format', 'seed', 'grid_min', 'grid_max', 'points_per_decade', 'grid_scale'):
            if key in parameters:
                reserved[key] = parameters.pop(key)
        if output_dir is not None:
            reserved['out'] = output_dir
        if output_format is not None:
            reserved['format'] = output_format
        if seed is not None:
            reserved['seed'] = seed

        return cls(subcommand, parameters,
                   output_dir=str(reserved.get('out', '.')),
                   output_format=str(reserved.get('format', 'csv')),
                   seed=reserved.get('seed', 0),
                   grid_min=reserved.get('grid_min'),
                   grid_max=reserved.get('grid_max'),
                   points_per_decade=reserved.get('points_per_decade', 200),
                   grid_scale=str(reserved.get('grid_scale', 'log')))

    @classmethod
    def from_dict(cls, data):
        "Inverse of to_dict, used to re-read the config echoed in a JSON report"
        return cls(data['subcommand'], data['parameters'], output_dir=data['output_dir'],
                   output_format=data['output_format'], seed=data['seed'], grid_min=data['grid_min'],
                   grid_max=data['grid_max'], points_per_decade=data['points_per_decade'],
                   grid_scale=data['grid_scale'])

    def to_dict(self):
        return {'subcommand': self._subcommand,
                'parameters': copy.deepcopy(self._parameters),
                'output_dir': self._output_dir,
                'output_format': self._output_format,
                'seed': self._seed,
                'grid_min': self._grid_min,
                'grid_max': self._grid_max,
                'points_per_decade': self._points_per_decade,
                'grid_scale': self._grid_scale}

    def get_subcommand(self):
        return self._subcommand

    def get_parameters(self):
        return dict(self._parameters)

    def get_output_dir(self):
        return self._output_dir

    def get_output_format(self):
        return self._output_format

    def get_seed(self):
        return self._seed

    def get_grid(self):
        return self._grid_min, self._grid_max, self._points_per_decade, self._grid_scale

    def require(self, *keys):
        """
        Check that all the given keys are present.
        :return: list of values in the order of the keys
        """
        missing = [key for key in keys if key not in self._parameters]
        if missing:
            raise ConfigError("missing required key(s) for '%s': %s" % (self._subcommand, ', '.join(missing)))
        return [self._parameters[key] for key in keys]

    def get_float(self, key, default=None):
        """
        Return a parameter as a float. Without default, a missing key is a config error.
        """
        if key not in self._parameters:
            if default is None:
                raise ConfigError("missing required key for '%s': %s" % (self._subcommand, key))
            return float(default)
        value = self._parameters[key]
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError("key '%s' must be a number, got '%s'" % (key, value))

    def get_int(self, key, default=None):
        value = self.get_float(key, default)
        if value != int(value):
            raise ConfigError("key '%s' must be an integer, got '%s'" % (key, self._parameters.get(key)))
        return int(value)

    def get_str(self, key, default=None):
        if key not in self._parameters:
            if default is None:
                raise ConfigError("missing required key for '%s': %s" % (self._subcommand, key))
            return default
        return str(self._parameters[key])

    def has(self, key):
        return key in self._parameters

    def get_quantity(self, key, unit, default=None):
        """
        Return a parameter as a float. A value may carry a trailing unit tag, e.g. `mass = 10 kg`; the tag must
        match the unit expected for the key.
        """
        value = self._parameters.get(key)
        if isinstance(value, str):
            parts = value.split(None, 1)
            if len(parts) == 2:
                if parts[1].strip() != unit:
                    raise ConfigError("key '%s' expects unit '%s', got '%s'" % (key, unit, parts[1].strip()))
                try:
                    return float(parts[0])
                except ValueError:
                    raise ConfigError("key '%s' must be a number, got '%s'" % (key, value))
        return self.get_float(key, default)
