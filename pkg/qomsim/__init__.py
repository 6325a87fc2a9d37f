__author__ = "The QOMSIM developers"
__copyright__ = "Copyright 2026 The QOMSIM developers"
__credits__ = ["The QOMSIM developers"]
__license__ = "MIT"
__version__ = "0.1.0"
__maintainer__ = "The QOMSIM developers"
__email__ = ""
__status__ = "Development"
