TOOL_CONFIGURATION_FOLDER = '.novikov_cli'
LOG_FILE_NAME = 'novikov_cli.log'

ENV_LOG_PATH = 'NOVIKOV_CLI_LOG_PATH'
ENV_LOG_LEVEL = 'NOVIKOV_CLI_LOG_LEVEL'
ENV_CLI_DEBUG = 'NOVIKOV_CLI_DEBUG'
ENV_JOBS = 'NOVIKOV_JOBS'

# bumped whenever a JSON payload changes shape
SCHEMA_VERSION = 1

# Numerics
DEFAULT_SAMPLES_PER_WAVELENGTH = 48
DEFAULT_TOL_FRACTION = 1e-4
MAX_BISECTION_STEPS = 60
MAX_REFINEMENTS = 2
MIN_GRID_SIZE = 8
PERIODICITY_PROBES = 32
PERIODICITY_TOL = 1e-8
APPROXIMANT_PERIODICITY_TOL = 1e-9
SYMMETRY_PROBES = 64
SYMMETRY_TOL = 1e-9
MAGIC_ANGLE_TOL = 1e-12
NOT_DEGENERATE_FACTOR = 10
DEFAULT_MAX_ORDER_SUM = 200
MAX_DIRICHLET_Q = 200
IRRATIONALITY_MAX_DENOMINATOR = 10 ** 5
IRRATIONALITY_TOL = 1e-12
CF_PRECISION_DIGITS = 60

# Grid binary format
GRID_MAGIC = b'NVGRID01'

# SVG
SVG_HASH_SALT = 'novikov-cli'
