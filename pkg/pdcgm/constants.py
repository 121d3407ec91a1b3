"""Application constants"""

# Application Info
APP_NAME = "pdcgm"
APP_VERSION = "0.1.0"

# Relative gap floor used by every gap formula: (ub - lb) / (GAP_FLOOR + |ub|)
GAP_FLOOR = 1e-10

# Restricted master
ARTIFICIAL_COST = 1e6
# MCNF artificial of commodity k costs this factor times d_k times the total arc cost, plus one
PATH_ARTIFICIAL_FACTOR = 1e3
ARTIFICIAL_TOLERANCE = 1e-7
DUPLICATE_TOLERANCE = 1e-12

# Interior point defaults
DEFAULT_GAMMA = 0.1
DEFAULT_IPM_MAX_ITER = 200
STEP_FACTOR = 0.99995
FEASIBILITY_TOLERANCE = 1e-9
MAX_CENTERING_STEPS = 60

# Column generation defaults
DEFAULT_EPS_MAX = 0.5
DEFAULT_MAX_OUTER = 1000
STANDARD_EPS = 1e-8

# Simplex
BLAND_AFTER_DEGENERATE = 50
PIVOT_TOLERANCE = 1e-9

# Multicommodity flow active set
ACTIVE_SET_GAMMA = 0.9
CAPACITY_TOLERANCE = 1e-7

# CSV trace
TRACE_HEADER = ("iter", "ub", "lb", "gap", "eps", "zsp", "cols_added", "rmp_s", "oracle_s")
TRACE_DIGITS = 12

# CLI exit codes
EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_NUMERICAL = 3
EXIT_USAGE = 64
