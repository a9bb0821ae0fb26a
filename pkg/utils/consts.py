PACKAGE_NAME = "recovery-lab"
PACKAGE_VERSION = "0.1.0"

DATA_DIR_ENV_VAR = "RECOVERY_LAB_DATA"
WORKERS_ENV_VAR = "RECOVERY_LAB_WORKERS"

# Initial price of the synthetic experiments
SYNTHETIC_P0 = 0.5

# Regime defaults, keyed by RegimeKind value: (mu, sigma, lambda)
REGIME_FLOW_DEFAULTS = {
    "normal": (0.0, 0.28, 0.3),
    "shock": (-0.237, 0.56, 0.4),
    "negative_sentiment": (0.009, 0.41, 0.2),
    "recovery": (0.17, 0.53, 0.6),
    "post_recovery": (0.051, 0.43, 0.3),
}
NORMAL_LENGTH = 50
RECOVERY_LENGTH = 100
POST_RECOVERY_LENGTH = 100

# Seeds per synthetic sweep scenario
SWEEP_SEED_COUNT = 100
# Seed resamples behind the terminal-price ordering check
ORDER_RESAMPLES = 100

# Held-constant sweep parameters per axis
SWEEP_FIXED_DEFAULTS = {
    "T_S": {"phi": 0.9, "T_N": 50, "lambda_recovery": 0.6},
    "phi": {"T_S": 25, "T_N": 130, "lambda_recovery": 0.6},
    "T_N": {"phi": 0.9, "T_S": 25, "lambda_recovery": 0.6},
    "lambda_recovery": {"phi": 0.9, "T_S": 25, "T_N": 0},
}

# Sifting
SD_THRESHOLD = 0.2
MAX_SIFT_ITERATIONS = 50
# Remainders below this fraction of the input range are treated as residue
RESIDUE_FLOOR = 1e-10

# Hilbert time scale
BOUNDARY_TRIM = 0.05

# Significance test
K_BY_CONFIDENCE = {0.90: 1.645, 0.95: 1.960, 0.99: 2.326}
DEFAULT_CONFIDENCE = 0.99

# p-values below this are reported as a bound
P_VALUE_FLOOR = 1e-300

# Recovery shape heuristics
TROUGH_FRACTION = 0.05
U_DWELL_DAYS = 20
SWOOSH_HORIZON_FACTOR = 2.0
L_RECOVERED_FRACTION = 0.5
U_RECOVERY_LEVEL = 0.9

# Output file names
MANIFEST_FILE_NAME = "manifest.json"
PATH_CSV_FILE_NAME = "simulated_path.csv"
OVERLAY_SVG_FILE_NAME = "overlay.svg"
IMF_CSV_FILE_NAME = "imfs.csv"
IMF_SVG_FILE_NAME = "imfs.svg"
SST_CSV_FILE_NAME = "sst.csv"
SST_SVG_FILE_NAME = "sst.svg"
TIMESCALE_CSV_FILE_NAME = "timescale.csv"
CORRELATION_CSV_FILE_NAME = "correlation.csv"
DOMINANT_SVG_FILE_NAME = "dominant_imf.svg"
SECTOR_FLOWS_CSV_FILE_NAME = "sector_flows.csv"
FLOW_CSV_FILE_NAME = "flows.csv"
SHAPES_CSV_FILE_NAME = "shapes.csv"
REPORT_CSV_FILE_NAME = "report.csv"
