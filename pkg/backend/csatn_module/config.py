"""
Configuration module for the CSATN uplink analysis toolkit
Contains all constants, numerical tolerances, and default values
"""

import math
import os
from typing import Dict, List, Any

# ============================ OUTPUT & LOGGING CONFIG ============================

# Output directory for CSVs, plot scripts and run logs
SAVE_DIR = os.environ.get("CSATN_SAVE_DIR", "./result_save")

# Tagged console logging ("[analytic] ...", "[mc] ...")
VERBOSE = os.environ.get("CSATN_VERBOSE", "1").strip().lower() not in ("0", "false", "no", "off")

# ============================ DEFAULT SCENARIO ============================

# All values in SI units: meters, watts, m^-2, linear gains, radians
DEFAULT_SCENARIO: Dict[str, Any] = {
    "h_a": 50.0,               # 0.05 km
    "d_0": 4.0e5,              # 400 km
    "r_u": 9500.0,             # 9.5 km
    "r_a": 500.0,              # 0.5 km, = d_min / 2
    "d_min": 1000.0,           # 1 km
    "p_t": 100.0,              # 20 dBW
    "p_a": 100.0,              # 20 dBW
    "p_m": 100.0,              # target AN, swept in the A-S figures
    "g_t_main": 10.0,          # 10 dB
    "g_t_side": 0.1,           # -10 dB
    "g_r": 1.0,                # not tabulated; cancels in the interference-limited SINR
    "theta": math.pi / 6,      # placeholder, no documented default
    "lambda_t": 1.0e-4,
    "lambda_1": 5.0e-7,
    "n_ta": 3,
    "sr": {"c": 0.158, "q": 1.0, "omega": 0.1},
    "alpha_1": 2.0,
    "alpha_2": 2.0,
    "k_rate": 1.0,
    "noise_t": 0.0,
    "noise_a": 0.0,
}

# Relative tolerance used when checking r_a == d_min / 2
ASSOCIATION_RTOL = 1e-9

# ============================ NUMERICAL TOLERANCES ============================

QUAD_ABS_TOL = 1e-8
QUAD_REL_TOL = 1e-6
QUAD_LIMIT = 200           # max subintervals for adaptive quadrature
GAUSS_ORDER = 48           # Gauss-Legendre nodes per inner panel

SERIES_REL_TOL = 1e-12
SERIES_MAX_TERMS = 400
HYP1F1_MAX_TERMS = 2000

# Log-space binomial sums stop once terms fall this far below the running max
BINOMIAL_LOG_CUTOFF = math.log(1e-15)

# Rate integrals: stop extending t once the coverage integrand drops below this
RATE_TAIL_TOL = 1e-6
RATE_T_STEP = 2.0          # bits; upper limit grows in steps of this size
RATE_T_CEILING = 200.0
LAYER_CAKE_POINTS = 513   # odd, for the Simpson check of the rate integrals

# Relative excess of the analytic T-A rate over simulation when N_TA > 1.
# The Alzer CDF bound is exact only at N_TA = 1.
TA_RATE_ALZER_EXCESS = 0.15

# Coverage/Laplace values may leave [0, 1] by at most this before clamping
CLAMP_SLACK = 1e-6

# ============================ MONTE CARLO CONFIG ============================

DEFAULT_RUNS = 50000
DEFAULT_SEED = 20240917
DEFAULT_WORKERS = 1
RESAMPLE_BUDGET = 10000    # attempts per realization condition
CI_Z = 1.96
RUN_CHUNK = 2000           # runs per worker task

USER_MODELS = ("palm", "conditioned")

# ============================ SWEEP & CLI CONFIG ============================

DEFAULT_TH1_GRID_DB: List[float] = [-10.0, -5.0, 0.0, 5.0, 10.0]
DEFAULT_TH2_GRID_DB: List[float] = [-30.0, -25.0, -20.0, -15.0, -10.0, -5.0, 0.0]
DEFAULT_TH2_DB = -20.0     # default A-S threshold
DEFAULT_PM_GRID_DBW: List[float] = [10.0, 15.0, 20.0, 25.0, 30.0]
DEFAULT_RA_GRID_M: List[float] = [300.0, 400.0, 500.0, 600.0, 700.0]

THRESHOLD_SEARCH_RANGE_DB = (-80.0, 40.0)
THRESHOLD_SEARCH_TOL_DB = 0.01

CSV_COLUMNS: List[str] = [
    "swept_value", "threshold_db", "link", "method", "value", "ci_halfwidth",
    "runs", "seed", "config_hash", "metric", "swept_param", "x_param", "x_value", "zero_term",
]

# Sweep presets: legend parameter, its values, the x-axis and what is measured.
# Legend values for parameters without a documented default are placeholders (placeholder=True).
SWEEP_PRESETS: Dict[str, Dict[str, Any]] = {
    "fig3": {"swept": "h_a", "values": [30.0, 50.0, 80.0], "x": "threshold", "links": ["TA"],
             "metric": "coverage", "placeholder": True},
    "fig4": {"swept": "lambda_t", "values": [5e-5, 1e-4, 2e-4], "x": "threshold", "links": ["TA"],
             "metric": "coverage", "placeholder": True},
    "fig5": {"swept": "r_a", "values": [400.0, 500.0, 600.0], "x": "threshold", "links": ["TA"],
             "metric": "coverage", "placeholder": True},
    "fig6": {"swept": "r_u", "values": [8500.0, 9500.0, 10500.0], "x": "threshold", "links": ["TA"],
             "metric": "coverage", "placeholder": True},
    "fig7": {"swept": "lambda_t", "values": [5e-5, 1e-4, 2e-4], "x": "r_a", "x_values": DEFAULT_RA_GRID_M,
             "links": ["TA"], "metric": "rate", "placeholder": True},
    "fig8": {"swept": "h_a", "values": [30.0, 50.0, 80.0], "x": "r_a", "x_values": DEFAULT_RA_GRID_M,
             "links": ["TA"], "metric": "rate", "placeholder": True},
    "fig9": {"swept": "p_m", "values": [10.0, 100.0, 1000.0], "x": "threshold", "links": ["AS"],
             "metric": "coverage", "placeholder": True},
    "fig10": {"swept": "r_c", "values": [9000.0, 10000.0, 11000.0], "x": "p_m", "x_values_dbw": DEFAULT_PM_GRID_DBW,
              "links": ["AS"], "metric": "coverage", "placeholder": True},
    "fig11": {"swept": "gains", "values": [(10.0, -10.0), (0.0, 0.0), (5.0, -5.0)], "x": "p_m",
              "x_values_dbw": DEFAULT_PM_GRID_DBW, "links": ["AS"], "metric": "coverage", "placeholder": True},
    "fig12": {"swept": "d_min", "values": [800.0, 1000.0, 1200.0], "x": "p_m", "x_values_dbw": DEFAULT_PM_GRID_DBW,
              "links": ["AS"], "metric": "coverage", "placeholder": True},
    "fig13": {"swept": "lambda_1", "values": [2.5e-7, 5e-7, 1e-6], "x": "p_m", "x_values_dbw": DEFAULT_PM_GRID_DBW,
              "links": ["AS"], "metric": "coverage", "placeholder": True},
    "fig14": {"swept": "r_c", "values": [9000.0, 10000.0, 11000.0], "x": "p_m", "x_values_dbw": DEFAULT_PM_GRID_DBW,
              "links": ["AS"], "metric": "rate", "placeholder": True},
    "fig15": {"swept": "lambda_1", "values": [2.5e-7, 5e-7, 1e-6], "x": "p_m", "x_values_dbw": DEFAULT_PM_GRID_DBW,
              "links": ["AS"], "metric": "rate", "placeholder": True},
}

# Swept names that are not plain ScenarioConfig fields
DERIVED_SWEEP_PARAMS = ("r_c", "gains")
