"""
Configuration constants for the investor-inertia price model.
"""

APP_VERSION = "1.0.0"

# Seed used whenever a command is run without --seed
DEFAULT_SEED = 20200101

# Daily data: one step is one trading day
TIME_STEP_DAYS = 1.0

# Real and simulated series are normalised to this starting value
NORMALIZED_START = 100.0

# Price CSV schema
CSV_SCHEMA = {
    'date_column': 'date',
    'price_column': 'close',
    'date_format': None,
}

# Exact lattice evolution
LATTICE_CONFIG = {
    'dx': 1.0,
    'dt': 1.0,
    'max_cells': 5_000_000,
}

# Finite-difference and spectral solvers
PDE_CONFIG = {
    'domain_sigmas': 12.0,
    'boundary_band': 10,
    'boundary_mass_tol': 1e-8,
    'stability_limit': 0.5,
    'advection_limit': 1.0,
    'taper_start': 0.5,
    'n_snapshots': 11,
}

# Moment calibration of the retention model
CALIBRATION_CONFIG = {
    'max_iter': 4000,
    'tolerance': 1e-10,
    'n_starts': 8,
    'pin_k2': True,
    'xatol': 1e-10,
    'fatol': 1e-20,
    'logit_range': 3.0,
    'log_k4_range': 5.0,
}

# Price path simulation
SIMULATION_CONFIG = {
    's0': NORMALIZED_START,
    'n_paths': 5,
    'n_steps': 250,
    'block_size': 4096,
    'n_jobs': 1,
}

# Stream tags keep the models' random draws independent under one seed
STREAM_TAGS = {
    'lattice': 1,
    'gaussian': 2,
    't_proxy': 3,
    't_sample': 4,
    'calibration': 5,
}

# Fit report and plotting tables
DIAGNOSTICS_CONFIG = {
    'min_report_size': 30,
    'min_qq_size': 10,
    'plotting_offset': 0.5,
    'min_auto_bins': 10,
}

# Synthetic fixture used by the end-to-end tests
FIXTURE_CONFIG = {
    'start_date': '2020-01-02',
    'n_days': 750,
    'df': 6.0,
    'daily_variance': 4e-4,
    'drift': 5e-4,
    'seed': 7,
}

# CLI exit-code contract
EXIT_CODES = {
    'ok': 0,
    'io': 2,
    'data': 3,
    'numerical': 4,
}

OUTPUT_DIR_ENV = 'INERTIA_OUTPUT_DIR'
DEFAULT_OUTPUT_DIR = 'output'
