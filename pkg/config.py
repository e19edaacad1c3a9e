#!/usr/bin/env python3
"""
Gabor Duality Lab Configuration
===============================

Central configuration for tolerances, desk-scale limits, construction
settings and logging. Environment variables (or a local .env file) can
override the runtime knobs:

    GDL_THREADS     cap on BLAS/OpenMP threads
    GDL_LOG_LEVEL   DEBUG | INFO | WARNING | ERROR
    GDL_LOG_DIR     directory for gdl.log (file logging is off when unset)

This module must stay free of numpy imports so that apply_thread_limit()
can run before any linear algebra library is loaded.
"""

import logging
import os
import pathlib
import sys

from dotenv import load_dotenv

load_dotenv()

# =============================================================================
# NUMERIC TOLERANCES
# =============================================================================

TOLERANCE_CONFIG = {
    'phase': 1e-9,                  # |c_s - 1| cut-off (only used for float inputs)
    'frame_relative': 1e-9,         # frame/Riesz holds iff lambda_min > tol * lambda_max
    'identity': 1e-10,              # exact-in-theory identities (Moyal, Weil, FIGA)
    'wexler_raz': 1e-9,             # dual-pair verdict, scaled by max(1, s)
    'duality_relative': 1e-8,       # frame vs Riesz bound agreement, scaled by max(1, B)
    'bessel_relative': 1e-9,        # Bessel bound agreement across Lambda / adjoint
    'module_norm': 1e-9,            # module-norm discrepancy that triggers a warning
    'gram_schmidt': 1e-12,          # relative residual norm treated as dependent
    'orthonormal': 1e-9,            # seed orthonormality check
    'idempotent': 1e-9,             # dual pairs give idempotent block operators
}

# =============================================================================
# DESK SCALE
# =============================================================================

DESK_SCALE = {
    'max_operator_dim': 4096,       # |G| * d (frame) and |Lambda| * n (Gram)
    'max_weight_denominator': 10**12,
    'lattice_cache_size': 32,       # cocycle tables kept for recently used lattices
}

# =============================================================================
# FRAME CONSTRUCTION
# =============================================================================

CONSTRUCTION_CONFIG = {
    'criterion_mode': 'criterion',  # 'criterion' (sufficient bound) or 'spectral'
    'search_trials': 8,             # random draws per window count
    'search_extra_windows': 4,      # window counts tried beyond ceil(d * s)
    'gaussian_tail': 1e-15,         # periodization truncation (relative)
}

# =============================================================================
# INPUT / OUTPUT
# =============================================================================

IO_CONFIG = {
    'tool_version': '1.0.0',
    'float_digits': 17,
    'default_seed': 0,
}

# =============================================================================
# LOGGING / RUNTIME
# =============================================================================

LOG_FORMAT = '%(asctime)s | %(levelname)-8s | %(name)-20s | %(message)s'
LOG_DATEFMT = '%Y-%m-%d %H:%M:%S'

PATHS = {
    'logs_dir': os.getenv('GDL_LOG_DIR', ''),
}

THREAD_ENV_VARS = (
    'OMP_NUM_THREADS',
    'OPENBLAS_NUM_THREADS',
    'MKL_NUM_THREADS',
    'NUMEXPR_NUM_THREADS',
)


def get_tolerance(name):
    """Look up a tolerance by name."""
    try:
        return TOLERANCE_CONFIG[name]
    except KeyError:
        raise KeyError(f"Unknown tolerance '{name}'") from None


def get_thread_limit():
    """GDL_THREADS as a positive int, or None when unset/invalid."""
    raw = os.getenv('GDL_THREADS', '').strip()
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        return None
    return value if value > 0 else None


def apply_thread_limit():
    """Export GDL_THREADS to the BLAS/OpenMP variables. Call before importing numpy."""
    limit = get_thread_limit()
    if limit is None:
        return None
    for var in THREAD_ENV_VARS:
        os.environ[var] = str(limit)
    return limit


def get_log_level(default=logging.INFO):
    """Resolve GDL_LOG_LEVEL to a logging level."""
    name = os.getenv('GDL_LOG_LEVEL', '').strip().upper()
    if not name:
        return default
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else default


def setup_logging(level=None, log_dir=None):
    """
    Setup logging for the command-line tool: console on stderr, plus a
    DEBUG file handler when a log directory is configured.

    Args:
        level: Console logging level (defaults to GDL_LOG_LEVEL or INFO)
        log_dir: Directory for gdl.log (defaults to GDL_LOG_DIR)

    Returns:
        The root logger
    """
    level = get_log_level() if level is None else level
    log_dir = PATHS['logs_dir'] if log_dir is None else log_dir

    root = logging.getLogger()
    root.setLevel(logging.DEBUG if log_dir else level)

    # Prevent duplicate handlers
    if root.hasHandlers():
        root.handlers.clear()

    formatter = logging.Formatter(fmt=LOG_FORMAT, datefmt=LOG_DATEFMT)

    # stdout carries JSON results only
    console = logging.StreamHandler(sys.stderr)
    console.setLevel(level)
    console.setFormatter(formatter)
    root.addHandler(console)

    if log_dir:
        log_path = pathlib.Path(log_dir)
        log_path.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_path / 'gdl.log')
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)

    return root


def print_config():
    """Print current configuration."""
    print("=" * 60)
    print("GABOR DUALITY LAB CONFIGURATION")
    print("=" * 60)
    for name, value in TOLERANCE_CONFIG.items():
        print(f"Tolerance {name:<18} {value:g}")
    print(f"Max operator dim: {DESK_SCALE['max_operator_dim']}")
    print(f"Criterion mode: {CONSTRUCTION_CONFIG['criterion_mode']}")
    print(f"Thread limit: {get_thread_limit() or 'unlimited'}")
    print(f"Log dir: {PATHS['logs_dir'] or '(console only)'}")
    print("=" * 60)


if __name__ == "__main__":
    print_config()
