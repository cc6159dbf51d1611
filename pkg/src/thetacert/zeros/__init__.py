"""Certified ordinates of nontrivial zeta zeros: files, computation, checks."""

from .compute import AccuracyError, CompletenessError, compute_zeros, find_count_height
from .table import (
    TableMeta,
    ValidationReport,
    ZeroMismatchError,
    ZeroTable,
    ZeroTableError,
    load_zeros,
    save_zeros,
    validate_against,
)
from .zeta import hardy_z, theta_ball, zeta_ball

__all__ = [
    "AccuracyError",
    "CompletenessError",
    "TableMeta",
    "ValidationReport",
    "ZeroMismatchError",
    "ZeroTable",
    "ZeroTableError",
    "compute_zeros",
    "find_count_height",
    "hardy_z",
    "load_zeros",
    "save_zeros",
    "theta_ball",
    "validate_against",
    "zeta_ball",
]
