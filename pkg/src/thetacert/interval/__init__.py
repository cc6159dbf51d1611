"""Outward-rounded interval arithmetic and high-precision argument reduction."""

from .extended import BudgetError, ExtendedReal, sin_reduced, sincos_ball
from .gaussian import erf_like_tail, erfc_interval
from .interval import (
    LN2,
    LOG_2PI,
    PI,
    Interval,
    IntervalError,
    add,
    cos,
    div,
    exp,
    exp_exact,
    hull_of,
    log,
    mul,
    neg,
    pow_real,
    sin,
    sqrt,
    sub,
)

__all__ = [
    "BudgetError",
    "ExtendedReal",
    "Interval",
    "IntervalError",
    "LN2",
    "LOG_2PI",
    "PI",
    "add",
    "cos",
    "div",
    "erf_like_tail",
    "erfc_interval",
    "exp",
    "exp_exact",
    "hull_of",
    "log",
    "mul",
    "neg",
    "pow_real",
    "sin",
    "sin_reduced",
    "sincos_ball",
    "sqrt",
    "sub",
]
