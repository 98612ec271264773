"""Averaged Sato-Tate workbench: Frobenius traces over boxes of curves,
Kronecker class numbers and the arithmetic constants around them."""

from .curves import CurveParams, TraceResult, trace, trace_bsgs, trace_naive
from .errors import (
    CapacityError,
    ConsistencyError,
    DomainError,
    IntegrityError,
    RangeError,
    ReductionError,
    StavgError,
)
from .intervals import IntervalSpec
from .numthy import PrimeTable, sieve_primes
from .quadforms import ClassNumberTable, h_table, kronecker_class_number
from .satotate import BoxSpec, ExperimentReport, f_measure, main_term

__version__ = "0.1.0"
