"""Verification of theta(x) < x by a segmented prime sieve with a resumable ledger."""

from .ledger import (
    AggregateReport,
    CheckpointMismatch,
    GlobalLedger,
    LedgerError,
    Tiling,
    Verdict,
    aggregate,
    checkpoint_crosscheck,
    emit_walk,
    read_pi_checkpoints,
    resume,
    run,
    write_pi_checkpoints,
    write_walk_csv,
)
from .primes import count_primes, find_preceding_prime, is_prime, primes_in
from .segment import Segment, SegmentError, SegmentResult, SegmentTooLargeError, certified_logs, sieve_segment

__all__ = [
    "AggregateReport", "CheckpointMismatch", "GlobalLedger", "LedgerError", "Segment", "SegmentError",
    "SegmentResult", "SegmentTooLargeError", "Tiling", "Verdict", "aggregate", "certified_logs",
    "checkpoint_crosscheck", "count_primes", "emit_walk", "find_preceding_prime", "is_prime",
    "primes_in", "read_pi_checkpoints", "resume", "run", "sieve_segment", "write_pi_checkpoints",
    "write_walk_csv",
]
