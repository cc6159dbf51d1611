"""Per-segment sums of log p and the deficit walk x - theta(x) sampled at primes."""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..interval import Interval, log
from ..interval.interval import fraction_to_float
from .primes import WINDOW, is_prime, primes_in

U = 2.0 ** -53
# primes below this get an individually certified log
_DIRECT_BELOW = 1 << 12
# each block spans 2**-8 of its octave, so |p/c - 1| <= 2**-9
_BLOCK_BITS = 8
_POLY_DEGREE = 9
_SLACK = 1.0 + 2.0 ** -20
# base primes up to sqrt(x_hi) must fit in this many bytes
MEMORY_BUDGET = 1 << 30

RECORD = struct.Struct("<QQQddddQQQ")
RECORD_SIZE = RECORD.size + 8


class SegmentError(ValueError):
    pass


class SegmentTooLargeError(SegmentError):
    pass


@dataclass(frozen=True)
class Segment:
    x_lo: int
    x_hi: int
    index: int

    def __post_init__(self):
        if not (0 <= self.x_lo < self.x_hi):
            raise SegmentError(f"segment needs 0 <= x_lo < x_hi, got [{self.x_lo}, {self.x_hi})")


@dataclass(frozen=True)
class SegmentResult:
    index: int
    x_lo: int
    x_hi: int
    theta_sum: Interval
    delta_min: Interval
    prime_count: int
    first_prime: int
    last_prime: int

    def payload(self) -> bytes:
        return RECORD.pack(self.index, self.x_lo, self.x_hi, self.theta_sum.lo, self.theta_sum.hi,
                           self.delta_min.lo, self.delta_min.hi, self.prime_count,
                           self.first_prime, self.last_prime)

    @property
    def checksum(self) -> int:
        return zlib.crc32(self.payload())

    def to_bytes(self) -> bytes:
        return self.payload() + struct.pack("<Q", self.checksum)

    @classmethod
    def from_bytes(cls, raw: bytes) -> SegmentResult:
        """Decode a record; raises SegmentError on a checksum mismatch."""
        if len(raw) != RECORD_SIZE:
            raise SegmentError("short record")
        body, (ck,) = raw[:RECORD.size], struct.unpack("<Q", raw[RECORD.size:])
        if zlib.crc32(body) != ck:
            raise SegmentError("checksum mismatch")
        i, lo, hi, tl, th, dl, dh, n, fp, lp = RECORD.unpack(body)
        return cls(i, lo, hi, Interval(tl, th), Interval(dl, dh), n, fp, lp)


# -- certified logs in bulk ------------------------------------------------------------


_LOG1P = np.array([(-1.0) ** (k + 1) / k for k in range(_POLY_DEGREE, 0, -1)])


def _log1p_poly(x: np.ndarray) -> np.ndarray:
    acc = np.full_like(x, _LOG1P[0])
    for c in _LOG1P[1:]:
        acc = acc * x + c
    return acc * x


@dataclass(frozen=True)
class LogBatch:
    values: np.ndarray
    # sum over the batch of the per-value error bounds
    error_sum: float


def certified_logs(ps: np.ndarray) -> LogBatch:
    """Float approximations of log p with a certified bound on their total error.

    Each p is written as c (1 + x) with c the centre of a short block of its
    octave, log c is taken from interval arithmetic and log1p(x) from a
    truncated series.  The bound per value is

        rad(log c) + |x|^(n+1)/((n+1)(1-|x|)) + 2n u |x| + u |value|

    covering the centre log, the series truncation, Horner rounding and the
    final addition.
    """
    n = len(ps)
    out = np.empty(n, dtype=np.float64)
    err = 0.0
    small = ps < _DIRECT_BELOW
    if small.any():
        for i in np.flatnonzero(small):
            iv = log(Interval(int(ps[i])))
            out[i] = iv.mid
            err += iv.width
    big = ~small
    if big.any():
        pb = ps[big]
        # exponent of the leading bit, exact for the integer inputs
        e = np.frexp(pb.astype(np.float64))[1].astype(np.int64)
        e = np.where(pb >= (np.int64(1) << (e - 1).clip(0, 62)), e, e - 1)
        shift = e - 1 - _BLOCK_BITS
        block = pb >> shift
        key = block * 64 + shift
        uniq, inv = np.unique(key, return_inverse=True)
        centres = []
        c_mid = np.empty(len(uniq))
        c_rad = np.empty(len(uniq))
        for j, k in enumerate(uniq.tolist()):
            b, s = divmod(k, 64)
            c = (b << s) + (1 << (s - 1))
            iv = log(Interval(c))
            c_mid[j] = iv.mid
            c_rad[j] = iv.width
            centres.append(c)
        c_arr = np.array(centres, dtype=np.int64)[inv]
        x = (pb - c_arr).astype(np.float64) / c_arr.astype(np.float64)
        val = c_mid[inv] + _log1p_poly(x)
        out[big] = val
        xm = float(np.max(np.abs(x)))
        trunc = xm ** (_POLY_DEGREE + 1) / ((_POLY_DEGREE + 1) * (1 - xm))
        per = c_rad[inv] + (2 * _POLY_DEGREE * U) * np.abs(x) + U * np.abs(val)
        err += float(np.sum(per)) + trunc * len(pb) + U * len(pb)
    return LogBatch(out, err * _SLACK)


# -- one segment ---------------------------------------------------------------------


def _check_preceding(x_lo: int, pp: int) -> None:
    if pp == 0:
        if primes_in(0, x_lo).size:
            raise SegmentError(f"preceding prime 0 given but primes exist below {x_lo}")
        return
    if pp >= x_lo or not is_prime(pp):
        raise SegmentError(f"{pp} is not a prime below {x_lo}")
    if primes_in(pp + 1, x_lo).size:
        raise SegmentError(f"{pp} is not the largest prime below {x_lo}")


def sieve_segment(seg: Segment, preceding_prime: int, window: int = WINDOW,
                  check_preceding: bool = True) -> SegmentResult:
    """Sum log p over primes in [x_lo, x_hi) and track the minimum of the deficit walk.

    With p_0 the preceding prime (or the anchor 1 when there is none), the
    walk is Delta_i = (p_i - p_0) - sum_{k<=i} log p_k, the change of
    x - theta(x) from p_0 to p_i.  delta_min = min(0, min_i Delta_i).
    """
    if base_prime_memory(seg.x_hi) > MEMORY_BUDGET:
        raise SegmentTooLargeError(f"base primes to sqrt({seg.x_hi}) exceed the memory budget")
    if seg.x_hi - max(preceding_prime, 1) >= 1 << 53:
        raise SegmentTooLargeError("segment spans more than 2^53 integers")
    if check_preceding:
        _check_preceding(seg.x_lo, preceding_prime)
    anchor = preceding_prime if preceding_prime > 0 else 1
    T_hat = []
    T_err = 0.0
    walk_err = 0.0
    carry = 0.0
    d_min = math.inf
    d_abs = 0.0
    count = 0
    first = last = 0
    start = seg.x_lo
    while start < seg.x_hi:
        stop = min(seg.x_hi, start + window)
        ps = primes_in(start, stop)
        start = stop
        if not ps.size:
            continue
        if count == 0:
            first = int(ps[0])
        last = int(ps[-1])
        count += len(ps)
        batch = certified_logs(ps)
        T_hat.append(math.fsum(batch.values))
        T_err += batch.error_sum
        s = np.cumsum(batch.values) + carry
        carry = float(s[-1])
        d = (ps - anchor).astype(np.float64) - s
        d_min = min(d_min, float(d.min()))
        # prefix errors: value errors plus cumsum and carry roundings
        walk_err += batch.error_sum + 2 * U * float(np.sum(s))
        d_abs = max(d_abs, float(np.max(np.abs(d))))
    if count == 0:
        return SegmentResult(seg.index, seg.x_lo, seg.x_hi, Interval(0.0), Interval(0.0), 0, 0, 0)
    T = math.fsum(T_hat)
    E = (T_err + U * abs(T) * (len(T_hat) + 1)) * _SLACK
    theta = Interval(fraction_to_float(Fraction(T) - Fraction(E), False),
                     fraction_to_float(Fraction(T) + Fraction(E), True))
    # plus the rounding of the final subtraction
    W = (walk_err + U * d_abs) * _SLACK
    lo = fraction_to_float(Fraction(min(d_min, 0.0)) - Fraction(W), False)
    hi = min(0.0, fraction_to_float(Fraction(d_min) + Fraction(W), True))
    return SegmentResult(seg.index, seg.x_lo, seg.x_hi, theta, Interval(lo, hi), count, first, last)


def base_prime_memory(x_hi: int) -> int:
    """Bytes for the flag array and the base primes (with inverses) up to sqrt(x_hi)."""
    r = math.isqrt(x_hi) + 1
    # pi(r) < 1.26 r / log r
    return r + 16 * int(1.26 * r / math.log(max(r, 3)) + 1)


__all__ = ["Segment", "SegmentResult", "SegmentError", "SegmentTooLargeError", "sieve_segment",
           "certified_logs", "LogBatch", "RECORD_SIZE"]
