"""Segmented sieve of Eratosthenes on a mod-30 wheel."""

from __future__ import annotations

from functools import lru_cache
from math import isqrt

import numpy as np

WHEEL = 30
RESIDUES = np.array([1, 7, 11, 13, 17, 19, 23, 29], dtype=np.int64)
# default inner window: 30 * 2**20 integers (8 MiB of flags)
WINDOW = WHEEL << 20
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=8)
def base_primes(limit: int) -> np.ndarray:
    """All primes <= limit (simple sieve)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, isqrt(limit) + 1, 2):
        if flags[p]:
            flags[p * p::2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


def _inverse_30(ps: np.ndarray) -> np.ndarray:
    return np.array([pow(WHEEL, -1, int(p)) for p in ps], dtype=np.int64)


@lru_cache(maxsize=8)
def _wheel_primes(limit: int) -> tuple[np.ndarray, np.ndarray]:
    ps = base_primes(limit)
    ps = ps[ps >= 7]
    return ps, _inverse_30(ps)


def primes_in(lo: int, hi: int) -> np.ndarray:
    """Primes in [lo, hi) in ascending order as int64."""
    lo = max(int(lo), 0)
    hi = int(hi)
    if hi <= lo:
        return np.zeros(0, dtype=np.int64)
    out = []
    small = [p for p in (2, 3, 5) if lo <= p < hi]
    if small:
        out.append(np.array(small, dtype=np.int64))
    start = lo
    while start < hi:
        stop = min(hi, start + WINDOW)
        out.append(_wheel_window(start, stop))
        start = stop
    if not out:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(out)


def _wheel_window(lo: int, hi: int) -> np.ndarray:
    k_lo = lo // WHEEL
    k_hi = -(-hi // WHEEL)
    K = k_hi - k_lo
    flags = np.ones((K, 8), dtype=bool)
    ps, inv = _wheel_primes(isqrt(hi - 1))
    if len(ps):
        # first k (relative to k_lo) with p | 30k + r and 30k + r >= p^2
        kmin = (ps * ps - RESIDUES[:, None] + WHEEL - 1) // WHEEL - k_lo
        base = (k_lo % ps)
        for j in range(8):
            r = int(RESIDUES[j])
            k0 = ((-r % ps) * inv - base) % ps
            km = kmin[j]
            need = km > k0
            if need.any():
                k0 = np.where(need, k0 + ((km - k0 + ps - 1) // ps) * ps, k0)
            col = flags[:, j]
            for p, k in zip(ps.tolist(), k0.tolist()):
                if k < K:
                    col[k::p] = False
    idx = np.flatnonzero(flags)
    vals = (k_lo + (idx >> 3)) * WHEEL + RESIDUES[idx & 7]
    keep = (vals >= lo) & (vals < hi) & (vals > 1)
    return vals[keep]


def count_primes(lo: int, hi: int) -> int:
    total = 0
    start = lo
    while start < hi:
        stop = min(hi, start + WINDOW)
        total += len(primes_in(start, stop))
        start = stop
    return total


def find_preceding_prime(x: int, margin: int = 512) -> int:
    """Largest prime < x, or 0 when there is none.

    Searches a window below x and doubles it until a prime is found, so it
    does not rely on any assumed maximal prime gap.
    """
    x = int(x)
    if x <= 2:
        return 0
    w = margin
    while True:
        lo = max(0, x - w)
        ps = primes_in(lo, x)
        if len(ps):
            return int(ps[-1])
        if lo == 0:
            return 0
        w *= 2
