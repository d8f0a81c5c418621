"""Rare structures among twin primes.

Two kinds of object live here.  The first is the twin primes whose neighbours
have equal totients, φ(p-1) = φ(p+1).  The second is the prime quadruple test
behind the classical construction of solutions to φ(n) = φ(n+k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scan import DEFAULT_SEGMENT_LEN, _check_limit, iter_segments
from .sieve import factorize, is_prime, prime_flags, totient

SCHEMA_VERSION = 1
EQUALITY_HEADER = "p"


@dataclass(frozen=True, order=True)
class EqualityRecord:
    p: int

    def verify(self) -> bool:
        """Re-check by factoring both neighbours from scratch."""
        return (
            is_prime(self.p) and is_prime(self.p + 2) and totient(self.p - 1) == totient(self.p + 1)
        )


def equality_scan(
    limit: int, *, segment_len: int = DEFAULT_SEGMENT_LEN, threads: int = 1
) -> list[EqualityRecord]:
    """Twin primes p <= limit with φ(p-1) = φ(p+1), ascending."""
    _check_limit(limit)
    out: list[EqualityRecord] = []
    for _, block in iter_segments(limit, segment_len=segment_len, threads=threads):
        out.extend(EqualityRecord(int(p)) for p in block.p[block.equal])
    return out


def equality_report(limit: int, records: list[EqualityRecord]) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "limit": limit,
        "count": len(records),
        "records": [r.p for r in records],
    }


def graham_quadruple_scan(limit: int, *, segment_len: int = 1 << 20) -> list[int]:
    """Primes r <= limit with r+1, 2r+1, 4r+3 and 4r+5 all prime.

    Works block by block over r and sieves the three shifted windows, so the
    memory stays bounded however large ``limit`` is.
    """
    if limit < 2:
        raise ValueError(f"limit must be at least 2, got {limit}")
    found: list[int] = []
    lo = 2
    while lo <= limit:
        hi = min(lo + segment_len, limit + 1)
        r = np.arange(lo, hi, dtype=np.int64)
        ok = prime_flags(lo, hi + 1)
        ok = ok[:-1] & ok[1:]  # r and r+1
        if ok.any():
            dbl = prime_flags(2 * lo + 1, 2 * hi)
            ok &= dbl[2 * (r - lo)]
        if ok.any():
            quad = prime_flags(4 * lo + 3, 4 * hi + 2)
            ok &= quad[4 * (r - lo)] & quad[4 * (r - lo) + 2]
        found.extend(int(x) for x in r[ok])
        lo = hi
    return found


def _radical_primes(n: int) -> set[int]:
    return {p for p, _ in factorize(n)}


def graham_form_check(j: int, k: int, g: int, r: int) -> int | None:
    """Build n with φ(n) = φ(n+k) from j, k and a prime r, if the form applies.

    Requires j and j+k to share their prime divisors and g = gcd(j, j+k).
    When (j/g)·r + 1 and ((j+k)/g)·r + 1 are primes not dividing j, returns
    n = j·(((j+k)/g)·r + 1); otherwise ``None``.
    """
    if j < 1 or k < 1:
        raise ValueError("j and k must be positive")
    if not is_prime(r):
        raise ValueError(f"r={r} is not prime")
    if _radical_primes(j) != _radical_primes(j + k):
        raise ValueError(f"j={j} and j+k={j + k} have different prime divisors")
    if g != math.gcd(j, j + k):
        raise ValueError(f"g={g} is not gcd({j}, {j + k})")
    s = (j // g) * r + 1
    t = ((j + k) // g) * r + 1
    if not (is_prime(s) and is_prime(t)) or j % s == 0 or j % t == 0:
        return None
    n = j * t
    if totient(n) != totient(n + k):
        raise AssertionError(f"form produced n={n} with φ(n) != φ(n+{k})")
    return n
