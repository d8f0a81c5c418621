"""Segmented prime and totient sieves over 64-bit ranges.

Everything downstream (twin scans, constant evaluation, the special scans)
draws its primes and totients from here.  Blocks are computed independently,
so disjoint ranges can be handed to separate worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .errors import ArithmeticOverflowError, RangeError

MAX_HI = 1 << 63
BASE_TABLE_MAX = 1 << 32
MIN_SEGMENT_LEN = 1 << 16
DEFAULT_SEGMENT_LEN = 1 << 22

# Deterministic Miller-Rabin witnesses; sufficient for every n < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_TRIAL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def _segments(lo: int, hi: int, segment_len: int) -> Iterator[tuple[int, int]]:
    a = lo
    while a < hi:
        b = min(a + segment_len, hi)
        yield a, b
        a = b


@dataclass(frozen=True)
class SegmentPlan:
    """Split ``[lo, hi)`` into blocks of ``segment_len`` integers.

    The final block is clipped at ``hi``.
    """

    lo: int
    hi: int
    segment_len: int = DEFAULT_SEGMENT_LEN

    def __post_init__(self):
        if self.lo < 2 or self.lo >= self.hi:
            raise RangeError(f"need 2 <= lo < hi, got lo={self.lo}, hi={self.hi}")
        if self.hi > MAX_HI:
            raise ArithmeticOverflowError(f"hi={self.hi} exceeds 2**63")
        if self.segment_len < MIN_SEGMENT_LEN:
            raise RangeError(
                f"segment_len must be at least {MIN_SEGMENT_LEN}, got {self.segment_len}"
            )

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return _segments(self.lo, self.hi, self.segment_len)

    def __len__(self) -> int:
        return -(-(self.hi - self.lo) // self.segment_len)


@lru_cache(maxsize=8)
def _base_primes(bound: int) -> np.ndarray:
    """All primes <= bound, from a plain (non-segmented) odd-only sieve."""
    if bound < 2:
        return np.zeros(0, dtype=np.int64)
    # odd[i] stands for 2*i + 1
    odd = np.ones((bound + 1) // 2, dtype=bool)
    odd[0] = False
    for i in range(1, (math.isqrt(bound) - 1) // 2 + 1):
        if odd[i]:
            q = 2 * i + 1
            odd[q * q // 2 :: q] = False
    out = np.flatnonzero(odd).astype(np.int64) * 2 + 1
    return np.concatenate(([2], out)).astype(np.int64)


def _primes_through(n: int) -> np.ndarray:
    """Primes <= n, served from a power-of-two sized cache."""
    base = _base_primes(max(1 << 10, 1 << n.bit_length()))
    return base[: np.searchsorted(base, n, side="right")]


def _odd_prime_mask(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    """Primality of the odd numbers lo, lo+2, ... below hi (lo odd)."""
    flags = np.ones((hi - lo + 1) // 2, dtype=bool)
    if flags.size == 0:
        return flags
    for q in base[1:].tolist():
        qq = q * q
        if qq >= hi:
            break
        start = max(qq, -(-lo // q) * q)
        if not start & 1:
            start += q
        flags[(start - lo) // 2 :: q] = False
    if lo == 1:
        flags[0] = False
    return flags


def iter_prime_blocks(
    lo: int, hi: int, segment_len: int = DEFAULT_SEGMENT_LEN
) -> Iterator[np.ndarray]:
    """Yield the primes of ``[lo, hi)`` block by block, ascending."""
    lo = max(lo, 0)
    if hi <= lo:
        return
    if hi > MAX_HI:
        raise ArithmeticOverflowError(f"hi={hi} exceeds 2**63")
    base = _primes_through(math.isqrt(hi - 1) + 1)
    if lo <= 2 < hi:
        yield np.array([2], dtype=np.int64)
    start = max(lo, 3) | 1
    # keep blocks aligned on an even count so every block starts odd
    step = max(2, segment_len & ~1)
    for a, b in _segments(start, hi, step):
        mask = _odd_prime_mask(a, b, base)
        yield a + 2 * np.flatnonzero(mask).astype(np.int64)


def primes_up_to(n: int) -> np.ndarray:
    """Ascending primes in ``[2, n]`` for ``2 <= n <= 2**32``."""
    if not 2 <= n <= BASE_TABLE_MAX:
        raise RangeError(f"primes_up_to needs 2 <= n <= 2**32, got {n}")
    if n <= DEFAULT_SEGMENT_LEN:
        return _primes_through(n).copy()
    return np.concatenate(list(iter_prime_blocks(2, n + 1)))


def prime_flags(lo: int, hi: int) -> np.ndarray:
    """Boolean primality table for every integer in ``[lo, hi)``."""
    if lo < 0 or hi < lo:
        raise RangeError(f"bad range [{lo}, {hi})")
    flags = np.zeros(hi - lo, dtype=bool)
    if hi <= 2:
        return flags
    base = _primes_through(math.isqrt(hi - 1) + 1)
    if lo <= 2 < hi:
        flags[2 - lo] = True
    first_odd = max(lo, 1) | 1
    if first_odd < hi:
        mask = _odd_prime_mask(first_odd, hi, base)
        flags[first_odd - lo :: 2] = mask
    return flags


@dataclass
class TotientBlock:
    """Totients of ``base, base+1, ...``: ``phi[i] == φ(base + i)``."""

    base: int
    phi: np.ndarray

    def __len__(self) -> int:
        return len(self.phi)

    @property
    def n(self) -> np.ndarray:
        return np.int64(self.base) + np.arange(len(self.phi), dtype=np.int64)

    def prime_mask(self) -> np.ndarray:
        # φ(n) = n - 1 exactly when n is prime
        return self.phi == self.n - 1

    def pairs(self) -> Iterator[tuple[int, int]]:
        """Iterate ``(n, φ(n))`` as Python ints."""
        for i, v in enumerate(self.phi.tolist()):
            yield self.base + i, v


_BASE_CACHE_MAX = 1 << 26


def _base_prime_chunks(lo: int, hi: int) -> Iterator[np.ndarray]:
    """Primes in ``[lo, hi]``; streamed when hi is too large to cache."""
    if lo > hi:
        return
    if hi <= _BASE_CACHE_MAX:
        base = _primes_through(hi)
        yield base[np.searchsorted(base, lo) :]
    else:
        yield from iter_prime_blocks(lo, hi + 1, 1 << 24)


def _totient_segment(lo: int, hi: int) -> np.ndarray:
    """φ(n) for n in [lo, hi), 1 <= lo < hi <= 2**63.

    Two running products are kept per slot: ``smooth`` (the part of n built
    from primes <= sqrt(hi)) and ``phi`` (its totient).  Whatever is left of
    n afterwards is 1 or a single larger prime.  Both products stay <= n, so
    nothing can exceed int64.
    """
    size = hi - lo
    top = hi - 1
    smooth = np.ones(size, dtype=np.int64)
    phi = np.ones(size, dtype=np.int64)
    root = math.isqrt(top)

    for chunk in _base_prime_chunks(2, min(root, size)):
        for q in chunk.tolist():
            s = (-lo) % q
            phi[s::q] *= q - 1
            smooth[s::q] *= q
            qk = q * q
            while qk <= top:
                s = (-lo) % qk
                phi[s::qk] *= q
                smooth[s::qk] *= q
                if qk > top // q:
                    break
                qk *= q

    # primes above the block length hit at most one slot per power
    for big in _base_prime_chunks(size + 1, root):
        mult = big.copy()
        factor = big - 1
        while big.size:
            off = (-lo) % mult
            hit = off < size
            np.multiply.at(phi, off[hit], factor[hit])
            np.multiply.at(smooth, off[hit], big[hit])
            keep = mult <= top // big
            big, mult, factor = big[keep], mult[keep] * big[keep], big[keep]

    rest = (np.int64(lo) + np.arange(size, dtype=np.int64)) // smooth
    large = rest > 1
    phi[large] *= rest[large] - 1
    return phi


def _check_totient_range(lo: int, hi: int) -> None:
    if lo < 1 or lo >= hi:
        raise RangeError(f"need 1 <= lo < hi, got lo={lo}, hi={hi}")
    if hi > MAX_HI:
        raise ArithmeticOverflowError(f"hi={hi} exceeds 2**63")


def totient_block(lo: int, hi: int) -> TotientBlock:
    """Totients of ``[lo, hi)`` computed as a single block."""
    _check_totient_range(lo, hi)
    return TotientBlock(lo, _totient_segment(lo, hi))


def totient_range(
    lo: int, hi: int, segment_len: int = DEFAULT_SEGMENT_LEN
) -> Iterator[TotientBlock]:
    """Yield :class:`TotientBlock` objects covering ``[lo, hi)`` in order."""
    _check_totient_range(lo, hi)
    if segment_len < 1:
        raise RangeError("segment_len must be positive")
    for a, b in _segments(lo, hi, segment_len):
        yield TotientBlock(a, _totient_segment(a, b))


def totients(lo: int, hi: int, segment_len: int = DEFAULT_SEGMENT_LEN) -> np.ndarray:
    """Concatenated φ(n) for n in ``[lo, hi)``."""
    return np.concatenate([blk.phi for blk in totient_range(lo, hi, segment_len)])


def is_prime(n: int) -> bool:
    """Deterministic primality for 0 <= n < 2**63 (Miller-Rabin, fixed witnesses)."""
    if n < 2:
        return False
    for q in _TRIAL_PRIMES:
        if n % q == 0:
            return n == q
    if n < 53 * 53:
        return True
    d, s = n - 1, 0
    while not d & 1:
        d >>= 1
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int) -> int:
    """A nontrivial factor of the odd composite n (deterministic seeds)."""
    for c in range(1, 200):
        y, m, g, r, q = 2, 128, 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r <<= 1
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ArithmeticError(f"Pollard-Brent failed to split {n}")


def _split(n: int, out: dict[int, int]) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    d = _pollard_brent(n)
    _split(d, out)
    _split(n // d, out)


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization of ``1 <= n < 2**63`` as ascending (prime, exponent) pairs."""
    if not 1 <= n < MAX_HI:
        raise RangeError(f"factorize needs 1 <= n < 2**63, got {n}")
    found: dict[int, int] = {}
    for q in (2, 3, 5):
        while n % q == 0:
            found[q] = found.get(q, 0) + 1
            n //= q
    # wheel mod 30 trial division up to a small bound, then Pollard-Brent
    q, bound = 7, 1 << 12
    gaps = (4, 2, 4, 2, 4, 6, 2, 6)
    i = 0
    while q <= bound and q * q <= n:
        while n % q == 0:
            found[q] = found.get(q, 0) + 1
            n //= q
        q += gaps[i]
        i = (i + 1) & 7
    if n > 1:
        if q * q > n:
            found[n] = found.get(n, 0) + 1
        else:
            _split(n, found)
    return sorted(found.items())


def prime_divisors(n: int) -> list[int]:
    """Distinct prime divisors of n, ascending."""
    return [q for q, _ in factorize(n)]


def totient(n: int) -> int:
    """φ(n) for a single n via factorization."""
    result = n
    for q, _ in factorize(n):
        result -= result // q
    return result
