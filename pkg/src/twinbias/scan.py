"""Twin-prime scans that compare φ(p-1) with φ(p+1).

A twin prime p (p and p + 2 both prime, p >= 5) is *exceptional* when
φ(p-1) < φ(p+1), i.e. when p + 2 has more primitive roots than p.  The scan
walks [5, limit] in segments, computes both totients exactly from the
segmented sieve, and emits the pairs as columnar :class:`TwinBlock` objects in
ascending order of p.

The pair (3, 5) is left out of every stream and count, so that running
counts agree with the published tables (π₂(2381) = 71).
"""

from __future__ import annotations

import math
import multiprocessing
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import ArithmeticOverflowError, RangeError
from .sieve import (
    DEFAULT_SEGMENT_LEN,
    MAX_HI,
    MIN_SEGMENT_LEN,
    _totient_segment,
    factorize,
    is_prime,
    prime_divisors,
    totient,
)

FIRST_TWIN = 5
MAX_LIMIT = MAX_HI - 3
DEFAULT_RESIDUES: tuple[tuple[int, int], ...] = ((770, 1),)

RECORD_HEADER = "p,phi_minus,phi_plus,delta,class,equal_flag"
RATIO_HEADER = "k,p,pie,pi2,ratio"


class PairClass(str, Enum):
    EXCEPTIONAL = "E"
    UNEXCEPTIONAL = "U"


def classify(p: int, phi_minus: int, phi_plus: int) -> PairClass:
    """Exceptional iff p >= 5 and φ(p-1) < φ(p+1); p = 3 never is."""
    if p >= FIRST_TWIN and phi_minus < phi_plus:
        return PairClass.EXCEPTIONAL
    return PairClass.UNEXCEPTIONAL


@dataclass(frozen=True)
class TwinPairRecord:
    p: int
    phi_minus: int
    phi_plus: int
    delta: int
    pair_class: PairClass
    equal_flag: bool

    @classmethod
    def build(cls, p: int, phi_minus: int, phi_plus: int) -> "TwinPairRecord":
        return cls(
            p=p,
            phi_minus=phi_minus,
            phi_plus=phi_plus,
            delta=phi_minus - phi_plus,
            pair_class=classify(p, phi_minus, phi_plus),
            equal_flag=phi_minus == phi_plus,
        )

    @classmethod
    def for_prime(cls, p: int) -> "TwinPairRecord":
        """Record for a single twin prime, with totients from factorization."""
        if not (is_prime(p) and is_prime(p + 2)):
            raise RangeError(f"{p} is not the smaller member of a twin prime pair")
        return cls.build(p, totient(p - 1), totient(p + 1))

    @property
    def exceptional(self) -> bool:
        return self.pair_class is PairClass.EXCEPTIONAL

    def csv_row(self) -> str:
        return (
            f"{self.p},{self.phi_minus},{self.phi_plus},{self.delta},"
            f"{self.pair_class.value},{int(self.equal_flag)}"
        )


def _residue_key(key: tuple[int, int]) -> str:
    return f"{key[0]}:{key[1]}"


@dataclass
class ScanCounters:
    """Tallies over a scanned range; merging is plain addition."""

    limit: int = 0
    pi2: int = 0
    pie: int = 0
    piu: int = 0
    pieq: int = 0
    residue_hits: dict[tuple[int, int], int] = field(default_factory=dict)

    def merge(self, other: "ScanCounters") -> "ScanCounters":
        hits = dict(self.residue_hits)
        for key, count in other.residue_hits.items():
            hits[key] = hits.get(key, 0) + count
        return ScanCounters(
            limit=max(self.limit, other.limit),
            pi2=self.pi2 + other.pi2,
            pie=self.pie + other.pie,
            piu=self.piu + other.piu,
            pieq=self.pieq + other.pieq,
            residue_hits=hits,
        )

    __add__ = merge

    @property
    def ratio(self) -> float:
        return self.pie / self.pi2 if self.pi2 else 0.0

    def to_json(self) -> dict:
        return {
            "limit": self.limit,
            "pi2": self.pi2,
            "pie": self.pie,
            "piu": self.piu,
            "pieq": self.pieq,
            "residue_hits": {_residue_key(k): v for k, v in sorted(self.residue_hits.items())},
        }

    @classmethod
    def from_json(cls, data: dict) -> "ScanCounters":
        hits = {}
        for key, count in data.get("residue_hits", {}).items():
            m, r = key.split(":")
            hits[(int(m), int(r))] = int(count)
        return cls(
            limit=int(data["limit"]),
            pi2=int(data["pi2"]),
            pie=int(data["pie"]),
            piu=int(data["piu"]),
            pieq=int(data["pieq"]),
            residue_hits=hits,
        )


@dataclass
class TwinBlock:
    """Columnar twin-pair data: ``p``, ``phi_minus``, ``phi_plus`` as int64."""

    p: np.ndarray
    phi_minus: np.ndarray
    phi_plus: np.ndarray

    @classmethod
    def empty(cls) -> "TwinBlock":
        z = np.zeros(0, dtype=np.int64)
        return cls(z, z.copy(), z.copy())

    @classmethod
    def concat(cls, blocks: Iterable["TwinBlock"]) -> "TwinBlock":
        blocks = list(blocks)
        if not blocks:
            return cls.empty()
        return cls(
            np.concatenate([b.p for b in blocks]),
            np.concatenate([b.phi_minus for b in blocks]),
            np.concatenate([b.phi_plus for b in blocks]),
        )

    def __len__(self) -> int:
        return len(self.p)

    def __getitem__(self, key) -> "TwinBlock":
        return TwinBlock(self.p[key], self.phi_minus[key], self.phi_plus[key])

    @property
    def delta(self) -> np.ndarray:
        return self.phi_minus - self.phi_plus

    @property
    def exceptional(self) -> np.ndarray:
        return (self.p >= FIRST_TWIN) & (self.phi_minus < self.phi_plus)

    @property
    def equal(self) -> np.ndarray:
        return self.phi_minus == self.phi_plus

    def records(self) -> Iterator[TwinPairRecord]:
        for p, a, b in zip(self.p.tolist(), self.phi_minus.tolist(), self.phi_plus.tolist()):
            yield TwinPairRecord.build(p, a, b)

    __iter__ = records

    def counters(
        self, limit: int, residues: Sequence[tuple[int, int]] = DEFAULT_RESIDUES
    ) -> ScanCounters:
        exc = self.exceptional
        pe = self.p[exc]
        pie = int(exc.sum())
        return ScanCounters(
            limit=limit,
            pi2=len(self),
            pie=pie,
            piu=len(self) - pie,
            pieq=int(self.equal.sum()),
            residue_hits={(m, r): int(np.count_nonzero(pe % m == r)) for m, r in residues},
        )

    def csv_lines(self) -> str:
        """Record rows (no header), each terminated by a newline."""
        if not len(self):
            return ""
        delta = self.delta.tolist()
        cls = np.where(self.exceptional, "E", "U").tolist()
        eq = self.equal.astype(np.int8).tolist()
        rows = [
            f"{p},{a},{b},{d},{c},{e}\n"
            for p, a, b, d, c, e in zip(
                self.p.tolist(), self.phi_minus.tolist(), self.phi_plus.tolist(), delta, cls, eq
            )
        ]
        return "".join(rows)


def scan_segment(lo: int, hi: int) -> TwinBlock:
    """Twin pairs with ``lo <= p < hi`` (requires lo >= 5)."""
    # totients of p-1 .. p+2 for every candidate p in [lo, hi)
    phi = _totient_segment(lo - 1, hi + 2)
    n = np.int64(lo - 1) + np.arange(len(phi), dtype=np.int64)
    prime = phi == n - 1
    idx = np.flatnonzero(prime[1:-2] & prime[3:])
    return TwinBlock(np.int64(lo) + idx, phi[idx], phi[idx + 2])


def _ordered_map(fn: Callable, tasks: Iterable[tuple], threads: int) -> Iterator:
    """Apply ``fn`` to each task tuple, yielding results in submission order."""
    if threads <= 1:
        for task in tasks:
            yield fn(*task)
        return
    ctx = multiprocessing.get_context("fork")
    pool = ProcessPoolExecutor(max_workers=threads, mp_context=ctx)
    pending: deque = deque()
    try:
        for task in tasks:
            pending.append(pool.submit(fn, *task))
            if len(pending) >= 2 * threads:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()
    finally:
        pool.shutdown(wait=True, cancel_futures=True)


def _check_segment_len(segment_len: int) -> None:
    if segment_len < MIN_SEGMENT_LEN:
        raise RangeError(f"segment_len must be at least {MIN_SEGMENT_LEN}, got {segment_len}")


def _check_limit(limit: int) -> None:
    if limit < FIRST_TWIN:
        raise RangeError(f"limit must be at least {FIRST_TWIN}, got {limit}")
    if limit > MAX_LIMIT:
        raise ArithmeticOverflowError(f"limit {limit} leaves the 64-bit range")


def iter_segments(
    limit: int | None,
    *,
    start: int = FIRST_TWIN,
    segment_len: int = DEFAULT_SEGMENT_LEN,
    threads: int = 1,
) -> Iterator[tuple[int, TwinBlock]]:
    """Yield ``(top, block)`` per segment, where ``top`` is the last p covered.

    ``limit=None`` scans without an upper bound (up to the 64-bit cap); the
    caller stops consuming when done.
    """
    _check_segment_len(segment_len)
    stop = MAX_LIMIT + 1 if limit is None else limit + 1
    if start < FIRST_TWIN:
        raise RangeError(f"scan start must be at least {FIRST_TWIN}")

    bounds: list[tuple[int, int]] = []

    def tasks() -> Iterator[tuple[int, int]]:
        a = start
        while a < stop:
            b = min(a + segment_len, stop)
            bounds.append((a, b))
            yield a, b
            a = b

    for block in _ordered_map(scan_segment, tasks(), threads):
        a, b = bounds.pop(0)
        yield b - 1, block


@dataclass
class ScanResult:
    records: TwinBlock
    counters: ScanCounters

    def __iter__(self) -> Iterator[TwinPairRecord]:
        return self.records.records()


def scan(
    limit: int,
    *,
    segment_len: int = DEFAULT_SEGMENT_LEN,
    threads: int = 1,
    residues: Sequence[tuple[int, int]] = DEFAULT_RESIDUES,
) -> ScanResult:
    """Every twin prime 5 <= p <= limit, with exact totients and final counters."""
    _check_limit(limit)
    blocks = []
    counters = ScanCounters(limit=limit, residue_hits={k: 0 for k in residues})
    for top, block in iter_segments(limit, segment_len=segment_len, threads=threads):
        blocks.append(block)
        counters = counters.merge(block.counters(top, residues))
    return ScanResult(TwinBlock.concat(blocks), counters)


def first_exceptional(
    k: int,
    *,
    segment_len: int = DEFAULT_SEGMENT_LEN,
    threads: int = 1,
    residues: Sequence[tuple[int, int]] = DEFAULT_RESIDUES,
) -> ScanResult:
    """Scan until the k-th exceptional prime; the result ends at that prime."""
    if k < 1:
        raise RangeError("k must be positive")
    blocks: list[TwinBlock] = []
    found = 0
    for _, block in iter_segments(None, segment_len=segment_len, threads=threads):
        exc = np.flatnonzero(block.exceptional)
        if found + len(exc) >= k:
            cut = exc[k - found - 1] + 1
            blocks.append(block[:cut])
            break
        found += len(exc)
        blocks.append(block)
    records = TwinBlock.concat(blocks)
    return ScanResult(records, records.counters(int(records.p[-1]), residues))


@dataclass(frozen=True)
class RatioRow:
    k: int
    p: int
    pie: int
    pi2: int

    @property
    def ratio(self) -> float:
        return self.pie / self.pi2

    def csv_row(self) -> str:
        return f"{self.k},{self.p},{self.pie},{self.pi2},{format_ratio(self.ratio)}"


RATIO_DIGITS = 6


def format_ratio(x: float) -> str:
    """Ratio as printed in the published table: 0.02, 0.011194, 0.0230362."""
    return f"{x:.{RATIO_DIGITS}g}"


def ratio_rows(records: TwinBlock) -> list[RatioRow]:
    """One row per exceptional prime with the running π_e / π₂."""
    exc = records.exceptional
    idx = np.flatnonzero(exc)
    return [
        RatioRow(k=k, p=int(records.p[i]), pie=k, pi2=int(i) + 1)
        for k, i in enumerate(idx.tolist(), start=1)
    ]


def ratio_series(limit: int, **kwargs) -> list[RatioRow]:
    return ratio_rows(scan(limit, **kwargs).records)


def residue_stats(
    modulus: int,
    residue: int,
    *,
    limit: int | None = None,
    first_k: int | None = None,
    records: TwinBlock | None = None,
    **kwargs,
) -> int:
    """Count exceptional p with p ≡ residue (mod modulus) in the given scope.

    The scope is exactly one of ``limit`` (p <= limit), ``first_k`` (the
    first k exceptional primes) or an already computed ``records`` block.
    """
    if modulus < 2:
        raise ValueError("modulus must be at least 2")
    if not 0 <= residue < modulus:
        raise ValueError(f"residue must lie in [0, {modulus}), got {residue}")
    if sum(x is not None for x in (limit, first_k, records)) != 1:
        raise ValueError("give exactly one of limit, first_k, records")
    if limit is not None:
        records = scan(limit, **kwargs).records
    elif first_k is not None:
        records = first_exceptional(first_k, **kwargs).records
    pe = records.p[records.exceptional]
    return int(np.count_nonzero(pe % modulus == residue))


def lemma_equivalence_check(
    p: int, phi_minus: int | None = None, phi_plus: int | None = None
) -> bool:
    """Whether [φ(p-1) >= φ(p+1)] agrees with [φ(p-1)/(p-1) >= φ(p+1)/(p+1)].

    The ratio comparison is done by integer cross-multiplication.
    """
    if p < FIRST_TWIN:
        raise RangeError("p must be at least 5")
    if phi_minus is None:
        phi_minus = totient(p - 1)
    if phi_plus is None:
        phi_plus = totient(p + 1)
    return (phi_minus >= phi_plus) == (phi_minus * (p + 1) >= phi_plus * (p - 1))


def lemma_equivalence_mask(records: TwinBlock) -> np.ndarray:
    """Vectorized :func:`lemma_equivalence_check` over a block."""
    p, a, b = records.p, records.phi_minus, records.phi_plus
    if len(p) and int(p.max()) >= 1 << 31:
        # products could pass 2**63; fall back to Python integers
        return np.array(
            [lemma_equivalence_check(*t) for t in zip(p.tolist(), a.tolist(), b.tolist())],
            dtype=bool,
        )
    return (a >= b) == (a * (p + 1) >= b * (p - 1))


def _small_prime_free_density(n: int) -> Fraction:
    """∏ (1 - 1/q) over prime divisors q >= 5 of n."""
    out = Fraction(1)
    for q in prime_divisors(n):
        if q >= 5:
            out *= Fraction(q - 1, q)
    return out


def condition_check(p: int) -> bool:
    """The prime-divisor form of exceptionality, in exact rationals.

    True iff (1/2)∏_{q|p-1, q>=5}(1-1/q) < (1/3)∏_{q|p+1, q>=5}(1-1/q).
    """
    if p < FIRST_TWIN:
        raise RangeError("p must be at least 5")
    left = Fraction(1, 2) * _small_prime_free_density(p - 1)
    right = Fraction(1, 3) * _small_prime_free_density(p + 1)
    return left < right


def _log_sum(n: int, threshold: int) -> float:
    terms = [math.log1p(1 / (r - 1)) for r, _ in factorize(n) if r >= threshold]
    return math.fsum(terms)


def f_eps(p: int, threshold: int) -> float:
    """Σ log(1 + 1/(r-1)) over primes r | p+1 with r >= threshold."""
    if threshold < 2:
        raise RangeError("threshold must be at least 2")
    return _log_sum(p + 1, threshold)


def g_eps(p: int, threshold: int) -> float:
    """Σ log(1 + 1/(r-1)) over primes r | p-1 with r >= threshold."""
    if threshold < 2:
        raise RangeError("threshold must be at least 2")
    return _log_sum(p - 1, threshold)


def table1(limit: int = 2000) -> TwinBlock:
    """Rows ``(p, φ(p-1), φ(p+1), δ)`` for 5 <= p <= limit."""
    return scan(limit).records


def table2(k: int = 100, **kwargs) -> list[tuple[int, int, int, int, float]]:
    """Rows ``(p, δ(p), π₂(p), π_e(p), ratio)`` for the first k exceptional p."""
    result = first_exceptional(k, **kwargs)
    rec = result.records
    delta = rec.delta
    rows = []
    for row in ratio_rows(rec):
        i = row.pi2 - 1
        rows.append((row.p, int(delta[i]), row.pi2, row.pie, row.ratio))
    return rows
