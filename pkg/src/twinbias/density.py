"""Finite-cutoff evaluation of the conjectured exceptional density.

For a cutoff Q, let q range over the primes 5 <= q <= Q.  Every prime goes to
``a``, to ``b`` or to neither, giving 3^k coprime squarefree pairs (a, b).  A
pair carries weight ∏_{q | ab} 1/(q - 4) and *satisfies* when
φ(a)/(2a) <= φ(b)/(3b) (or < under the strict comparator).  The density at
cutoff Q is

    ∏_{5<=q<=Q} (q-4)/(q-2)  ×  Σ_{satisfying (a, b)} weight(a, b).

All arithmetic is exact.  Weights are accumulated as integers over the common
denominator ∏ (q - 4), so a pair contributes ∏_{q ∤ ab} (q - 4).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterator, Sequence

from .errors import ResourceError
from .sieve import is_prime

DEFAULT_Q_CAP = 79


class Comparator(str, Enum):
    LESS_OR_EQUAL = "le"
    STRICT_LESS = "lt"

    def holds(self, left: int, right: int) -> bool:
        return left <= right if self is Comparator.LESS_OR_EQUAL else left < right


@dataclass(frozen=True)
class DensityParams:
    q_max: int
    comparator: Comparator = Comparator.LESS_OR_EQUAL
    cap: int = DEFAULT_Q_CAP

    def __post_init__(self):
        if self.q_max < 3:
            raise ValueError(f"q_max must be at least 3, got {self.q_max}")
        if self.q_max > self.cap:
            raise ResourceError(f"q_max={self.q_max} exceeds the enumeration cap {self.cap}")
        object.__setattr__(self, "comparator", Comparator(self.comparator))

    @property
    def primes(self) -> list[int]:
        return [q for q in range(5, self.q_max + 1) if is_prime(q)]


@dataclass(frozen=True)
class PairTerm:
    a: int
    b: int
    weight: Fraction
    satisfies: bool


def _phi_squarefree(primes: Sequence[int]) -> int:
    out = 1
    for q in primes:
        out *= q - 1
    return out


def _prod(values) -> int:
    out = 1
    for v in values:
        out *= v
    return out


def satisfies(a_primes: Sequence[int], b_primes: Sequence[int], comparator: Comparator) -> bool:
    """φ(a)/(2a) ⋈ φ(b)/(3b), compared as 3b·φ(a) ⋈ 2a·φ(b)."""
    a, b = _prod(a_primes), _prod(b_primes)
    return comparator.holds(3 * b * _phi_squarefree(a_primes), 2 * a * _phi_squarefree(b_primes))


def enumerate_pairs(params: DensityParams) -> Iterator[PairTerm]:
    """Every (a, b) assignment, each exactly once (3^k of them)."""
    primes = params.primes
    comparator = params.comparator

    def walk(i: int, a_primes: list[int], b_primes: list[int]) -> Iterator[PairTerm]:
        if i == len(primes):
            weight = Fraction(1, _prod(q - 4 for q in a_primes + b_primes))
            yield PairTerm(
                _prod(a_primes),
                _prod(b_primes),
                weight,
                satisfies(a_primes, b_primes, comparator),
            )
            return
        q = primes[i]
        yield from walk(i + 1, a_primes, b_primes)
        yield from walk(i + 1, a_primes + [q], b_primes)
        yield from walk(i + 1, a_primes, b_primes + [q])

    return walk(0, [], [])


@dataclass(frozen=True)
class DensityResult:
    q_max: int
    comparator: Comparator
    prefactor: Fraction
    sum: Fraction
    pair_count: int
    satisfying_count: int

    @property
    def value(self) -> Fraction:
        return self.prefactor * self.sum

    @property
    def value_real(self) -> float:
        return float(self.value)

    def to_json(self) -> dict:
        def frac(x: Fraction) -> str:
            return f"{x.numerator}/{x.denominator}"

        return {
            "q_max": self.q_max,
            "comparator": self.comparator.value,
            "prefactor": frac(self.prefactor),
            "sum": frac(self.sum),
            "value_rational": frac(self.value),
            "value_real": self.value_real,
            "pair_count": self.pair_count,
            "satisfying_count": self.satisfying_count,
        }


def _prefactor(primes: Sequence[int]) -> Fraction:
    return Fraction(_prod(q - 4 for q in primes), _prod(q - 2 for q in primes))


def _pruned_sum(primes: Sequence[int], comparator: Comparator) -> tuple[int, int]:
    """(Σ ∏_{q∤ab}(q-4), satisfying count) over satisfying pairs.

    A node tracks φ(a), a, φ(b), b.  Putting the remaining primes into a can
    shrink φ(a)/a by at most R = ∏_{rest}(1 - 1/q), and likewise for b.  If
    even the smallest reachable left side fails, the subtree is dropped; if
    even the smallest reachable right side passes, the whole subtree counts,
    contributing ∏_{rest}(q - 2) to the numerator sum and 3^rest pairs.
    """
    k = len(primes)
    # suffix products over primes[i:]
    r_num = [1] * (k + 1)
    r_den = [1] * (k + 1)
    full = [1] * (k + 1)
    for i in range(k - 1, -1, -1):
        q = primes[i]
        r_num[i] = r_num[i + 1] * (q - 1)
        r_den[i] = r_den[i + 1] * q
        full[i] = full[i + 1] * (q - 2)
    holds = comparator.holds
    total = 0
    count = 0

    stack = [(0, 1, 1, 1, 1, 1)]
    while stack:
        i, phia, a, phib, b, w = stack.pop()
        left = 3 * b * phia
        right = 2 * a * phib
        rn, rd = r_num[i], r_den[i]
        # everything remaining into a: smallest possible left side
        if not holds(left * rn, right * rd):
            continue
        # everything remaining into b: smallest possible right side
        if holds(left * rd, right * rn):
            total += w * full[i]
            count += 3 ** (k - i)
            continue
        q = primes[i]
        stack.append((i + 1, phia, a, phib * (q - 1), b * q, w))
        stack.append((i + 1, phia * (q - 1), a * q, phib, b, w))
        stack.append((i + 1, phia, a, phib, b, w * (q - 4)))
    return total, count


def conjecture_value(params: DensityParams, *, prune: bool = True) -> DensityResult:
    """Density expression at cutoff ``params.q_max``, exactly.

    ``prune=False`` walks every pair through :func:`enumerate_pairs`.
    """
    primes = params.primes
    denom = _prod(q - 4 for q in primes)
    if prune:
        numer, sat = _pruned_sum(primes, params.comparator)
        weight_sum = Fraction(numer, denom)
        pairs = 3 ** len(primes)
    else:
        weight_sum = Fraction(0)
        sat = pairs = 0
        for term in enumerate_pairs(params):
            pairs += 1
            if term.satisfies:
                sat += 1
                weight_sum += term.weight
    return DensityResult(
        q_max=params.q_max,
        comparator=params.comparator,
        prefactor=_prefactor(primes),
        sum=weight_sum,
        pair_count=pairs,
        satisfying_count=sat,
    )


def telescoping_check(q_max: int, cap: int = DEFAULT_Q_CAP) -> Fraction:
    """The density expression with the φ-condition dropped; exactly 1.

    Every leaf of the assignment tree is visited, so this costs 3^k steps.
    """
    primes = DensityParams(q_max, cap=cap).primes
    k = len(primes)
    total = 0
    stack = [(0, 1)]
    while stack:
        i, w = stack.pop()
        if i == k:
            total += w
            continue
        q = primes[i]
        stack.append((i + 1, w * (q - 4)))
        stack.append((i + 1, w))
        stack.append((i + 1, w))
    return _prefactor(primes) * Fraction(total, _prod(q - 4 for q in primes))


def density_trend(
    q_list: Sequence[int], comparator: Comparator = Comparator.LESS_OR_EQUAL
) -> list[tuple[int, Fraction]]:
    """``(Q, value)`` for each cutoff; descriptive only."""
    return [(q, conjecture_value(DensityParams(q, comparator)).value) for q in q_list]
