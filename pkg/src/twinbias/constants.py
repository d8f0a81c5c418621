"""Constants behind the twin-prime bias bounds.

* the twin primes constant C₂ = ∏_{p>=3} p(p-2)/(p-1)², as a direct product
  over sieved primes with a rigorous tail bracket;
* the prime series Σ_{r>=r0} log(1 + 1/(r-1))/(r-2);
* ∫₂ˣ dt/(log t)^m by adaptive Simpson;
* Bateman-Horn constants for pairs of linear polynomials, as 2C₂ times an
  exact rational correction over the primes where the root count deviates.

Tail bounds come from over-counting primes by all integers:
Σ_{n>P} 1/((n-1)(n-2)) = 1/(P-1), and the same telescoping sum bounds the
log-tail of the product.  The Brun-sieve constant K = 4.5 quoted alongside the
bounds is recorded in :data:`BRUN_K` for reference and enters no computation.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.special import exp1

from .errors import PrecisionError, RangeError, ValidityError
from .sieve import factorize, is_prime, iter_prime_blocks

BRUN_K = 4.5
DEFAULT_TRUNCATION_CAP = 1 << 34
MIN_TARGET = 1e-10
_EPS = 2.0**-52


class Method(str, Enum):
    DIRECT_PRODUCT = "DirectProduct"
    DIRECT_SUM = "DirectSumWithTailEstimate"


@dataclass(frozen=True)
class EulerProductValue:
    """A truncated product or series with a rigorous bracket.

    ``value`` is the truncated evaluation and ``|value - true| <= tail_bound``.
    ``estimate`` adds a smooth (non-rigorous) approximation of the omitted
    tail and is the best single guess.
    """

    name: str
    value: float
    truncation_prime: int
    tail_bound: float
    method: Method
    estimate: float

    @property
    def bracket(self) -> tuple[float, float]:
        return self.value - self.tail_bound, self.value + self.tail_bound

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "tail_bound": self.tail_bound,
            "truncation_prime": self.truncation_prime,
            "method": self.method.value,
            "estimate": self.estimate,
        }


def _truncation_for(target: float, cap: int) -> int:
    if not target > 0:
        raise RangeError(f"target_abs_err must be positive, got {target}")
    if target < MIN_TARGET:
        raise PrecisionError(f"target_abs_err below {MIN_TARGET} is not supported, got {target}")
    # leave 0.1% of the budget for floating-point summation error
    P = math.ceil(1.0 / (0.999 * target)) + 1
    if P > cap:
        raise PrecisionError(
            f"target {target} needs primes up to {P}, above the truncation cap {cap}"
        )
    return P


def _prime_fsum(lo: int, hi: int, term: Callable[[np.ndarray], np.ndarray]) -> tuple[float, float]:
    """(Σ term(p), Σ |term(p)|) over primes lo <= p <= hi.

    Blocks are reduced with numpy's pairwise sum and combined with fsum, in
    fixed block order, so the result is bit-stable.
    """
    sums, abs_sums = [], []
    for block in iter_prime_blocks(lo, hi + 1, 1 << 24):
        if block.size:
            t = term(block.astype(np.float64))
            sums.append(float(np.sum(t)))
            abs_sums.append(float(np.sum(np.abs(t))))
    return math.fsum(sums), math.fsum(abs_sums)


def _smooth_tail(P: int) -> float:
    """≈ Σ_{p>P} 1/p², i.e. ∫_P^∞ dt/(t² log t) = E1(log P)."""
    return float(exp1(math.log(P))) if P >= 2 else math.inf


def twin_prime_constant(
    target_abs_err: float = 1e-9,
    *,
    truncation: int | None = None,
    cap: int = DEFAULT_TRUNCATION_CAP,
) -> EulerProductValue:
    """C₂ by direct summation of log(1 - 1/(p-1)²) over primes 3 <= p <= P.

    Omitted tail: |Σ_{p>P} log(1 - 1/(p-1)²)| <= Σ_{n>P} 1/(n(n-2)) <= 1/(P-1),
    and |e^S - e^(S+T)| <= |T| for T <= 0 < e^S <= 1.
    """
    P = _truncation_for(target_abs_err, cap) if truncation is None else truncation
    if P < 2:
        raise RangeError("truncation must be at least 2")
    if P > cap:
        raise PrecisionError(f"truncation {P} exceeds the cap {cap}")
    s, s_abs = _prime_fsum(3, P, lambda p: np.log1p(-1.0 / ((p - 1.0) * (p - 1.0))))
    value = math.exp(s)
    tail = 0.5 * (1.0 / (P - 1) + 1.0 / P)
    rounding = 64 * _EPS * (s_abs + 1.0)
    return EulerProductValue(
        name="twin_prime_constant",
        value=value,
        truncation_prime=P,
        tail_bound=tail + rounding,
        method=Method.DIRECT_PRODUCT,
        estimate=value * math.exp(-_smooth_tail(P)),
    )


def tail_series(
    r0: int,
    target_abs_err: float = 1e-9,
    *,
    truncation: int | None = None,
    cap: int = DEFAULT_TRUNCATION_CAP,
) -> EulerProductValue:
    """Σ_{primes r >= r0} log(1 + 1/(r-1)) / (r-2).

    Summed directly up to P; since log(1 + t) <= t each omitted term is at most
    1/((r-1)(r-2)), so the tail lies in [0, 1/(P-1)].
    """
    if r0 < 3:
        raise RangeError(f"r0 must be at least 3, got {r0}")
    if r0 > cap:
        # nothing can be summed; the whole series is the tail
        bound = 1.0 / (r0 - 2)
        return EulerProductValue(
            name=f"tail_series(r0={r0})",
            value=0.0,
            truncation_prime=r0 - 1,
            tail_bound=bound,
            method=Method.DIRECT_SUM,
            estimate=_smooth_tail(r0 - 1),
        )
    P = _truncation_for(target_abs_err, cap) if truncation is None else truncation
    if P > cap:
        raise PrecisionError(f"truncation {P} exceeds the cap {cap}")
    P = max(P, r0 - 1)
    s, s_abs = _prime_fsum(r0, P, lambda r: np.log1p(1.0 / (r - 1.0)) / (r - 2.0))
    tail = 1.0 / (P - 1)
    rounding = 64 * _EPS * (s_abs + 1.0)
    return EulerProductValue(
        name=f"tail_series(r0={r0})",
        value=s,
        truncation_prime=P,
        tail_bound=tail + rounding,
        method=Method.DIRECT_SUM,
        estimate=s + _smooth_tail(P),
    )


def _adaptive_simpson(
    f: Callable[[float], float], a: float, b: float, tol: float, max_depth: int = 48
) -> float:
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    parts = []
    while stack:
        a, b, fa, fm, fb, whole, tol, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        err = left + right - whole
        if abs(err) <= 15.0 * tol or depth >= max_depth:
            parts.append(left + right + err / 15.0)
        else:
            stack.append((m, b, fm, frm, fb, right, 0.5 * tol, depth + 1))
            stack.append((a, m, fa, flm, fm, left, 0.5 * tol, depth + 1))
    return math.fsum(parts)


def hl_integral(x: float, m: int = 2, rel_tol: float = 1e-9) -> float:
    """∫₂ˣ dt/(log t)^m by adaptive Simpson.

    The range is cut at 2, 4, 8, ... and each panel is refined to an absolute
    tolerance of rel_tol/10 times its own crude estimate.
    """
    if x < 2:
        raise RangeError(f"hl_integral needs x >= 2, got {x}")
    if m < 1:
        raise RangeError("m must be at least 1")

    def f(t: float) -> float:
        return math.log(t) ** -m

    parts = []
    a = 2.0
    while a < x:
        b = min(2.0 * a, float(x))
        crude = (b - a) * f(b)
        parts.append(_adaptive_simpson(f, a, b, 0.1 * rel_tol * crude))
        a = b
    return math.fsum(parts)


@dataclass(frozen=True)
class LinearPolyFamily:
    """Linear polynomials ``a*t + b`` with a > 0, given as (a, b) pairs."""

    polys: tuple[tuple[int, int], ...]

    def __init__(self, polys):
        polys = tuple((int(a), int(b)) for a, b in polys)
        if not polys:
            raise ValueError("a family needs at least one polynomial")
        if any(a <= 0 for a, _ in polys):
            raise ValueError("leading coefficients must be positive")
        if len(set(polys)) != len(polys):
            raise ValueError("polynomials must be distinct")
        object.__setattr__(self, "polys", polys)

    @property
    def m(self) -> int:
        return len(self.polys)

    def __call__(self, t: int) -> tuple[int, ...]:
        return tuple(a * t + b for a, b in self.polys)

    def _candidate_bad_primes(self) -> set[int]:
        # N_f(p) = p needs p <= m, or p | a and p | b for some factor
        out = {q for q in range(2, self.m + 1) if is_prime(q)}
        for a, b in self.polys:
            g = math.gcd(a, b)
            if g > 1:
                out.update(q for q, _ in factorize(g))
        return out

    def is_valid(self) -> bool:
        return all(nf_count(self, q) < q for q in self._candidate_bad_primes())


def nf_count(family: LinearPolyFamily, p: int) -> int:
    """Number of t mod p with ∏(a_i t + b_i) ≡ 0 (mod p).

    A factor with p | a and p | b vanishes identically, giving p.
    """
    roots = set()
    for a, b in family.polys:
        if a % p == 0:
            if b % p == 0:
                return p
            continue
        roots.add(-b * pow(a, -1, p) % p)
    return len(roots)


def _deviant_primes(family: LinearPolyFamily) -> list[int]:
    """Primes where N_f(p) can differ from the generic value m (p > m)."""
    primes = {q for q in range(2, family.m + 1) if is_prime(q)}
    for a, _ in family.polys:
        primes.update(q for q, _ in factorize(a))
    if family.m == 2:
        (a1, b1), (a2, b2) = family.polys
        det = a1 * b2 - a2 * b1
        if det == 0:
            raise ValidityError("proportional polynomials share a root modulo every prime")
        primes.update(q for q, _ in factorize(abs(det)))
    return sorted(primes)


def bh_correction(family: LinearPolyFamily) -> Fraction:
    """Exact rational factor turning the generic constant into this family's C.

    For m = 2 the generic constant is 2C₂ (N_f(2) = 1, N_f(p) = 2 for odd p);
    a prime with root count N contributes (p - N)/(p - 2) for odd p and
    (2 - N) at p = 2.  For m = 1 the generic constant is 1 and p contributes
    (p - N)/(p - 1).
    """
    if family.m > 2:
        raise ValueError("only families of one or two linear polynomials are supported")
    if not family.is_valid():
        raise ValidityError("the family vanishes identically modulo some prime")
    out = Fraction(1)
    for q in _deviant_primes(family):
        n = nf_count(family, q)
        if family.m == 1:
            out *= Fraction(q - n, q - 1)
        elif q == 2:
            out *= 2 - n
        else:
            out *= Fraction(q - n, q - 2)
    return out


@functools.lru_cache(maxsize=1)
def _default_c2() -> float:
    return twin_prime_constant().value


def bh_constant(family: LinearPolyFamily, c2: float | None = None) -> float:
    """The Bateman-Horn constant C (D = 1 for linear families)."""
    corr = bh_correction(family)
    if family.m == 1:
        return float(corr)
    if c2 is None:
        c2 = _default_c2()
    return 2.0 * c2 * float(corr)


def relative_density(family: LinearPolyFamily) -> Fraction:
    """Predicted count of this family relative to the twin-prime count.

    Counting n = f₁(t) <= x runs t up to x/a₁, so the ratio to
    2C₂ x/(log x)² is the correction divided by a₁ (asymptotically).
    """
    if family.m != 2:
        raise ValueError("relative density is defined against pairs of polynomials")
    return bh_correction(family) / family.polys[0][0]


def bh_expected_count(family: LinearPolyFamily, x: float, c2: float | None = None) -> float:
    """Expected number of t with every f_i(t) prime and f₁(t) <= x.

    Substituting u = f₁(t) = a₁t + b₁ and replacing each log f_i(t) by log u
    gives (C/a₁) ∫₂ˣ du/(log u)^m.  For (t, t+2) this is exactly
    2C₂ ∫₂ˣ du/(log u)², and a family's ratio to it is exactly
    :func:`relative_density` at every x.  The first polynomial carries the
    count, as π₂(x) counts p <= x and not p + 2 <= x.
    """
    a, b = family.polys[0]
    if any((x - bi) / ai < 2 for ai, bi in family.polys):
        raise RangeError(f"x={x} leaves some polynomial with a t-range below 2")
    return bh_constant(family, c2) / a * hl_integral(x, family.m)


def family_for_residue(r: int) -> LinearPolyFamily:
    """The pair (385r t + b_r, 385r t + b_r + 2) of twins with 385 | p-1 and r | p+1."""
    if r < 13 or not is_prime(r):
        raise ValueError(f"r must be a prime >= 13, got {r}")
    k0 = (-2 * pow(385, -1, r)) % r or r
    b = 385 * k0 + 1
    if b % r != r - 1:
        raise ArithmeticError(f"b_r = {b} is not -1 mod {r}")
    return LinearPolyFamily([(385 * r, b), (385 * r, b + 2)])


@dataclass(frozen=True)
class TheoremBounds:
    lower_exceptional: float
    lower_unexceptional: float
    tail13: EulerProductValue
    tail5: EulerProductValue

    @property
    def a1_coefficient(self) -> float:
        """Upper bound on the first-range sum, as a multiple of π₂(x)."""
        return (self.tail13.value + self.tail13.tail_bound) / 135


def theorem_bounds(
    target13: float = 1e-9, target5: float = 1e-6, cap: int = DEFAULT_TRUNCATION_CAP
) -> TheoremBounds:
    """Lower densities of exceptional and unexceptional twin primes.

    Both use the upper end of the series bracket, so they are rigorous
    consequences of the stated inequalities.
    """
    t13 = tail_series(13, target13, cap=cap)
    t5 = tail_series(5, target5, cap=cap)
    hi13 = t13.value + t13.tail_bound
    hi5 = t5.value + t5.tail_bound
    return TheoremBounds(
        lower_exceptional=1 / 135 - hi13 / (135 * math.log(77 / 72)),
        lower_unexceptional=1 - hi5 / math.log(3 / 2),
        tail13=t13,
        tail5=t5,
    )
