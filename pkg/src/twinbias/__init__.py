"""Twin primes p, p+2 classified by comparing φ(p-1) with φ(p+1)."""

from .constants import (
    EulerProductValue,
    LinearPolyFamily,
    bh_constant,
    bh_correction,
    bh_expected_count,
    family_for_residue,
    hl_integral,
    nf_count,
    relative_density,
    tail_series,
    theorem_bounds,
    twin_prime_constant,
)
from .density import (
    Comparator,
    DensityParams,
    conjecture_value,
    density_trend,
    enumerate_pairs,
    telescoping_check,
)
from .errors import (
    ArithmeticOverflowError,
    PrecisionError,
    RangeError,
    ResourceError,
    StateError,
    TwinBiasError,
    ValidityError,
)
from .scan import (
    PairClass,
    ScanCounters,
    TwinPairRecord,
    first_exceptional,
    ratio_series,
    residue_stats,
    table1,
    table2,
)
from .sieve import factorize, is_prime, primes_up_to, totient, totients
from .special import equality_scan, graham_form_check, graham_quadruple_scan

__version__ = "0.1.0"

__all__ = [
    "ArithmeticOverflowError",
    "Comparator",
    "DensityParams",
    "EulerProductValue",
    "LinearPolyFamily",
    "PairClass",
    "PrecisionError",
    "RangeError",
    "ResourceError",
    "ScanCounters",
    "StateError",
    "TwinBiasError",
    "TwinPairRecord",
    "ValidityError",
    "bh_constant",
    "bh_correction",
    "bh_expected_count",
    "conjecture_value",
    "density_trend",
    "enumerate_pairs",
    "equality_scan",
    "factorize",
    "family_for_residue",
    "first_exceptional",
    "graham_form_check",
    "graham_quadruple_scan",
    "hl_integral",
    "is_prime",
    "nf_count",
    "primes_up_to",
    "ratio_series",
    "relative_density",
    "residue_stats",
    "table1",
    "table2",
    "tail_series",
    "telescoping_check",
    "theorem_bounds",
    "totient",
    "totients",
    "twin_prime_constant",
]
