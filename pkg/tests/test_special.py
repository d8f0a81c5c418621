import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import factor_totient, trial_is_prime

from twinbias.scan import scan
from twinbias.special import (
    EqualityRecord,
    equality_report,
    equality_scan,
    graham_form_check,
    graham_quadruple_scan,
)

SMALL_EQUALITY = [5, 11, 71, 2591, 208391]


class TestEquality:
    @pytest.mark.parametrize(
        "limit,expected", [(10**4, SMALL_EQUALITY[:4]), (10**6, SMALL_EQUALITY), (5, [5])]
    )
    def test_published_prefix(self, limit, expected):
        assert [r.p for r in equality_scan(limit)] == expected

    def test_reverified_by_factoring(self, twins_1e7):
        for rec in equality_scan(10**7):
            assert rec.verify()
            assert factor_totient(rec.p - 1) == factor_totient(rec.p + 1)

    def test_subset_of_scan_flags(self, twins_1e7):
        rec = twins_1e7.records
        assert [r.p for r in equality_scan(10**7)] == rec.p[rec.equal].tolist()

    def test_density_falls(self, twins_1e7):
        fractions = []
        for x in (10**4, 10**6, 10**7):
            c = scan(x).counters
            fractions.append(c.pieq / c.pi2)
        assert fractions[0] > fractions[1] > fractions[2]

    def test_threads_agree(self):
        assert equality_scan(3 * 10**6, threads=3, segment_len=1 << 18) == equality_scan(3 * 10**6)

    def test_report(self):
        recs = equality_scan(10**4)
        assert equality_report(10**4, recs) == {
            "schema_version": 1,
            "limit": 10**4,
            "count": 4,
            "records": [5, 11, 71, 2591],
        }

    def test_record_verify_rejects(self):
        assert not EqualityRecord(17).verify()
        assert not EqualityRecord(23).verify()


class TestQuadruple:
    @pytest.mark.parametrize("limit", [2, 3, 100, 10**6])
    def test_only_two(self, limit):
        assert graham_quadruple_scan(limit) == [2]

    def test_against_brute_force(self):
        brute = [
            r
            for r in range(2, 5000)
            if all(trial_is_prime(v) for v in (r, r + 1, 2 * r + 1, 4 * r + 3, 4 * r + 5))
        ]
        assert graham_quadruple_scan(4999, segment_len=777) == brute == [2]

    def test_bad_limit(self):
        with pytest.raises(ValueError):
            graham_quadruple_scan(1)


class TestGrahamForm:
    def test_examples(self):
        assert graham_form_check(2, 2, 2, 2) == 10
        assert factor_totient(10) == factor_totient(12)
        assert graham_form_check(2, 2, 2, 3) is None
        assert graham_form_check(6, 6, 6, 5) is None

    def test_preconditions(self):
        with pytest.raises(ValueError):
            graham_form_check(2, 1, 1, 2)  # 2 and 3 have different prime sets
        with pytest.raises(ValueError):
            graham_form_check(2, 2, 1, 2)  # wrong gcd
        with pytest.raises(ValueError):
            graham_form_check(2, 2, 2, 4)  # r not prime

    @given(
        st.sampled_from([(2, 2), (2, 6), (4, 4), (6, 6), (6, 12), (12, 6), (10, 10)]),
        st.integers(2, 3000),
    )
    def test_any_output_solves(self, jk, r):
        j, k = jk
        if not trial_is_prime(r):
            return
        n = graham_form_check(j, k, math.gcd(j, j + k), r)
        if n is not None:
            assert factor_totient(n) == factor_totient(n + k)
