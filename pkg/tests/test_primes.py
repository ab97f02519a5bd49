import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmfactor import primes
from qmfactor.exceptions import DomainError, ResourceError
from qmfactor.primes import (LucyTable, PrimeCounter, PrimeTable, li, lucy_pi, meissel_mertens_C,
                             nth_prime, pi_exact, simple_sieve)


def segmented_count(x, segment=1 << 16):
    """Plain segmented sieve count, used as an oracle."""
    if x < 2:
        return 0
    base = simple_sieve(math.isqrt(x))
    total = 0
    for lo in range(2, x + 1, segment):
        hi = min(lo + segment, x + 1)
        mark = np.ones(hi - lo, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= hi:
                break
            start = max(p * p, -(-lo // p) * p)
            mark[start - lo :: p] = False
        total += int(mark.sum())
    return total


@pytest.mark.parametrize("x, expected", [(10, 4), (2, 1), (0, 0), (1, 0), (3, 2)])
def test_pi_small(x, expected):
    assert pi_exact(x) == expected


def test_pi_10000_matches_oracle():
    assert segmented_count(10**4) == 1229
    assert pi_exact(10**4) == 1229
    assert lucy_pi(10**4) == 1229


@pytest.mark.parametrize("j, p", [(1, 2), (4, 7), (1229, 9973)])
def test_nth_prime(j, p):
    assert nth_prime(j) == p


def test_nth_prime_rejects_zero():
    with pytest.raises(DomainError):
        nth_prime(0)


def test_table_membership_and_checkpoints():
    t = PrimeTable(300_000)
    ref = set(simple_sieve(300_000).tolist())
    for n in list(range(0, 2000)) + list(range(299_000, 300_001)):
        assert t.is_prime(n) == (n in ref)
    # checkpoint b counts the primes below 2^16 * b, excluding 2
    for b, c in enumerate(t.checkpoints[:-1]):
        assert c == sum(1 for p in ref if 2 < p < (b << 16))
    assert t.count == len(ref)


def test_table_primes_slice():
    t = PrimeTable(10**5)
    ref = simple_sieve(10**5)
    for lo, hi in [(2, 100), (3, 3), (90, 97), (1000, 5000), (99_000, 10**5)]:
        want = ref[(ref >= lo) & (ref <= hi)]
        assert np.array_equal(t.primes(lo, hi), want)


def test_table_cache_roundtrip(tmp_path):
    t = PrimeTable(123_457)
    path = tmp_path / "s.bin"
    t.save(path)
    back = PrimeTable.load(path, limit=123_457)
    assert back is not None and back.limit == t.limit
    assert np.array_equal(back.bits, t.bits)
    assert PrimeTable.load(path, limit=100_000) is None
    path.write_bytes(b"garbage" * 10)
    assert PrimeTable.load(path) is None
    assert PrimeTable.load(tmp_path / "missing.bin") is None


def test_counter_uses_cache_dir(tmp_path):
    c = PrimeCounter(sieve_limit=2_000_000, cache_dir=tmp_path)
    assert c.pi(10**6) == 78498
    files = list(tmp_path.glob("sieve-*.bin"))
    assert files
    again = PrimeCounter(sieve_limit=2_000_000, cache_dir=tmp_path)
    assert again.pi(10**6) == 78498


def test_lucy_table_values():
    t = LucyTable(10**6)
    for i in [1, 2, 3, 7, 10, 999, 1000]:
        v = 10**6 // i
        assert t.pi(v) == segmented_count(v)
    with pytest.raises(KeyError):
        t.pi(10**6 - 1)


def test_above_sieve_limit_switches_to_lucy():
    c = PrimeCounter(sieve_limit=10**5)
    assert c.pi(10**6) == 78498
    assert c.pi(10**7) == 664579


def test_ceiling():
    c = PrimeCounter(sieve_limit=10**5, ceiling=10**7)
    with pytest.raises(ResourceError):
        c.pi(10**7 + 1)


def test_negative_rejected():
    with pytest.raises(DomainError):
        pi_exact(-1)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_lucy_agrees_with_table(x):
    assert lucy_pi(x) == pi_exact(x)


def test_pi_nth_prime_inverse():
    for j in list(range(1, 200)) + [10**4, 54_321, 10**5]:
        assert pi_exact(nth_prime(j)) == j
        assert pi_exact(nth_prime(j) - 1) == j - 1


def test_pi_nondecreasing():
    xs = np.arange(0, 20_000)
    vals = [pi_exact(int(x)) for x in xs]
    assert all(b - a in (0, 1) for a, b in zip(vals, vals[1:]))


# Li: quadrature oracle from mpmath at high precision
@pytest.mark.parametrize("x", [2.5, 100.0, 1e4, 1e6, 1e10])
def test_li_against_mpmath(x):
    mpmath.mp.dps = 30
    ref = float(mpmath.quad(lambda t: 1 / mpmath.log(t), [2, x]))
    assert li(x) == pytest.approx(ref, rel=1e-13, abs=1e-10)


def test_li_examples():
    assert li(2) == 0.0
    assert li(100) == pytest.approx(29.081, abs=1e-3)
    assert li(1e4) == pytest.approx(1245.09, abs=1e-2)


def test_li_domain():
    with pytest.raises(DomainError):
        li(1.5)


def test_li_increasing_and_above_pi():
    xs = np.geomspace(100, 1e7, 40)
    vals = [li(x) for x in xs]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert all(li(x) > pi_exact(int(x)) for x in xs)


def test_meissel_mertens():
    C = meissel_mertens_C()
    assert C == pytest.approx(math.log(2) + 0.2614972, abs=1e-7)
    assert C == pytest.approx(0.954644, abs=1e-6)
    assert meissel_mertens_C() == C


def test_mertens_partial_sum():
    ps = simple_sieve(10**6).astype(float)
    partial = float(np.sum(1.0 / ps)) - math.log(math.log(10**6))
    assert abs(partial - primes.MERTENS_B1) < 0.02
