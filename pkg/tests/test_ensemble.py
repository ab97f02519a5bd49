import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmfactor.ensemble import (Ensemble, PrimeContext, build_ensemble, cardinality_asymptote,
                               cardinality_exact, cardinality_literal, check_identities,
                               x3_rank_band, factor_interval, per_x_counts, step_structure)
from qmfactor.exceptions import DomainError, ResourceError
from qmfactor.primes import pi_exact

from conftest import ensemble_for


def trial_factor(n):
    out, d = [], 2
    while d * d <= n:
        while n % d == 0:
            out.append(d)
            n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def oracle_semiprimes(lo, hi):
    return [n for n in range(lo, hi) if len(trial_factor(n)) == 2]


def test_context_77():
    c = PrimeContext.from_N(77)
    assert (c.j, c.x_j, c.x_j1) == (4, 7, 11)
    assert c.interval == (49, 121)
    assert c.gamma == pytest.approx(4 / math.sqrt(77))
    assert c.q_max == pytest.approx(math.sqrt(77) / 8)


def test_context_rejects_small_N():
    with pytest.raises(DomainError):
        PrimeContext.from_N(8)


def test_ens77_matches_oracle(ens77):
    want = oracle_semiprimes(49, 121)
    assert len(want) == 23
    assert ens77.F == 23
    assert sorted(ens77.N_sigma.tolist()) == want
    for n, x, y in zip(ens77.N_sigma.tolist(), ens77.x.tolist(), ens77.y.tolist()):
        assert [x, y] == trial_factor(n)
    assert ens77.pi_x.tolist() == [pi_exact(int(v)) for v in ens77.x]
    assert ens77.pi_y.tolist() == [pi_exact(int(v)) for v in ens77.y]


def test_entry_49(ens77):
    e = ens77.find(49)
    assert (e.x_sigma, e.y_sigma) == (7, 7)
    assert e.E_exact == 1 and e.p_exact == 0 and e.q_exact == 1


def test_entry_77(ens77):
    e = ens77.find(77)
    assert e.E_exact == Fraction(5, 4)
    assert e.p_exact == Fraction(1, 8)
    assert e.q_exact == Fraction(9, 8)
    assert e.E == 1.25 and e.p == 0.125 and e.q == 1.125


def test_cardinality_77(ens77):
    assert cardinality_exact(ens77) == 23
    counts = per_x_counts(ens77)
    assert counts[2] == pi_exact(60) - pi_exact(24) == 8
    assert sum(counts.values()) == 23


def test_step_structure_77(ens77):
    steps = step_structure(ens77)
    assert steps[2].count == 8
    assert sum(s.count for s in steps.values()) == ens77.F
    # E_max of a block is pi(x) pi(largest y) / j^2
    assert steps[3].E_max == 2 * pi_exact(40) / 16
    assert steps[5].E_max == 3 * pi_exact(24) / 16
    for s in steps.values():
        assert s.E_min <= s.E_max and s.k_min <= s.k_max


def test_rank_order(ens77):
    E = ens77.E_num
    assert np.all(np.diff(E) >= 0)
    ties = np.flatnonzero(np.diff(E) == 0)
    for i in ties:
        a, b = ens77.entry(i), ens77.entry(i + 1)
        assert (a.x_sigma > b.x_sigma) or (a.x_sigma == b.x_sigma and a.N_sigma < b.N_sigma)
    assert ens77.k.tolist() == list(range(1, 24))
    assert ens77.kappa[-1] == 1.0


@pytest.mark.parametrize("N", [77, 10**4 + 7, 10**6 + 3])
def test_identities_and_bounds(N):
    ens = ensemble_for(N)
    check_identities(ens)
    j = ens.j
    for i in range(0, ens.F, max(1, ens.F // 300)):
        e = ens.entry(i)
        assert e.q_exact ** 2 - e.p_exact ** 2 == e.E_exact
        assert (e.x_sigma == e.y_sigma) == (e.p_exact == 0)
        assert 0 < e.q_exact <= Fraction(1 + pi_exact(e.N_sigma // 2), 2 * j)
        # cosh(u/gamma) = (x + y) / (2 sqrt(N_sigma)) in exact form
        assert e.phi == e.N_sigma - (e.x_sigma + e.y_sigma) + 1
    # trajectory form p = sqrt(E) sinh t, q = sqrt(E) cosh t
    rE = np.sqrt(ens.E)
    assert np.allclose(rE * np.sinh(ens.t), ens.p, rtol=0, atol=1e-12 * max(1, ens.q.max()))
    assert np.allclose(rE * np.cosh(ens.t), ens.q, rtol=0, atol=1e-12 * max(1, ens.q.max()))


def test_squares_only_at_x_j_squared():
    ens = ensemble_for(10**4 + 7)
    sq = ens.x == ens.y
    assert ens.N_sigma[sq].tolist() == [ens.context.x_j ** 2]
    assert np.all(ens.E[sq] == 1.0)


def test_exclude_squares_flag():
    full = ensemble_for(77)
    nosq = build_ensemble(77, include_squares=False)
    assert nosq.F == full.F - 1
    assert 49 not in nosq.N_sigma.tolist()
    assert cardinality_exact(nosq) == nosq.F


def test_enumeration_matches_oracle_at_10_4():
    ens = ensemble_for(10**4 + 7)
    lo, hi = ens.context.interval
    assert (lo, hi) == (97 ** 2, 101 ** 2)
    assert sorted(ens.N_sigma.tolist()) == oracle_semiprimes(lo, hi)
    assert cardinality_exact(ens) == ens.F


@settings(max_examples=40, deadline=None)
@given(st.integers(9, 20_000))
def test_ensemble_matches_oracle_small(N):
    ens = build_ensemble(N)
    lo, hi = ens.context.interval
    assert ens.F == len(oracle_semiprimes(lo, hi))
    assert cardinality_exact(ens) == ens.F
    assert np.all(np.sqrt(ens.N_sigma) >= ens.context.x_j)


def test_factor_interval():
    spf, omega = factor_interval(2, 200)
    for n in range(2, 200):
        f = trial_factor(n)
        assert spf[n - 2] == f[0]
        assert omega[n - 2] == min(len(f), 3)


def test_interval_bound():
    with pytest.raises(ResourceError):
        build_ensemble(10**6, interval_bound=10)


def test_empty_ensemble_is_allowed():
    ctx = PrimeContext.from_N(77)
    empty = np.array([], dtype=np.int64)
    ens = Ensemble(context=ctx, N_sigma=empty, x=empty, y=empty, pi_x=empty, pi_y=empty)
    assert ens.F == 0 and len(ens.kappa) == 0 and ens.entries == []


def test_asymptote_10_6():
    est = cardinality_asymptote(10**6)
    assert est == pytest.approx(1e3 * (1.9326 + 0.9546) * (1 - 0.2798 + 0.1448), rel=1e-3)
    assert est == pytest.approx(2497.47, abs=0.05)


def test_asymptote_increasing():
    vals = [cardinality_asymptote(10**e) for e in (6, 7, 8)]
    assert vals[0] < vals[1] < vals[2]


def test_asymptote_domain():
    with pytest.raises(DomainError):
        cardinality_asymptote(10**3)


def test_literal_closed_form_is_reported():
    # the closed form is a diagnostic; the enumeration is authoritative
    lit = cardinality_literal(PrimeContext.from_N(77))
    assert set(lit) == {"f(j+1)", "f(j-1)", "F_literal"}
    assert lit["F_literal"] == 40


def test_max_E_in_x3_block():
    ens = ensemble_for(10**6 + 3)
    top = ens.entry(ens.F - 1)
    assert top.x_sigma == 3
    assert 0.7 <= ens.E.max() * 3 * ens.context.gamma <= 1.3
    steps = step_structure(ens)
    assert steps[3].k_max == ens.F


def test_x3_rank_band_is_reported():
    ens = ensemble_for(10**6 + 3)
    a, b = x3_rank_band(ens)
    assert a < b <= ens.F
