import json
import math

import numpy as np
import pytest

from twistlab import census
from twistlab.census import (
    asymptotic_fit,
    default_checkpoints,
    prime_census,
    ratio_variation,
    squarefree_census,
)
from twistlab.curve import build_profile, count_points_mod
from twistlab.errors import HypothesisViolated, InsufficientData, ResourceLimitExceeded
from twistlab.twist import certify, classify_prime, good_primes

from conftest import curve


def test_hand_values_x10(e53, e15):
    # 53a1: #E(F_3) = 3, #E(F_5) = 8, #E(F_7) = 8, so 5 and 7 are in Omega
    assert [count_points_mod(e53.curve, p) % 2 for p in (3, 5, 7)] == [1, 0, 0]
    r = squarefree_census(e53, 10)
    assert r.population == 4
    assert r.m_EN == {1: 2, 3: 1, 5: 1}
    assert r.n_Omega == 2
    rows = []
    squarefree_census(e53, 10, row_sink=rows.extend)
    assert [(d, lam) for d, lam, _, _ in rows] == [(1, 1), (3, 1), (5, 3), (7, 5)]
    r15 = squarefree_census(e15, 10)
    assert r15.population == 2 and r15.m_EN == {0: 1, 4: 1}


def test_rows_agree_with_certify(e53, e17):
    for P in (e53, e17):
        rows = []
        squarefree_census(P, 3000, row_sink=rows.extend)
        for d, lam, om, concl in rows:
            c = certify(P, d)
            assert (lam, om) == (c.lambda2_twist, c.omega_twist)
            assert concl == ";".join(str(x) for x in c.conclusions)


def test_n_e1_rows_are_odd_and_small(e53):
    rows = []
    r = squarefree_census(e53, 10**4, row_sink=rows.extend)
    proved = [row for row in rows if row[3].startswith("CorankOneProved")]
    assert len(proved) == r.n_E1_lower > 0
    assert all(om == -1 and lam <= 2 for _, lam, om, _ in proved)


@pytest.mark.parametrize("name", ["e53", "e15", "e17"])
def test_partitions_and_invariants(name, request):
    P = request.getfixturevalue(name)
    rows = []
    r = squarefree_census(P, 20000, row_sink=rows.extend)
    assert sum(r.m_EN.values()) == r.population == len(rows)
    with_omega = sum(1 for d, *_ in rows if any(classify_prime(P, q).in_omega for q in _factors(d)))
    assert r.n_Omega + with_omega == r.population
    for k in r.m_EN:
        assert k >= P.lambda2 and (k - P.lambda2) % 2 == 0
    for v in (r.n_E1_lower, r.n_Omega, r.n_prime_1):
        assert 0 <= v <= r.population
    assert all(0 <= x <= 1 for x in r.prime_counts["densities"].values())
    for fit in r.fit.values():
        assert all(x > 0 for _, x in fit.get("ratio_series", []))


def _factors(d):
    out, p = [], 3
    while p * p <= d:
        if d % p == 0:
            out.append(p)
            d //= p
        p += 2
    if d > 1:
        out.append(d)
    return out


def test_population_matches_naive_count(e53):
    r = squarefree_census(e53, 5000)
    naive = sum(
        1 for d in range(1, 5001)
        if d % 2 and d % 53 and all(d % (p * p) for p in range(2, math.isqrt(d) + 1))
    )
    assert r.population == naive


def test_15a7_n_omega_is_one(e15):
    r = squarefree_census(e15, 10**5)
    assert r.n_Omega == 1
    assert all(v == 1 for _, v in r.series["n_Omega"])
    assert any("degenerate" in m for m in r.fit["n_Omega"]["diagnostics"])


def test_17a4_targets(e17):
    r = squarefree_census(e17, 10**5, targets=[0, 2])
    assert r.m_EN[0] > 0 and r.m_EN[2] > 0
    assert all(k % 2 == 0 for k in r.m_EN)


def test_prime_census_matches_scalar(e53, e15):
    for P in (e53, e15):
        pc = prime_census(P, 5000)
        recs = [classify_prime(P, int(l)) for l in good_primes(P, 5000)]
        assert pc.population == len(recs)
        assert pc.counts["omega"] == sum(r.in_omega for r in recs)
        assert pc.counts["M"] == sum(r.in_M for r in recs)
        assert pc.counts["P"] == sum(r.in_P for r in recs)
        assert pc.counts["Q"] == sum(r.in_Q_construct for r in recs)


def test_prime_census_rows(e53):
    rows = []
    prime_census(e53, 200, row_sink=lambda t: rows.extend(census.prime_rows(t)))
    assert kronecker_symbol_ref(-53, 3) == 1
    assert rows[0] == (3, 3, 1, 0, 0, 0, 0)
    assert len(rows) == len(good_primes(e53, 200))


def kronecker_symbol_ref(a, p):
    return 1 if any((x * x - a) % p == 0 for x in range(1, p)) else -1


def test_density_convergence(e53):
    d1 = prime_census(e53, 10**6).densities
    d2 = prime_census(e53, 5 * 10**5).densities
    for k in d1:
        assert abs(d1[k] - d2[k]) < 0.02


def test_worker_and_block_independence(e53, monkeypatch):
    base = squarefree_census(e53, 60000, targets=[1, 3, 5], workers=1).to_json()
    monkeypatch.setattr(census, "BLOCK", 4096)
    assert squarefree_census(e53, 60000, targets=[1, 3, 5], workers=1).to_json() == base
    assert squarefree_census(e53, 60000, targets=[1, 3, 5], workers=3).to_json() == base
    p1 = prime_census(e53, 10**5, workers=1)
    p3 = prime_census(e53, 10**5, workers=3)
    assert p1 == p3


def test_report_json_is_stable(e53):
    r = squarefree_census(e53, 1000, targets=[1])
    doc = json.loads(r.to_json())
    assert doc["X"] == 1000 and doc["m_EN"]["1"] == r.m_EN[1]
    assert list(doc) == sorted(doc)


def test_guards_and_hypotheses(e53):
    with pytest.raises(ResourceLimitExceeded):
        squarefree_census(e53, 10**7 + 1)
    with pytest.raises(ResourceLimitExceeded):
        prime_census(e53, 10**6 + 1)
    with pytest.raises(HypothesisViolated):
        squarefree_census(e53, 100, targets=[2])
    with pytest.raises(HypothesisViolated):
        squarefree_census(build_profile(curve([0, 0, 1, -1, 0]), mu2=0, lambda2=0), 100)


def test_checkpoints():
    assert default_checkpoints(1000) == [100, 178, 316, 562, 1000]
    assert default_checkpoints(1500)[-1] == 1500
    assert default_checkpoints(10) == [10]


def _planted(alpha, c=1.0):
    xs = [int(round(10 ** (k / 4))) for k in range(12, 29)]
    return [(x, max(1, int(round(c * x / math.log(x) ** alpha)))) for x in xs]


@pytest.mark.parametrize("alpha", [1 / 3, 2 / 3, 11 / 12])
def test_fit_recovers_planted_exponent(alpha):
    f = asymptotic_fit(_planted(alpha, 2.5), alpha)
    assert abs(f.exponent_hat - alpha) < 0.02
    assert abs(f.c_hat - 2.5) < 0.1
    assert ratio_variation(f.ratio_series, 10**3, 10**7) < 0.01


def test_fit_constant_and_insufficient():
    f = asymptotic_fit([(10**k, 7) for k in range(2, 8)])
    assert any("degenerate" in m for m in f.diagnostics)
    with pytest.raises(InsufficientData):
        asymptotic_fit(_planted(0.5)[:4])
    with pytest.raises(InsufficientData):
        asymptotic_fit([(1000 + k, 10) for k in range(10)])
    with pytest.raises(InsufficientData):
        asymptotic_fit([(10**k, 0) for k in range(2, 8)])
    with pytest.raises(InsufficientData):
        ratio_variation([(10, 1.0)], 100, 1000)


def test_fit_on_53a1_n_omega(e53):
    r = squarefree_census(e53, 10**6)
    f = r.fit["n_Omega"]
    assert f["alpha_expected"] == pytest.approx(2 / 3)
    assert ratio_variation(f["ratio_series"], 10**4, 10**6) < 0.25
    assert np.isfinite(f["exponent_hat"])


def test_53a1_m_density_is_one_sixth(e53):
    # disc(53a1) = -53 = -N, so Q(sqrt(disc)) sits inside Q(i, sqrt(-N)) and
    # the compositum with Q(E[2]) has degree 12 with two admissible Frobenius classes
    assert e53.curve.disc == -e53.conductor
    d = prime_census(e53, 10**6).densities["M"]
    assert abs(d - 1 / 6) < 0.005
    assert d >= 1 / 12
