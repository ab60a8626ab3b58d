import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mfcorr import ergodic as E
from mfcorr.errors import DomainError
from mfcorr.sieve import build_sieve


@pytest.fixture(scope="module")
def big():
    return build_sieve(10**6)


def test_frac_phase_exact():
    n = np.arange(0, 1000)
    assert np.array_equal(E.frac_phase(n, "3/7"), (n * 3 % 7) / 7)
    assert np.array_equal(E.frac_phase(n, Fraction(5, 4), "1/4"), ((5 * n + 1) % 4) / 4)
    with mpmath.workprec(200):
        ref = [float(k * mpmath.sqrt(2) % 1) for k in (1, 10**6, 10**12)]
    got = E.frac_phase(np.array([1, 10**6, 10**12]), "sqrt2")
    assert np.max(np.abs(got - ref)) < 1e-15
    with pytest.raises(DomainError):
        E.frac_phase([-1], "sqrt2")


def test_weyl_examples():
    assert E.weyl_sum(0, 10) == 1
    assert abs(E.weyl_sum("1/2", 1000)) < 1e-15
    v = E.weyl_sum("sqrt2", 10**4)
    assert abs(v) <= 1 / (2 * 10**4 * (math.sqrt(2) - 1))


def test_weyl_matches_geometric_sum():
    for theta in ("sqrt3", "1/7", "0.123"):
        t = float(E.Constant(theta).value(100))
        n = 977
        z = np.exp(2j * np.pi * t)
        ref = z * (1 - z**n) / (1 - z) / n
        assert abs(E.weyl_sum(theta, n) - ref) < 1e-12


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=-50, max_value=50, allow_nan=False))
def test_weyl_bound(theta):
    n = 10**4
    assert abs(E.weyl_sum(theta, n)) <= E.weyl_bound(theta, n) + 1e-12


def test_prime_phase(big):
    assert E.prime_phase_average(0, 1, 100, big) == 1
    assert abs(E.prime_phase_average("1/3", 1, 10**6, big) + 0.5) <= 0.01
    assert abs(E.prime_phase_average("sqrt2", 4, 10**6, big)) <= 0.02
    with pytest.raises(DomainError):
        E.prime_phase_average("sqrt2", 10**6, 100, big)


def test_prime_phase_oracle(sieve):
    primes = [p for p in range(2, 3000) if all(p % q for q in range(2, int(p**0.5) + 1))]
    sel = [p for p in primes if p % 4 == 1]
    ref = np.mean([np.exp(2j * np.pi * ((p * 7) % 11) / 11) for p in sel])
    assert abs(E.prime_phase_average("7/11", 4, 2999, sieve) - ref) < 1e-14


def test_rotation_analytic_examples():
    rot = E.TorusRotation(1, ["sqrt2"])
    assert E.rotation_correlation(rot, [E.TrigMonomial()] * 3, [0, 4, 9]) == 1
    up, down = E.TrigMonomial(0, (1,)), E.TrigMonomial(0, (-1,))
    for n in (1, 5, 100):
        val = E.rotation_correlation(rot, [up, down], [0, n])
        assert abs(val - np.exp(-2j * np.pi * n * math.sqrt(2))) < 1e-12
    assert E.rotation_correlation(rot, [up, up], [0, 1]) == 0
    cyc = E.TorusRotation(4, ["sqrt3"])
    assert E.rotation_correlation(cyc, [E.TrigMonomial(1, (0,)), E.TrigMonomial(1, (0,))], [0, 1]) == 0
    v = E.rotation_correlation(cyc, [E.TrigMonomial(1, (2,)), E.TrigMonomial(3, (-2,))], [0, 3])
    ref = np.exp(2j * np.pi * (9 / 4 - 6 * math.sqrt(3)))
    assert abs(v - ref) < 1e-12


def test_rotation_shift_invariance_exact():
    rot = E.TorusRotation(3, ["sqrt2", "sqrt5"])
    fs = [E.TrigMonomial(1, (2, 1)), E.TrigMonomial(1, (-1, 0)), E.TrigMonomial(1, (-1, -1))]
    base = E.rotation_correlation(rot, fs, [0, 2, 7])
    for h in (1, 5, 1000):
        assert E.rotation_correlation(rot, fs, [h, 2 + h, 7 + h]) == base


def test_orbit_matches_analytic_random():
    rng = np.random.default_rng(23)
    rot = E.TorusRotation(1, ["sqrt2"])
    for _ in range(20):
        k = int(rng.integers(1, 4))
        ls = list(rng.integers(-3, 4, size=k))
        ls.append(-sum(ls) if rng.random() < 0.7 else int(rng.integers(-3, 4)))
        fs = [E.TrigMonomial(0, (int(x),)) for x in ls]
        shifts = [int(s) for s in rng.integers(0, 20, size=len(fs))]
        a = E.rotation_correlation(rot, fs, shifts)
        o = E.rotation_correlation(rot, fs, shifts, "orbit", 10**6, (0, ("1/3",)))
        assert abs(a - o) <= 1e-3


def test_orbit_cyclic_exact():
    rot = E.TorusRotation(5, [])
    fs = [E.TrigMonomial(2), E.TrigMonomial(3)]
    assert abs(E.rotation_correlation(rot, fs, [0, 4], "orbit", 1000) - E.rotation_correlation(rot, fs, [0, 4])) < 1e-13
    with pytest.raises(DomainError):
        E.rotation_correlation(rot, fs, [0, 1], "orbit")


def test_ergodic_heuristic():
    assert E.TorusRotation(1, ["sqrt2"]).ergodic_heuristic()
    assert E.TorusRotation(1, ["sqrt2", "sqrt3"]).ergodic_heuristic()
    assert not E.TorusRotation(1, ["sqrt2", "2*sqrt2+1/3"]).ergodic_heuristic()
    assert not E.TorusRotation(1, ["2/5"]).ergodic_heuristic()


def test_ergid2_trivial_and_vanishing(sieve):
    rot = E.TorusRotation(1, ["sqrt2"])
    r = E.ergid2_check(rot, [E.TrigMonomial(), E.TrigMonomial()], [0, 1], 3, 1, 1000, 1000, sieve)
    assert r.lhs == r.rhs == r.analytic == 1
    up = E.TrigMonomial(0, (1,))
    r = E.ergid2_check(rot, [up, up], [0, 1], 3, 1, 1000, 1000, sieve)
    assert r.lhs == 0 and r.rhs == 0 and r.analytic == 0
    with pytest.raises(DomainError):
        E.ergid2_check(rot, [up, up], [0, 1], 3, 2, 1000, 0, sieve)


def test_ergid2_oracle(sieve):
    rot = E.TorusRotation(1, ["sqrt2"])
    fs = [E.TrigMonomial(0, (1,)), E.TrigMonomial(0, (-1,))]
    r = E.ergid2_check(rot, fs, [0, 1], 3, 2, 5000, 4000, sieve)
    mpmath.mp.prec = 200
    s2 = mpmath.sqrt(2)
    primes = [p for p in range(2, 5001) if all(p % q for q in range(2, int(p**0.5) + 1)) and p % 3 == 1]
    lhs = np.mean([np.exp(-2j * np.pi * float(p * s2 % 1)) for p in primes])
    ms = [m for m in range(1, 4001) if m % 2 and m % 3 == 1]
    rhs = np.mean([np.exp(-2j * np.pi * float(m * s2 % 1)) for m in ms])
    mpmath.mp.prec = 53
    assert abs(r.lhs - lhs) < 1e-13 and abs(r.rhs - rhs) < 1e-13
    assert r.analytic == 0


def test_ergid2_cyclic_prediction(sieve):
    rot = E.TorusRotation(4, [])
    fs = [E.TrigMonomial(1), E.TrigMonomial(3)]
    r = E.ergid2_check(rot, fs, [0, 1], 1, 4, 10**5, 10**5, sieve)
    # correlation at shifts (0, m) is e(3m/4); odd m average to (e(3/4)+e(9/4))/2 = 0
    assert abs(r.analytic) < 1e-15 and r.gap < 1e-2
    r = E.ergid2_check(rot, fs, [0, 2], 1, 4, 10**5, 10**5, sieve)
    # every odd prime gives -1, the prime 2 gives +1
    assert abs(r.analytic + 1) < 1e-15 and r.gap_rhs < 1e-12
    assert abs(r.gap_lhs - 2 / r.meta["primes"]) < 1e-12


def test_skew_orbit():
    assert E.skew_orbit_average("sqrt2", 0, E.TrigMonomial(0, (0, 0)), 50) == 1
    v = E.skew_orbit_average("sqrt2", 0, E.TrigMonomial(0, (0, 1)), 10**4)
    assert v == E.weyl_sum("sqrt2", 10**4)
    assert abs(v) <= E.weyl_bound("sqrt2", 10**4)
    assert abs(E.skew_orbit_average("2/7", 0, E.TrigMonomial(0, (0, 1)), 14)) < 1e-15
    v = E.skew_orbit_average("2/7", "1/2", E.TrigMonomial(0, (3, 1)), 10)
    ref = np.mean([np.exp(2j * np.pi * (3 * 2 / 7 + 0.5 + 2 * k / 7)) for k in range(1, 11)])
    assert abs(v - ref) < 1e-14
