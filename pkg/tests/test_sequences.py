import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mfcorr import _accel
from mfcorr import sequences as S
from mfcorr.errors import DescriptorError, DomainError, RangeError, ResourceError


def fam(text):
    return S.SequenceFamily.parse(text)


def test_constants():
    assert S.Constant("3/2").exact == S.Constant("1.5").exact == 1.5
    assert S.Constant("sqrt4").is_rational and S.Constant("sqrt4").exact == 2
    assert abs(S.Constant("sqrt2-1").float - (math.sqrt(2) - 1)) < 1e-15
    assert abs(S.Constant("2*pi").float - 2 * math.pi) < 1e-15
    assert abs(S.Constant("phi").float - (1 + 5**0.5) / 2) < 1e-15
    assert abs(S.Constant("e+1/2").float - (math.e + 0.5)) < 1e-15
    for bad in ["sqrt", "2pi", "pi*2", "x", "1/0"]:
        with pytest.raises(DomainError):
            S.Constant(bad)


def test_evaluate_examples():
    f = fam("beatty:sqrt2:0;poly:0,0,1;powerfloor:3/2")
    assert [S.evaluate(f, 0, n) for n in range(1, 6)] == [1, 2, 4, 5, 7]
    assert S.evaluate(f, 1, 7) == 49
    assert S.evaluate(f, 2, 4) == 8
    with pytest.raises(DomainError):
        S.evaluate(f, 3, 1)


def test_beatty_exact_against_mpmath():
    b = S.Beatty("sqrt2")
    n = np.r_[1:2000, 10**8 - 2000:10**8, 10**12:10**12 + 500]
    got = b.values(n)
    with mpmath.workprec(300):
        ref = [int(mpmath.floor(int(k) * mpmath.sqrt(2))) for k in n]
    assert got.tolist() == ref


def pell_solutions(limit):
    # p^2 - 2 q^2 = +-1, the convergents of sqrt2
    p, q = 1, 1
    while q < limit:
        yield p, q
        p, q = p + 2 * q, p + q


def test_beatty_boundary_guard():
    # q sqrt2 lies within 1/(2 sqrt2 q) of the integer p; for q ~ 1e18 that is
    # far below the 64-bit fraction resolution, so the mpmath guard decides
    pairs = [(p, q) for p, q in pell_solutions(3 * 10**18) if q > 10**6]
    got = S.Beatty("sqrt2").values(np.array([q for _, q in pairs]))
    for (p, q), v in zip(pairs, got.tolist()):
        assert v == (p - 1 if p * p - 2 * q * q == 1 else p)
    assert S.Beatty("1/3").values(np.array([3, 6, 299999999999])).tolist() == [1, 2, 99999999999]


def test_floor_kernels_bit_identical():
    n = np.arange(1, 200000, dtype=np.int64) * 7919
    out = {}
    for name in ("numba", "numpy"):
        with _accel.use_backend(name):
            out[name] = S.Beatty("pi", "sqrt3-1").values(n)
    assert np.array_equal(out["numba"], out["numpy"])


def test_overflow():
    with pytest.raises(OverflowError):
        S.Beatty("sqrt2").values(np.array([2**62]))
    with pytest.raises(OverflowError):
        S.Polynomial([0, 0, 0, 1]).values(np.array([10**7]))
    with pytest.raises(OverflowError):
        S.PowerFloor("2.5").values(np.array([10**8]))


def test_powerfloor_exact_points():
    p = S.PowerFloor("3/2")
    n = np.arange(1, 5000)
    ref = [math.isqrt(k**3) for k in range(1, 5000)]
    assert p.values(n).tolist() == ref


def test_visit_times_examples():
    assert S.visit_times(1, "sqrt2-1", 0, "0.5", 3).tolist() == [1, 3, 5]
    assert S.visit_times(1, "pi", 0, 1, 6).tolist() == [1, 2, 3, 4, 5, 6]
    with mpmath.workprec(200):
        first = next(n for n in range(1, 1000) if mpmath.frac(n * n * mpmath.sqrt(2)) < 0.5)
    assert S.visit_times(2, "sqrt2", 0, "0.5", 1).tolist() == [first]
    with pytest.raises(RangeError):
        S.visit_times(1, "1/2", "0.1", "0.2", 5, search_cap=1000)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.sampled_from(["sqrt2", "sqrt3", "pi", "phi", "sqrt7-2"]),
       st.fractions(0, 1, max_denominator=20), st.fractions(0, 1, max_denominator=20))
def test_visit_times_property(d, alpha, b, c):
    if b >= c:
        b, c = c, b
    if b == c:
        return
    v = S.visit_times(d, alpha, str(b), str(c), 50)
    assert np.all(np.diff(v) > 0)
    with mpmath.workprec(300):
        a = S.Constant(alpha).value(300)
        b, c = mpmath.mpf(b.numerator) / b.denominator, mpmath.mpf(c.numerator) / c.denominator
        for m in v.tolist():
            assert b <= mpmath.frac(m**d * a) < c
        # nothing skipped
        hits = [m for m in range(1, int(v[-1]) + 1) if b <= mpmath.frac(m**d * a) < c]
    assert hits == v.tolist()


def test_descriptor_roundtrip():
    text = "beatty:sqrt2:0;powerfloor:1.5;poly:0,0,1;visit:1:sqrt2:0:0.5;explicit:1,5,9"
    f = fam(text)
    assert f.descriptor == text
    assert fam(f.descriptor).descriptor == text
    assert S.parse_sequence("linform:1,0").arity == 2
    for bad in ["beatty", "poly:x", "visit:1:sqrt2:0", "spline:1", "beatty:-1"]:
        with pytest.raises(DescriptorError):
            S.parse_sequence(bad)
    with pytest.raises(DomainError):
        fam("linform:1,0;poly:0,1")


def test_independence_examples():
    for text in ("poly:0,1;poly:0,2", "linform:1;linform:2"):
        rep = S.check_independence(fam(text), 2, 100)
        assert not rep.verdict and rep.counterexample == (2, -1)
        assert rep.entry((2, -1))["count"] == 100
    rep = S.check_independence(fam("beatty:sqrt2;beatty:sqrt3"), 3, 10**5)
    assert rep.verdict and max(e["largest"] for e in rep.entries) <= 10
    rep = S.check_independence(fam("poly:0,1;poly:0,0,1"), 7, 10)
    assert rep.verdict and rep.certificate.startswith("exact") and "rank 2" in rep.certificate


def test_independence_covers_all_k():
    rep = S.check_independence(fam("beatty:sqrt2;beatty:sqrt3;beatty:sqrt5"), 2, 1000)
    ks = {e["k"] for e in rep.entries}
    box = {k for k in np.ndindex(5, 5, 5)}
    box = {tuple(x - 2 for x in k) for k in box} - {(0, 0, 0)}
    assert {k for k in box if k in ks or tuple(-x for x in k) in ks} == box
    assert len(ks) == len(box) // 2


@pytest.mark.parametrize("text", ["poly:0,1;poly:0,0,1", "poly:0,1;poly:0,2", "poly:1,1;poly:0,0,2;poly:0,3",
                                  "poly:0,2,1;poly:0,4,2", "poly:0,0,1;poly:0,1,1"])
def test_exact_and_enumeration_agree(text):
    f = fam(text)
    exact = S.check_independence(f, 3, 10**4)
    enum = S.check_independence(f, 3, 10**4, exact=False)
    assert exact.verdict == enum.verdict
    if not exact.verdict:
        assert enum.entry(exact.counterexample)["count"] == 10**4


@pytest.mark.parametrize("text", ["beatty:sqrt2;beatty:sqrt3", "powerfloor:3/2;powerfloor:5/2",
                                  "poly:0,1;poly:0,0,1"])
def test_paper_families_pass(text):
    assert S.check_independence(fam(text), 5, 10**6).verdict


def test_linear_forms_exact_classification():
    rep = S.check_independence(fam("linform:1,0;linform:0,1"), 1, 100)
    assert not rep.verdict and rep.counterexample == (1, -1)
    rep = S.check_independence(fam("linform:1,1;linform:1,2"), 2, 100)
    assert rep.verdict  # no |k| <= 2 combination has mixed signs
    rep = S.check_independence(fam("linform:1,1;linform:1,2"), 3, 100)
    assert not rep.verdict and rep.counterexample == (3, -2)


def test_weak_independence_examples():
    rep = S.check_weak_independence(fam("linform:1,0;linform:0,1"), 1, 200)
    assert rep.verdict
    assert rep.entry((1, -1))["density"] == 1 / 200
    rep = S.check_weak_independence(fam("poly:0,1;poly:0,2"), 2, 200)
    assert not rep.verdict and rep.entry((2, -1))["density"] == 1.0
    rep = S.check_weak_independence(fam("poly:0,1;poly:1,1"), 1, 200)
    assert rep.entry((1, -1))["density"] == 0.0 and rep.verdict


def test_congruence_equidistribution():
    stat, u, k = S.check_congruence_equidistribution(fam("poly:0,1"), 2, 1001)
    assert stat <= 1 / 1001 + 1e-15
    stat, u, k = S.check_congruence_equidistribution(fam("poly:0,1;poly:0,2"), 2, 1000)
    assert stat == pytest.approx(1.0) and (u, k) == (2, (0, 1))
    stat, _, _ = S.check_congruence_equidistribution(fam("beatty:sqrt2;beatty:sqrt3"), 6, 10**6)
    assert stat <= 0.01
    with pytest.raises(ResourceError):
        S.check_congruence_equidistribution(fam("poly:0,1;poly:0,1;poly:0,1"), 400, 10)


def test_congruence_brute_force():
    f = fam("beatty:sqrt2;poly:0,0,1")
    stat, u, k = S.check_congruence_equidistribution(f, 4, 500)
    a = [m.values(np.arange(1, 501)) for m in f.members]
    best = 0.0
    for uu in range(2, 5):
        for kk in np.ndindex(uu, uu):
            if any(kk):
                best = max(best, abs(np.mean(np.exp(2j * np.pi * (kk[0] * a[0] + kk[1] * a[1]) / uu))))
    assert stat == pytest.approx(best, abs=1e-12)
    val = abs(np.mean(np.exp(2j * np.pi * (k[0] * a[0] + k[1] * a[1]) / u)))
    assert val == pytest.approx(stat, abs=1e-12)


def test_word_complexity():
    w = np.tile([0, 1], 500)
    assert S.word_complexity(w, 3) == 2
    assert S.word_complexity(np.zeros(100), 7) == 1
    rng = np.random.default_rng(0)
    r = rng.integers(0, 2, 5000)
    assert S.word_complexity(r, 70) == len({tuple(r[i:i + 70]) for i in range(5000 - 69)})
    b = S.Beatty("sqrt2").values(np.arange(1, 80000))
    ind = S.indicator_of_range(b, 10**5)
    assert S.word_complexity(ind, 10, 10**5) <= 2 * 10


def test_indicator_of_range():
    assert S.indicator_of_range(2 * np.arange(1, 4), 6).tolist() == [0, 1, 0, 1, 0, 1]
    assert S.indicator_of_range(np.arange(1, 11), 10).tolist() == [1] * 10
    b = S.Beatty("sqrt2").values(np.arange(1, 7))
    assert S.indicator_of_range(b, 8).tolist() == [1, 1, 0, 1, 1, 0, 1, 1]
    with pytest.raises(DomainError):
        S.indicator_of_range([1, 3, 2], 5)


def test_beatty_density():
    n = 10**6
    alpha = math.sqrt(2)
    ind = S.indicator_of_range(S.Beatty("sqrt2").values(np.arange(1, n)), n)
    assert abs(ind.sum() / n - 1 / alpha) <= 10 / n * alpha
