import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mfcorr import _accel
from mfcorr.errors import DomainError, ResourceError
from mfcorr.sieve import ArithmeticTable, SegmentedFactorSieve, build_sieve

import oracles

N_EXHAUSTIVE = 10**5


@pytest.fixture(scope="module")
def oracle_tables():
    om = np.array([oracles.big_omega(n) for n in range(1, N_EXHAUSTIVE + 1)])
    mu = np.array([oracles.mobius(n) for n in range(1, N_EXHAUSTIVE + 1)])
    return om, mu


def test_base_primes():
    assert build_sieve(100).base_primes.tolist() == [2, 3, 5, 7]
    assert build_sieve(2).base_primes.tolist() == []
    assert build_sieve(10**8).base_primes.tolist() == oracles.naive_primes(10**4)


def test_limit_validation():
    with pytest.raises(DomainError):
        build_sieve(1)
    with pytest.raises(ResourceError, match="budget of 1000 bytes"):
        build_sieve(10**6, memory_budget=1000)


def test_large_limit_spot_check():
    s = build_sieve(10**8)
    n = 10**8 - 1
    t = s.arithmetic_table(n - 5, n)
    assert int(t.lam[-1]) == oracles.liouville(n)
    assert s.factorize(n) == oracles.trial_factor(n)
    assert [int(x) for x in t.lam] == [oracles.liouville(k) for k in range(n - 5, n + 1)]


@pytest.mark.parametrize("n, expected", [(12, [(2, 2), (3, 1)]), (1, []), (97, [(97, 1)])])
def test_factorize_examples(sieve, n, expected):
    assert sieve.factorize(n) == expected


def test_factorize_domain(sieve):
    with pytest.raises(DomainError):
        sieve.factorize(0)
    with pytest.raises(DomainError):
        sieve.factorize(sieve.limit + 1)


def test_primes_up_to(sieve):
    assert sieve.primes_up_to(10).tolist() == [2, 3, 5, 7]
    assert sieve.primes_up_to(20, 4).tolist() == [5, 13, 17]
    assert sieve.primes_up_to(1).tolist() == []
    with pytest.raises(DomainError):
        sieve.primes_up_to(sieve.limit + 1)


def test_prime_count_million():
    assert len(build_sieve(10**6).primes_up_to(10**6)) == len(oracles.naive_primes(10**6)) == 78498


def test_table_examples(sieve):
    assert sieve.arithmetic_table(1, 10).lam.tolist() == [1, -1, -1, 1, -1, 1, -1, -1, 1, 1]
    assert sieve.arithmetic_table(4, 4).mobius.tolist() == [0]
    with pytest.raises(DomainError):
        sieve.arithmetic_table(0, 5)
    with pytest.raises(DomainError):
        sieve.arithmetic_table(5, sieve.limit + 1)


def test_exhaustive_against_trial_division(backend, oracle_tables):
    om, mu = oracle_tables
    t = SegmentedFactorSieve(N_EXHAUSTIVE, segment_size=4096).sieve(1, N_EXHAUSTIVE)
    assert np.array_equal(t.big_omega, om)
    assert np.array_equal(t.mobius, mu)
    assert np.array_equal(t.lam, np.where(om % 2, -1, 1))
    spf = np.array([oracles.trial_factor(n)[0][0] if n > 1 else 1 for n in range(1, 3001)])
    assert np.array_equal(t.spf[:3000], spf)


def test_table_invariants(sieve):
    t = sieve.arithmetic_table(1, 50000)
    assert np.array_equal(t.lam, (-1) ** t.big_omega.astype(np.int64))
    squarefree = t.mobius != 0
    assert np.array_equal(t.mobius[squarefree], t.lam[squarefree])


def test_mobius_divisor_sum(sieve):
    for n in range(1, 10**4 + 1):
        fac = sieve.factorize(n)
        divisors = [1]
        for p, e in fac:
            divisors = [d * p**j for d in divisors for j in range(e + 1)]
        mus = sieve.arithmetic_table(1, n).mobius[np.array(divisors) - 1]
        assert int(mus.sum()) == (1 if n == 1 else 0)


@settings(max_examples=40, deadline=None)
@given(cuts=st.lists(st.integers(1, 29999), max_size=6, unique=True),
       seg=st.integers(1, 5000))
def test_segmentation_independence(sieve, cuts, seg):
    whole = sieve.sieve(1, 30000)
    bounds = [1] + sorted(c + 1 for c in cuts) + [30001]
    parts = [sieve.sieve(a, b - 1, segment_size=seg) for a, b in zip(bounds, bounds[1:])]
    for name in ("big_omega", "mobius", "spf"):
        assert np.array_equal(getattr(whole, name), np.concatenate([getattr(p, name) for p in parts]))


def test_backends_bit_identical(sieve):
    res = {}
    for b in ("numba", "numpy"):
        with _accel.use_backend(b):
            res[b] = sieve.sieve(123456, 199999, segment_size=7777)
    for name in ("big_omega", "mobius", "spf"):
        assert np.array_equal(getattr(res["numba"], name), getattr(res["numpy"], name))


def test_threads_do_not_change_tables(sieve):
    before = _accel.get_threads()
    try:
        _accel.set_threads(1)
        a = sieve.sieve(1, 100000, segment_size=1000)
    finally:
        _accel.set_threads(before)
    b = sieve.sieve(1, 100000, segment_size=1000)
    assert np.array_equal(a.big_omega, b.big_omega) and np.array_equal(a.spf, b.spf)


def test_dump_load_roundtrip(sieve, tmp_path):
    t = sieve.arithmetic_table(1000, 5000)
    path = tmp_path / "t.bin"
    t.dump(path)
    raw = path.read_bytes()
    assert raw[:4] == b"MFCT"
    assert int.from_bytes(raw[8:16], "little") == 1000
    u = ArithmeticTable.load(path)
    assert (u.lo, u.hi) == (1000, 5000)
    assert np.array_equal(u.spf, t.spf) and np.array_equal(u.mobius, t.mobius)


def test_disk_cache(tmp_path):
    s = SegmentedFactorSieve(5000, cache_dir=tmp_path)
    t = s.prefix_table(100)
    files = list(tmp_path.iterdir())
    assert [f.name for f in files] == ["mfcorr-sieve-v1-5000.bin"]
    s2 = SegmentedFactorSieve(5000, cache_dir=tmp_path)
    assert np.array_equal(s2.prefix_table(5000).big_omega[:100], t.big_omega)
