import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mfcorr import multfun as M
from mfcorr.errors import DescriptorError, DomainError

import oracles

BUILTINS = ["liouville", "moebius", "one", "mu_squared", "archimedean:0.5", "archimedean:-2.25",
            "root_twist:3", "root_twist:5:2", "root_twist:2", "dirichlet:4:1", "dirichlet:7:2",
            "dirichlet:12:3", "dirichlet:1:0"]


def test_dirichlet_mod4():
    chi = M.make_builtin("dirichlet", 4, 1)
    assert M.eval(chi, 3) == -1 and M.eval(chi, 2) == 0 and M.eval(chi, 5) == 1


def test_one_and_root_twist():
    assert all(M.eval(M.ONE, n) == 1 for n in range(1, 50))
    f = M.make_builtin("root_twist", 3)
    w = cmath.exp(2j * math.pi / 3)
    for p in (2, 3, 5, 101):
        assert abs(M.eval(f, p) - w) < 1e-15
    assert abs(M.eval(f, 12) - w**3) < 1e-15


def test_eval_examples():
    assert M.eval(M.LIOUVILLE, 12) == -1
    for d in BUILTINS:
        assert M.eval(M.parse_function(d), -5) == 0 and M.eval(M.parse_function(d), 0) == 0
    assert abs(M.eval(M.make_builtin("archimedean", 1), 2) - cmath.exp(1j * math.log(2))) < 1e-15


def test_eval_range_examples(sieve):
    assert M.eval_range(M.MOEBIUS, 1, 6, sieve).real.tolist() == [1, -1, -1, 0, -1, 1]
    assert np.all(M.eval_range(M.ONE, 77, 1000, sieve) == 1)
    chi = M.parse_function("dirichlet:4:1")
    assert M.eval_range(chi, 1, 8, sieve).real.tolist() == [1, 0, -1, 0, 1, 0, -1, 0]
    with pytest.raises(DomainError):
        M.eval_range(M.ONE, 1, sieve.limit + 1, sieve)


def test_invalid_parameters():
    for bad in [("root_twist", 1), ("root_twist", 3, 3), ("dirichlet", 0, 0), ("dirichlet", 5, 4),
                ("archimedean", float("inf")), ("liouville", 2)]:
        with pytest.raises(DomainError):
            M.make_builtin(*bad)


@pytest.mark.parametrize("text", BUILTINS)
def test_descriptor_roundtrip(text):
    f = M.parse_function(text)
    assert M.parse_function(f.descriptor) == f
    assert f.descriptor == text


@pytest.mark.parametrize("text", ["dirichlet:4", "root_twist", "archimedean:x", "zeta", "one:1",
                                  "dirichlet:4:9"])
def test_descriptor_errors(text):
    with pytest.raises(DescriptorError):
        M.parse_function(text)


@pytest.mark.parametrize("text", BUILTINS)
def test_eval_range_matches_eval(sieve, text):
    f = M.parse_function(text)
    vals = M.eval_range(f, 1, 10**5, sieve)
    idx = np.r_[0:3000, 99000:10**5]
    ref = np.array([M.eval(f, int(n) + 1) for n in idx])
    assert np.max(np.abs(vals[idx] - ref)) <= 1e-12
    assert np.max(np.abs(vals)) <= 1 + 1e-12


def test_eval_range_full_liouville_moebius(sieve):
    lam = M.eval_range(M.LIOUVILLE, 1, 5000, sieve).real
    mu = M.eval_range(M.MOEBIUS, 1, 5000, sieve).real
    assert lam.tolist() == [oracles.liouville(n) for n in range(1, 5001)]
    assert mu.tolist() == [oracles.mobius(n) for n in range(1, 5001)]


def test_custom_rule(sieve):
    f = M.custom(lambda p, e: cmath.exp(1j * p * e), completely_multiplicative=False)
    vals = M.eval_range(f, 1, 3000, sieve)
    ref = np.array([M.eval(f, n) for n in range(1, 3001)])
    assert np.max(np.abs(vals - ref)) < 1e-12
    assert M.eval(f, 1) == 1


@pytest.mark.parametrize("text", BUILTINS)
def test_coprime_multiplicativity(sieve, text):
    f = M.parse_function(text)
    vals = M.eval_range(f, 1, sieve.limit, sieve)
    rng = np.random.default_rng(7)
    m = rng.integers(1, 450, size=10**4)
    n = rng.integers(1, 450, size=10**4)
    ok = np.gcd(m, n) == 1
    m, n = m[ok], n[ok]
    assert np.max(np.abs(vals[m * n - 1] - vals[m - 1] * vals[n - 1])) <= 1e-12
    if f.completely_multiplicative:
        m = rng.integers(1, 450, size=2000)
        n = rng.integers(1, 450, size=2000)
        assert np.max(np.abs(vals[m * n - 1] - vals[m - 1] * vals[n - 1])) <= 1e-12


@pytest.mark.parametrize("q", [1, 3, 4, 5, 8, 9, 12, 15, 16, 21, 24, 25, 60])
def test_character_axioms(q):
    chars = M.characters(q)
    assert len(chars) == sum(1 for r in range(1, q + 1) if math.gcd(r, q) == 1)
    tables = []
    for chi in chars:
        assert chi(1) == 1
        for n in range(1, 200):
            assert chi(n + q) == chi(n)
            assert (chi(n) == 0) == (math.gcd(n, q) > 1)
            for m in (2, 3, 7, 11):
                assert abs(chi(m * n) - chi(m) * chi(n)) < 1e-12
        tables.append(chi.table)
    # orthogonality: distinct characters
    g = np.array(tables) @ np.array(tables).conj().T
    assert np.allclose(g, np.eye(len(chars)) * len(chars))


def test_character_periodicity_long():
    chi = M.character(12, 3)
    for n in range(1, 10**4 + 1):
        assert chi(n + 12) == chi(n)


def test_conductors():
    assert [c.conductor for c in M.characters(8)] == [1, 4, 8, 8]
    assert sum(c.is_primitive for c in M.characters(16)) == 4
    assert M.character(9, 0).conductor == 1 and M.character(3, 1).is_primitive


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(BUILTINS), st.integers(1, 10**9))
def test_modulus_bounded(text, n):
    assert abs(M.eval(M.parse_function(text), n)) <= 1 + 1e-12


def test_prime_values(sieve):
    primes = sieve.primes_up_to(2000)
    for text in BUILTINS:
        f = M.parse_function(text)
        pv = M.prime_values(f, primes)
        ref = np.array([M.eval(f, int(p)) for p in primes])
        assert np.max(np.abs(pv - ref)) < 1e-12


def test_is_real_flags():
    assert M.parse_function("dirichlet:4:1").is_real
    assert not M.parse_function("dirichlet:5:1").is_real
    assert M.parse_function("root_twist:2").is_real and not M.parse_function("root_twist:3").is_real
    assert M.LIOUVILLE.is_sign_valued and not M.MOEBIUS.is_sign_valued
