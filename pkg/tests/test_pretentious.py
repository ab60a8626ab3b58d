import math

import numpy as np
import pytest

from mfcorr import _accel, _kernels
from mfcorr import multfun as M
from mfcorr import pretentious as P
from mfcorr.errors import DomainError
from mfcorr.sieve import build_sieve


@pytest.fixture(scope="module")
def big():
    return build_sieve(10**6)


def test_distance_examples(sieve):
    ref = 2 * math.fsum([1 / 2, 1 / 3, 1 / 5, 1 / 7])
    assert abs(P.pretentious_distance_sq(M.LIOUVILLE, M.ONE, 10, sieve) - 2.3523809524) <= 1e-9
    assert P.pretentious_distance_sq(M.LIOUVILLE, M.ONE, 10, sieve) == ref
    for n in (10, 1000, sieve.limit):
        assert P.pretentious_distance_sq(M.MOEBIUS, M.LIOUVILLE, n, sieve) == 0.0
        for text in ("archimedean:0.7", "root_twist:5", "liouville"):
            f = M.parse_function(text)
            assert P.pretentious_distance_sq(f, f, n, sieve) <= 1e-15
    # chi(7) = 0 contributes the full weight 1/7
    chi = M.parse_function("dirichlet:7:3")
    assert abs(P.pretentious_distance_sq(chi, chi, 1000, sieve) - 1 / 7) <= 1e-15


def test_distance_mu_lambda_million(big):
    assert P.pretentious_distance_sq(M.MOEBIUS, M.LIOUVILLE, 10**6, big) == 0.0


def test_triangle_inequality(sieve):
    primes = sieve.primes_up_to(10**4)
    rng = np.random.default_rng(17)
    for _ in range(1000):
        f, g, h = (np.exp(2j * np.pi * rng.random(len(primes))) for _ in range(3))
        d = lambda a, b: P.pretentious_distance(a, b, 10**4, sieve)
        assert d(f, h) <= d(f, g) + d(g, h) + 1e-12


def test_monotone_in_n(sieve):
    f = M.parse_function("archimedean:2.5")
    vals = [P.pretentious_distance_sq(f, M.LIOUVILLE, n, sieve) for n in range(2, 3000, 7)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_similarity_defect(sieve):
    f = M.parse_function("root_twist:3")
    assert P.similarity_defect(f, f, 10**5, sieve) <= 1e-15
    assert P.similarity_defect(M.LIOUVILLE, M.ONE, 10**5, sieve) == 2.0
    assert abs(P.similarity_defect(f, M.ONE, 10**5, sieve) - 1.5) <= 1e-14


def test_twist_config_validation():
    with pytest.raises(DomainError):
        P.TwistSearchConfig(t_max=1, grid_step=2)
    with pytest.raises(DomainError):
        P.TwistSearchConfig(refine=-1)
    assert P.TwistSearchConfig().half_width == 10000


def test_archimedean_min_examples(sieve):
    cfg = P.TwistSearchConfig(t_max=5, grid_step=0.01)
    t, v = P.archimedean_min(M.make_builtin("archimedean", 0.5), 10**5, cfg, sieve)
    assert abs(t - 0.5) < 1e-6 and 0 <= v <= 1e-6
    t, v = P.archimedean_min(M.ONE, 10**5, cfg, sieve)
    assert t == 0.0 and v == 0.0


def test_archimedean_min_liouville(big):
    t, v = P.archimedean_min(M.LIOUVILLE, 10**6, P.TwistSearchConfig(), big)
    assert v >= 1.0
    assert v <= P.pretentious_distance_sq(M.LIOUVILLE, M.ONE, 10**6, big)


def test_min_never_exceeds_t0(sieve):
    rng = np.random.default_rng(4)
    primes = sieve.primes_up_to(20000)
    cfg = P.TwistSearchConfig(t_max=10, grid_step=0.05)
    for _ in range(5):
        vals = np.exp(2j * np.pi * rng.random(len(primes)))
        res = P.archimedean_min_trace(vals, "100:10:20000", cfg, sieve)
        for r in res:
            assert 0 <= r.value <= r.value_at_zero
            assert r.value_at_zero == P.pretentious_distance_sq(vals, M.ONE, r.n, sieve)


def test_grid_against_direct_oracle(sieve):
    primes = sieve.primes_up_to(5000)
    vals = M.prime_values(M.parse_function("dirichlet:5:1"), primes)
    cfg = P.TwistSearchConfig(t_max=3, grid_step=0.25, refine=0)
    t, v = P.archimedean_min(vals, 5000, cfg, sieve)
    grid = {k * 0.25: P.pretentious_distance_sq(vals, np.exp(1j * k * 0.25 * np.log(primes)), 5000, sieve)
            for k in range(-12, 13)}
    tb = min(grid, key=lambda x: (grid[x], x))
    assert t == tb and abs(v - grid[tb]) < 1e-12


def test_trace_matches_single_runs(sieve):
    cfg = P.TwistSearchConfig(t_max=4, grid_step=0.02)
    res = P.archimedean_min_trace(M.LIOUVILLE, "1000:10:100000", cfg, sieve)
    for r in res:
        t, v = P.archimedean_min(M.LIOUVILLE, r.n, cfg, sieve)
        assert abs(v - r.value) < 1e-12


def test_twist_backends_agree(sieve):
    primes = sieve.primes_up_to(50000).astype(float)
    rng = np.random.default_rng(1)
    z = np.exp(2j * np.pi * rng.random(len(primes)))
    args = (z.real, z.imag, np.log(primes), 1 / primes, -5000, 10001, 0.01, np.array([10, 100, len(primes)]))
    out = {}
    for b in ("numba", "numpy"):
        with _accel.use_backend(b):
            out[b] = _kernels.twist_grid(*args)
    assert np.max(np.abs(out["numba"] - out["numpy"])) < 1e-10


def test_scan_characters():
    chars = P.scan_characters(8)
    assert [(c.q, c.index) for c in chars][:4] == [(1, 0), (2, 0), (3, 0), (3, 1)]
    assert len(chars) == 20
    assert all(c.is_principal or c.is_primitive for c in chars)


def test_scan_principal_and_one(sieve):
    cfg = P.TwistSearchConfig(t_max=5, grid_step=0.05)
    scan = P.aperiodicity_scan(M.ONE, 4, "100:10:100000", cfg, sieve)
    row = next(r for r in scan.rows if (r["modulus"], r["character"]) == (1, 0))
    assert row["values"] == [0.0] * 4 and not row["increasing"]
    assert not scan.strongly_aperiodic
    chi0 = M.make_builtin("dirichlet", 5, 0)
    scan = P.aperiodicity_scan(chi0, 5, "100:10:100000", cfg, sieve)
    bounded = [r for r in scan.failing() if max(r["values"]) < 1.0]
    assert bounded
    lines = scan.to_csv().splitlines()
    assert lines[0] == "modulus,character,N,value" and len(lines) == 1 + 4 * len(scan.rows)


@pytest.mark.slow
def test_scan_liouville_grows(big):
    scan = P.aperiodicity_scan(M.LIOUVILLE, 8, "10000:10:1000000", P.TwistSearchConfig(), big)
    assert len(scan.rows) == 20
    assert scan.strongly_aperiodic
