"""Hot numeric kernels, each with a numba loop version and a numpy version.

Dispatch happens per call through :func:`mfcorr._accel.backend`. The two
versions perform the same floating point operations in the same order, so
compensated sums, sieve tables and fixed-point floors are bit-identical
across backends. The pretentious t-grid is the exception: the numba version
rotates phases incrementally (and is compiled with fastmath) and agrees
with numpy to about 1e-12.

Summation contract: a sum over m = 1..N is cut into blocks of ``BLOCK``
consecutive terms (plus one trailing partial block). Each block is summed
left to right with Neumaier compensation; block results are then combined
by a fixed pairwise TwoSum tree. Block work is independent, so any thread
count gives the same bits.
"""
import numpy as np

from . import _accel
from ._accel import njit, prange

BLOCK = 4096

# ---------------------------------------------------------------------------
# compensated product sums
# ---------------------------------------------------------------------------


@njit
def _twosum_into(buf, n, s, c):
    # Knuth TwoSum gives the same exact error term as the branchy Neumaier
    # step, and a zero term leaves (s, c) unchanged, so this matches the
    # numpy path bit for bit
    for i in range(n):
        p = buf[i]
        t = s + p
        z = t - s
        c += (s - (t - z)) + (p - z)
        s = t
    return s, c


@njit
def _row_sum_nb(tre, tim, cplx, o, m_lo, m_hi, weighted):
    J = o.shape[0]
    n = m_hi - m_lo + 1
    br = np.empty(max(n, 0))
    bi = np.empty(max(n, 0) if cplx else 0)
    k = m_lo + o[0]
    row = tre[0, k:k + n]
    for i in range(n):
        br[i] = row[i]
    if cplx:
        row = tim[0, k:k + n]
        for i in range(n):
            bi[i] = row[i]
    for j in range(1, J):
        k = m_lo + o[j]
        ar = tre[j, k:k + n]
        if cplx:
            ai = tim[j, k:k + n]
            for i in range(n):
                nr = br[i] * ar[i] - bi[i] * ai[i]
                bi[i] = br[i] * ai[i] + bi[i] * ar[i]
                br[i] = nr
        else:
            for i in range(n):
                br[i] *= ar[i]
    if weighted:
        for i in range(n):
            br[i] /= m_lo + i
        if cplx:
            for i in range(n):
                bi[i] /= m_lo + i
    sr, cr = _twosum_into(br, n, 0.0, 0.0)
    si, ci = 0.0, 0.0
    if cplx:
        si, ci = _twosum_into(bi, n, 0.0, 0.0)
    return sr, cr, si, ci


@njit(parallel=True)
def _prod_blocks_nb(tre, tim, cplx, offs, nb, weighted, block):
    R = offs.shape[0]
    sre = np.zeros((R, nb))
    cre = np.zeros((R, nb))
    sim = np.zeros((R, nb))
    cim = np.zeros((R, nb))
    for idx in prange(R * nb):
        r = idx // nb
        b = idx - r * nb
        m0 = b * block + 1
        sr, cr, si, ci = _row_sum_nb(tre, tim, cplx, offs[r].copy(), m0, m0 + block - 1,
                                     weighted)
        sre[r, b] = sr
        cre[r, b] = cr
        sim[r, b] = si
        cim[r, b] = ci
    return sre, cre, sim, cim


@njit
def _prod_range_nb(tre, tim, cplx, offs, r, m_lo, m_hi, weighted):
    return _row_sum_nb(tre, tim, cplx, offs[r].copy(), m_lo, m_hi, weighted)


def _row_products_np(tre, tim, cplx, offs, r, m_lo, m_hi, weighted):
    n = m_hi - m_lo + 1
    lo = m_lo + offs[r, 0]
    pr = tre[0, lo:lo + n].copy()
    pi = tim[0, lo:lo + n].copy() if cplx else None
    for j in range(1, offs.shape[1]):
        lo = m_lo + offs[r, j]
        ar = tre[j, lo:lo + n]
        if cplx:
            ai = tim[j, lo:lo + n]
            nr = pr * ar - pi * ai
            pi = pr * ai + pi * ar
            pr = nr
        else:
            pr = pr * ar
    if weighted:
        m = np.arange(m_lo, m_hi + 1, dtype=np.float64)
        pr = pr / m
        if cplx:
            pi = pi / m
    return pr, pi


def _neumaier_columns(x):
    """Neumaier-sum every row of ``x`` left to right, vectorised over rows."""
    nrows, width = x.shape
    s = np.zeros(nrows)
    c = np.zeros(nrows)
    for i in range(width):
        v = x[:, i]
        t = s + v
        corr = np.where(np.abs(s) >= np.abs(v), (s - t) + v, (v - t) + s)
        nz = v != 0.0
        c = np.where(nz, c + corr, c)
        s = np.where(nz, t, s)
    return s, c


def _neumaier_seq(values):
    s = 0.0
    c = 0.0
    for v in values.tolist():
        if v != 0.0:
            t = s + v
            if abs(s) >= abs(v):
                c += (s - t) + v
            else:
                c += (v - t) + s
            s = t
    return s, c


def _prod_blocks_np(tre, tim, cplx, offs, nb, weighted, block):
    R = offs.shape[0]
    out = [np.zeros((R, nb)) for _ in range(4)]
    if nb == 0:
        return tuple(out)
    for r in range(R):
        pr, pi = _row_products_np(tre, tim, cplx, offs, r, 1, nb * block, weighted)
        out[0][r], out[1][r] = _neumaier_columns(pr.reshape(nb, block))
        if cplx:
            out[2][r], out[3][r] = _neumaier_columns(pi.reshape(nb, block))
    return tuple(out)


def _prod_range_np(tre, tim, cplx, offs, r, m_lo, m_hi, weighted):
    pr, pi = _row_products_np(tre, tim, cplx, offs, r, m_lo, m_hi, weighted)
    sr, cr = _neumaier_seq(pr)
    si, ci = _neumaier_seq(pi) if cplx else (0.0, 0.0)
    return sr, cr, si, ci


def tree_reduce(s, c):
    """Fixed-order pairwise TwoSum reduction of (sum, compensation) leaves."""
    s = np.asarray(s, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    n = s.shape[0]
    if n == 0:
        return 0.0
    while n > 1:
        half = n // 2
        a = s[0:2 * half:2]
        b = s[1:2 * half:2]
        t = a + b
        bp = t - a
        err = (a - (t - bp)) + (b - bp)
        cc = (c[0:2 * half:2] + c[1:2 * half:2]) + err
        if n % 2:
            s = np.concatenate((t, s[n - 1:n]))
            c = np.concatenate((cc, c[n - 1:n]))
            n = half + 1
        else:
            s, c = t, cc
            n = half
    return float(s[0] + c[0])


def product_sums(tre, tim, offsets, checkpoints, weighted, block=BLOCK):
    """Compensated sums ``S[r, k] = sum_{m<=N_k} prod_j t_j[m + off[r, j]] (/ m)``.

    ``tre``/``tim`` are (J, L) real and imaginary tables (``tim`` None for
    real input), ``offsets`` is (R, J) and ``checkpoints`` is increasing.
    Every ``S[r, k]`` equals the standalone sum over ``m <= N_k``.
    """
    tre = np.ascontiguousarray(np.atleast_2d(tre), dtype=np.float64)
    cplx = tim is not None
    tim = (np.ascontiguousarray(np.atleast_2d(tim), dtype=np.float64) if cplx
           else np.zeros((1, 1)))
    offs = np.ascontiguousarray(np.atleast_2d(offsets), dtype=np.int64)
    cps = [int(n) for n in checkpoints]
    if not cps or cps[0] < 1 or any(b <= a for a, b in zip(cps, cps[1:])):
        raise ValueError("checkpoints must be a nonempty increasing list of positive integers")
    if offs.shape[1] != tre.shape[0] or (cplx and tim.shape != tre.shape):
        raise ValueError("offset columns must match the number of tables")
    if 1 + offs.min() < 0 or cps[-1] + offs.max() >= tre.shape[1]:
        raise IndexError("product_sums would read outside the tables")
    nb = cps[-1] // block
    use_nb = _accel.backend() == "numba"
    if use_nb:
        blocks = _prod_blocks_nb(tre, tim, cplx, offs, nb, weighted, block)
        rng = _prod_range_nb
    else:
        blocks = _prod_blocks_np(tre, tim, cplx, offs, nb, weighted, block)
        rng = _prod_range_np
    sre, cre, sim, cim = blocks
    R = offs.shape[0]
    out = np.zeros((R, len(cps)), dtype=np.complex128 if cplx else np.float64)
    for r in range(R):
        for k, n in enumerate(cps):
            q, rem = divmod(n, block)
            ls, lc, ms, mc = sre[r, :q], cre[r, :q], sim[r, :q], cim[r, :q]
            if rem:
                pr, pc, qs, qc = rng(tre, tim, cplx, offs, r, q * block + 1, n, weighted)
                ls, lc = np.append(ls, pr), np.append(lc, pc)
                ms, mc = np.append(ms, qs), np.append(mc, qc)
            re = tree_reduce(ls, lc)
            out[r, k] = complex(re, tree_reduce(ms, mc)) if cplx else re
    return out


def series_sums(values, checkpoints, weighted):
    """Compensated ``sum_{m<=N_k} a(m) (/ m)`` for ``values[m-1] = a(m)``."""
    values = np.asarray(values)
    cplx = np.iscomplexobj(values)
    tre = values.real[None, :] if cplx else values[None, :]
    tim = values.imag[None, :] if cplx else None
    return product_sums(tre, tim, [[-1]], checkpoints, weighted)[0]


# ---------------------------------------------------------------------------
# segmented factor sieve
# ---------------------------------------------------------------------------


@njit
def _sieve_segment_nb(a, b, primes, omega, mu, spf):
    n = b - a + 1
    prod = np.ones(n, np.int64)
    for i in range(n):
        mu[i] = 1
    for pi in range(primes.shape[0]):
        p = primes[pi]
        if p * p > b:
            break
        pk = p
        first = True
        while True:
            start = ((a + pk - 1) // pk) * pk
            for v in range(start, b + 1, pk):
                i = v - a
                omega[i] += 1
                prod[i] *= p
                if first:
                    mu[i] = -mu[i]
                    if spf[i] == 0:
                        spf[i] = p
                else:
                    mu[i] = 0
            first = False
            if pk > b // p:
                break
            pk *= p
    for i in range(n):
        v = a + i
        if v == 1:
            spf[i] = 1
        elif prod[i] != v:
            omega[i] += 1
            mu[i] = -mu[i]
            if spf[i] == 0:
                spf[i] = v


@njit(parallel=True)
def _sieve_nb(lo, hi, primes, seg, omega, mu, spf):
    n = hi - lo + 1
    nseg = (n + seg - 1) // seg
    for s in prange(nseg):
        a = lo + s * seg
        b = min(hi, a + seg - 1)
        _sieve_segment_nb(a, b, primes, omega[a - lo:b - lo + 1],
                          mu[a - lo:b - lo + 1], spf[a - lo:b - lo + 1])


def _sieve_segment_np(a, b, primes, omega, mu, spf):
    n = b - a + 1
    prod = np.ones(n, np.int64)
    mu[:] = 1
    for p in primes.tolist():
        if p * p > b:
            break
        sl = slice((-a) % p, n, p)
        omega[sl] += 1
        prod[sl] *= p
        mu[sl] *= -1
        sub = spf[sl]
        sub[sub == 0] = p
        pk = p * p
        while pk <= b:
            start = (-a) % pk
            if start < n:
                sl = slice(start, n, pk)
                omega[sl] += 1
                prod[sl] *= p
                mu[sl] = 0
            pk *= p
    v = np.arange(a, b + 1, dtype=np.int64)
    big = prod != v
    omega[big] += 1
    mu[big] *= -1
    sel = big & (spf == 0)
    spf[sel] = v[sel]
    if a == 1:
        spf[0] = 1


def sieve_window(lo, hi, primes, seg):
    """Omega, mobius and smallest prime factor for every n in [lo, hi].

    ``primes`` must contain every prime up to sqrt(hi).
    """
    n = hi - lo + 1
    omega = np.zeros(n, np.uint8)
    mu = np.zeros(n, np.int8)
    spf = np.zeros(n, np.int64)
    primes = np.ascontiguousarray(primes, dtype=np.int64)
    if _accel.backend() == "numba":
        _sieve_nb(lo, hi, primes, seg, omega, mu, spf)
    else:
        for a in range(lo, hi + 1, seg):
            b = min(hi, a + seg - 1)
            _sieve_segment_np(a, b, primes, omega[a - lo:b - lo + 1],
                              mu[a - lo:b - lo + 1], spf[a - lo:b - lo + 1])
    return omega, mu, spf


# ---------------------------------------------------------------------------
# 128-bit fixed point floors:  n * f + g  for f, g in [0, 1)
# ---------------------------------------------------------------------------

_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)


@njit
def _mulhilo_nb(a, b):
    a0 = a & _M32
    a1 = a >> _S32
    b0 = b & _M32
    b1 = b >> _S32
    p00 = a0 * b0
    p01 = a0 * b1
    p10 = a1 * b0
    p11 = a1 * b1
    mid = (p00 >> _S32) + (p01 & _M32) + (p10 & _M32)
    lo = (mid << _S32) | (p00 & _M32)
    hi = p11 + (p01 >> _S32) + (p10 >> _S32) + (mid >> _S32)
    return hi, lo


@njit(parallel=True)
def _fixed_mul_nb(n, fh, fl, gh, gl, whole, frac):
    for i in prange(n.shape[0]):
        x = n[i]
        h1, l1 = _mulhilo_nb(x, fl)
        h2, l2 = _mulhilo_nb(x, fh)
        w1 = l2 + h1
        c1 = _ONE if w1 < l2 else _ZERO
        w2 = h2 + c1
        t0 = l1 + gl
        c0 = _ONE if t0 < l1 else _ZERO
        t1 = w1 + gh
        c2 = _ONE if t1 < w1 else _ZERO
        t2 = t1 + c0
        c3 = _ONE if t2 < t1 else _ZERO
        whole[i] = w2 + c2 + c3
        frac[i] = t2


def _mulhilo_np(a, b):
    a0 = a & _M32
    a1 = a >> _S32
    b0 = b & _M32
    b1 = b >> _S32
    p00 = a0 * b0
    p01 = a0 * b1
    p10 = a1 * b0
    p11 = a1 * b1
    mid = (p00 >> _S32) + (p01 & _M32) + (p10 & _M32)
    lo = (mid << _S32) | (p00 & _M32)
    hi = p11 + (p01 >> _S32) + (p10 >> _S32) + (mid >> _S32)
    return hi, lo


def _fixed_mul_np(n, fh, fl, gh, gl):
    h1, l1 = _mulhilo_np(n, fl)
    h2, l2 = _mulhilo_np(n, fh)
    w1 = l2 + h1
    w2 = h2 + (w1 < l2).astype(np.uint64)
    t0 = l1 + gl
    c0 = (t0 < l1).astype(np.uint64)
    t1 = w1 + gh
    c2 = (t1 < w1).astype(np.uint64)
    t2 = t1 + c0
    c3 = (t2 < t1).astype(np.uint64)
    return w2 + c2 + c3, t2


def fixed_mul(n, frac128, offset128=0):
    """Integer part and top 64 fraction bits of ``n*f + g``.

    ``frac128``/``offset128`` are 128-bit integers ``floor(f * 2**128)`` and
    ``floor(g * 2**128)``. The computed value undershoots the true one by
    less than ``(n + 1) * 2**-128``.
    """
    n = np.ascontiguousarray(n, dtype=np.uint64)
    fh, fl = np.uint64(frac128 >> 64), np.uint64(frac128 & 0xFFFFFFFFFFFFFFFF)
    gh, gl = np.uint64(offset128 >> 64), np.uint64(offset128 & 0xFFFFFFFFFFFFFFFF)
    if _accel.backend() == "numba":
        whole = np.empty(n.shape[0], np.uint64)
        frac = np.empty(n.shape[0], np.uint64)
        _fixed_mul_nb(n, fh, fl, gh, gl, whole, frac)
        return whole, frac
    with np.errstate(over="ignore"):
        return _fixed_mul_np(n, fh, fl, gh, gl)


# ---------------------------------------------------------------------------
# pretentious t-grid:  sum_p (1 - Re f(p) p^{-it}) / p  over a grid of t
# ---------------------------------------------------------------------------


@njit(parallel=True, fastmath=True)
def _twist_grid_nb(fre, fim, logp, invp, k_lo, nt, dt, cuts, chunk, pblock):
    # t-chunks run in parallel; inside a chunk the primes are processed in
    # cache-sized blocks whose phases e^{i t L} are advanced by rotation
    ncut = cuts.shape[0]
    out = np.zeros((ncut, nt))
    nchunks = (nt + chunk - 1) // chunk
    for ch in prange(nchunks):
        k0 = ch * chunk
        kn = min(chunk, nt - k0)
        ta = (k_lo + k0) * dt
        acc = np.zeros(kn)
        zr = np.empty(pblock)
        zi = np.empty(pblock)
        wr = np.empty(pblock)
        wi = np.empty(pblock)
        start = 0
        for c in range(ncut):
            stop = cuts[c]
            for b0 in range(start, stop, pblock):
                m = min(b0 + pblock, stop) - b0
                for j in range(m):
                    L = logp[b0 + j]
                    zr[j] = np.cos(ta * L)
                    zi[j] = np.sin(ta * L)
                    wr[j] = np.cos(dt * L)
                    wi[j] = np.sin(dt * L)
                for k in range(kn):
                    s = 0.0
                    for j in range(m):
                        a = zr[j]
                        b = zi[j]
                        s += (1.0 - (fre[b0 + j] * a + fim[b0 + j] * b)) * invp[b0 + j]
                        zr[j] = a * wr[j] - b * wi[j]
                        zi[j] = a * wi[j] + b * wr[j]
                    acc[k] += s
            for k in range(kn):
                out[c, k0 + k] = acc[k]
            start = stop
    return out


def _twist_grid_np(fre, fim, logp, invp, k_lo, nt, dt, cuts):
    out = np.zeros((len(cuts), nt))
    P = logp.shape[0]
    width = max(1, min(nt, 4_000_000 // max(P, 1)))
    t_all = (k_lo + np.arange(nt)) * dt
    for k0 in range(0, nt, width):
        t = t_all[k0:k0 + width]
        ang = np.outer(t, logp)
        terms = (1.0 - (fre * np.cos(ang) + fim * np.sin(ang))) * invp
        cs = np.concatenate((np.zeros((len(t), 1)), np.cumsum(terms, axis=1)), axis=1)
        out[:, k0:k0 + len(t)] = cs[:, cuts].T
    return out


def twist_grid(fre, fim, logp, invp, k_lo, nt, dt, cuts, chunk=4096, pblock=1024):
    """``out[c, k] = sum_{i < cuts[c]} (1 - Re(f_i e^{-i t_k L_i})) w_i`` at ``t_k = (k_lo + k) dt``."""
    args = [np.ascontiguousarray(x, dtype=np.float64) for x in (fre, fim, logp, invp)]
    cuts = np.ascontiguousarray(cuts, dtype=np.int64)
    if _accel.backend() == "numba":
        return _twist_grid_nb(*args, int(k_lo), int(nt), float(dt), cuts, int(chunk), int(pblock))
    return _twist_grid_np(*args, int(k_lo), int(nt), float(dt), cuts)
