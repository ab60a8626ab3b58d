"""Exactly solvable systems: rotations on Z_u x T^v and the skew product on T^2.

Phases frac(n * theta) are computed exactly: rationals with integer
arithmetic, everything else through the 128-bit fixed point product used by
the Beatty sequences. Orbits are never iterated; T^n is applied in closed
form.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import _kernels
from .errors import DomainError
from .sequences import Constant

_TWO64 = float(2**64)
_PREC = 256


def _const(x):
    """Phase constant; plain numbers are taken exactly and reduced mod 1."""
    if isinstance(x, Constant):
        return x
    if isinstance(x, (int, float, Fraction, np.integer, np.floating)):
        x = Fraction(x) % 1
        return Constant(f"{x.numerator}/{x.denominator}")
    return Constant(x)


def frac_phase(n, theta, offset=0):
    """frac(n * theta + offset) as float64 for a nonnegative int array n."""
    n = np.asarray(n, dtype=np.int64)
    if n.size and n.min() < 0:
        raise DomainError("phase multipliers must be nonnegative")
    theta, offset = _const(theta), _const(offset)
    if theta.is_rational and offset.is_rational:
        a, b = theta.exact, offset.exact
        den = a.denominator * b.denominator
        pa = (a.numerator * b.denominator) % den
        pb = (b.numerator * a.denominator) % den
        if den < 2**62 and (n.size == 0 or int(n.max()) * pa + pb < 2**62):
            return ((n * pa + pb) % den) / den
    _, af = theta.split128()
    _, bf = offset.split128()
    _, frac = _kernels.fixed_mul(n.astype(np.uint64), af, bf)
    return frac.astype(np.float64) / _TWO64


def e(x):
    """exp(2 pi i x)."""
    return np.exp(2j * np.pi * np.asarray(x, dtype=np.float64))


def _fmean(z):
    z = np.asarray(z, dtype=np.complex128)
    n = z.shape[0]
    return complex(math.fsum(z.real.tolist()) / n, math.fsum(z.imag.tolist()) / n)


def _dist_to_z(theta):
    t = _const(theta)
    x = t.value(_PREC)
    return float(abs(x - mpmath.nint(x)))


def weyl_sum(theta, n):
    """E_{k <= N} e(k theta)."""
    n = int(n)
    if n < 1:
        raise DomainError("weyl_sum needs N >= 1")
    return _fmean(e(frac_phase(np.arange(1, n + 1), theta)))


def weyl_bound(theta, n):
    """min(1, 1 / (2 N dist(theta, Z)))."""
    d = _dist_to_z(theta)
    return 1.0 if d == 0.0 else min(1.0, 1.0 / (2 * n * d))


def prime_phase_average(beta, d, p_max, sieve):
    """E_{p in P_d, p <= P} e(p beta), uniform over the listed primes."""
    primes = sieve.primes_up_to(int(p_max), int(d))
    if primes.size == 0:
        raise DomainError(f"no primes in P_{d} up to {p_max}")
    return _fmean(e(frac_phase(primes, beta)))


@dataclass(frozen=True)
class TrigMonomial:
    """e(k x / u) e(l . y) on Z_u x T^v."""

    k: int = 0
    l: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "l", tuple(int(x) for x in self.l))

    @property
    def trivial(self):
        return self.k == 0 and not any(self.l)

    def value(self, x, y, u=1):
        """Evaluate at cyclic coordinates x (ints) and torus coordinates y of shape (..., v)."""
        x = np.asarray(x)
        y = np.asarray(y, dtype=np.float64)
        ph = (self.k * (x % u) % u) / u
        if self.l:
            ph = ph + y @ np.array(self.l, dtype=np.float64)
        return e(np.mod(ph, 1.0))


class TorusRotation:
    """T(x, y) = (x + 1 mod u, y + alpha mod 1) on Z_u x T^v."""

    def __init__(self, u=1, alpha=()):
        self.u = int(u)
        if self.u < 1:
            raise DomainError("cyclic part u must be >= 1")
        self.alpha = tuple(_const(a) for a in alpha)

    @property
    def v(self):
        return len(self.alpha)

    def __repr__(self):
        return f"TorusRotation(u={self.u}, alpha={[a.text for a in self.alpha]})"

    def ergodic_heuristic(self, maxcoeff=10**6):
        """No integer relation among 1, alpha_1..alpha_v with coefficients <= maxcoeff."""
        if not self.alpha:
            return True
        if any(a.is_rational for a in self.alpha):
            return False
        with mpmath.workprec(_PREC):
            rel = mpmath.pslq([mpmath.mpf(1)] + [a.value(_PREC) for a in self.alpha],
                              maxcoeff=maxcoeff, maxsteps=10**5)
        return rel is None

    def _check(self, monomials):
        for f in monomials:
            if len(f.l) not in (0, self.v):
                raise DomainError(f"monomial {f} does not match torus dimension {self.v}")

    def _l(self, f):
        return f.l if f.l else (0,) * self.v

    def orbit_phases(self, x0, y0, n):
        """Closed-form points T^n(x0, y0) for a nonnegative int array n."""
        n = np.asarray(n, dtype=np.int64)
        xs = (int(x0) + n) % self.u
        if not self.v:
            return xs, np.zeros(n.shape + (0,))
        ys = np.stack([frac_phase(n, a, y) for a, y in zip(self.alpha, y0)], axis=-1)
        return xs, ys


def _integral_vanishes(rot, monomials):
    k = sum(f.k for f in monomials)
    lsum = [sum(rot._l(f)[i] for f in monomials) for i in range(rot.v)]
    return k % rot.u != 0 or any(lsum)


def _coefficients(rot, monomials, shifts):
    """Rational part sum k_j n_j / u and integer weights c_i = sum_j n_j l_ji."""
    rat = Fraction(sum(f.k * n for f, n in zip(monomials, shifts)), rot.u)
    c = [sum(n * rot._l(f)[i] for f, n in zip(monomials, shifts)) for i in range(rot.v)]
    return rat, c


def rotation_correlation(rot, monomials, shifts, mode="analytic", n=None, start=None):
    """int prod_j T^{n_j} F_j dm (analytic) or E_{m <= N} prod_j F_j(T^{m+n_j} x0) (orbit)."""
    monomials = list(monomials)
    shifts = [int(s) for s in shifts]
    if len(monomials) != len(shifts):
        raise DomainError("one shift per monomial is required")
    rot._check(monomials)
    if mode == "analytic":
        if _integral_vanishes(rot, monomials):
            return 0j
        rat, c = _coefficients(rot, monomials, shifts)
        with mpmath.workprec(_PREC):
            ph = mpmath.mpf(rat.numerator) / rat.denominator
            for ci, a in zip(c, rot.alpha):
                ph += ci * a.value(_PREC)
            ph = ph - mpmath.floor(ph)
        return complex(e(float(ph)))
    if mode != "orbit":
        raise DomainError(f"unknown mode {mode!r}")
    if n is None or int(n) < 1:
        raise DomainError("orbit mode needs N >= 1")
    x0, y0 = start if start is not None else (0, (0,) * rot.v)
    if len(y0) != rot.v:
        raise DomainError("start point does not match the torus dimension")
    if min(shifts) < 0:
        raise DomainError("orbit mode needs nonnegative shifts")
    m = np.arange(1, int(n) + 1, dtype=np.int64)
    prod = np.ones(m.shape[0], dtype=np.complex128)
    for f, s in zip(monomials, shifts):
        xs, ys = rot.orbit_phases(x0, y0, m + s)
        prod *= f.value(xs, ys, rot.u)
    return _fmean(prod)


def _dilated_values(rot, monomials, shifts, mult):
    """Analytic correlation at shifts (mult * n_j) for an int array of multipliers."""
    mult = np.asarray(mult, dtype=np.int64)
    if _integral_vanishes(rot, monomials):
        return np.zeros(mult.shape[0], dtype=np.complex128)
    rat, c = _coefficients(rot, monomials, shifts)
    ph = ((mult % rat.denominator) * (rat.numerator % rat.denominator) % rat.denominator
          ) / rat.denominator
    for ci, a in zip(c, rot.alpha):
        if ci == 0:
            continue
        f = frac_phase(mult * abs(ci), a)
        ph = ph + (f if ci > 0 else -f)
    return e(np.mod(ph, 1.0))


@dataclass
class Ergid2Result:
    lhs: complex
    rhs: complex
    analytic: complex
    meta: dict = field(default_factory=dict)

    @property
    def gap(self):
        return abs(self.lhs - self.rhs)

    @property
    def gap_lhs(self):
        return abs(self.lhs - self.analytic)

    @property
    def gap_rhs(self):
        return abs(self.rhs - self.analytic)

    def to_dict(self):
        c = lambda z: [z.real, z.imag]
        return {"lhs": c(self.lhs), "rhs": c(self.rhs), "analytic": c(self.analytic),
                "gap": self.gap, "gap_lhs": self.gap_lhs, "gap_rhs": self.gap_rhs,
                "meta": self.meta}


def ergid2_check(rot, monomials, shifts, d, r0, p_max, m_max, sieve):
    """Prime average E_{p in P_d} against E_{m in A_{d,r0}} of dilated rotation correlations.

    A_{d,r0} = {m : gcd(m, r0) = 1, m = 1 mod d}. The predicted common limit is
    0 when an irrational frequency survives, otherwise the mean of e(m q/u)
    over the admissible residue classes.
    """
    monomials = list(monomials)
    shifts = [int(s) for s in shifts]
    d, r0, p_max, m_max = int(d), int(r0), int(p_max), int(m_max)
    rot._check(monomials)
    primes = sieve.primes_up_to(p_max, d)
    if primes.size == 0:
        raise DomainError(f"no primes in P_{d} up to {p_max}")
    m = np.arange(1, m_max + 1, dtype=np.int64)
    m = m[(np.gcd(m, r0) == 1) & ((m - 1) % d == 0)]
    if m.size == 0:
        raise DomainError(f"A_(d={d}, r0={r0}) has no elements up to {m_max}")
    lhs = _fmean(_dilated_values(rot, monomials, shifts, primes))
    rhs = _fmean(_dilated_values(rot, monomials, shifts, m))
    if _integral_vanishes(rot, monomials):
        pred = 0j
    else:
        rat, c = _coefficients(rot, monomials, shifts)
        if any(c):
            pred = 0j
        else:
            mod = math.lcm(rot.u, d, r0, rat.denominator)
            cls = [r for r in range(mod) if math.gcd(r, mod) == 1 and (r - 1) % d == 0]
            pred = _fmean([complex(e(float((r * rat) % 1))) for r in cls])
    meta = {"u": rot.u, "alpha": [a.text for a in rot.alpha], "shifts": shifts, "d": d,
            "r0": r0, "P": p_max, "M": m_max, "primes": int(primes.size),
            "classes": int(m.size), "ergodic_heuristic": rot.ergodic_heuristic()}
    return Ergid2Result(lhs, rhs, pred, meta)


def skew_orbit_average(x0, y0, f, n):
    """E_{k <= N} F(T^k(x0, y0)) for T(x, y) = (x, y + x) on T^2, F = e(l1 x + l2 y)."""
    n = int(n)
    if n < 1:
        raise DomainError("skew_orbit_average needs N >= 1")
    if len(f.l) != 2:
        raise DomainError("skew product monomials need l = (l1, l2)")
    l1, l2 = f.l
    x0, y0 = _const(x0), _const(y0)
    k = np.arange(1, n + 1, dtype=np.int64)
    # T^k(x, y) = (x, y + k x), so the phase is l1 x0 + l2 frac(y0 + k x0)
    y = frac_phase(k, x0, y0)
    x = frac_phase(np.array([1]), x0)[0]
    ph = np.mod(l1 * x + l2 * y, 1.0)
    return _fmean(e(ph))
