"""Integer sequence families and their independence / equidistribution checkers.

Constant grammar (used for Beatty slopes, offsets, exponents and bounds)::

    constant := [INT "*"] atom [("+" | "-") number]
    atom     := "sqrt" INT | "pi" | "e" | "phi" | number
    number   := decimal | INT "/" INT

e.g. ``sqrt2``, ``2*pi``, ``sqrt2-1``, ``3/2``, ``0.5``. Decimals and
fractions are exact rationals; the rest are evaluated with mpmath at any
requested precision (256 bits by default).

Sequence descriptors::

    beatty:ALPHA[:BETA]        floor(n ALPHA + BETA)
    powerfloor:C               floor(n^C)
    poly:c0,c1,...,cd          c0 + c1 n + ... + cd n^d   (integer coefficients)
    linform:c1,...,cr          c1 n1 + ... + cr nr on N^r
    visit:D:ALPHA:B:C          n-th element of {m : {m^D ALPHA} in [B, C)}
    explicit:v1,v2,...         table, a(n) = v_n

A family is members joined by ``;``. Member indices are 0-based and
arguments n are 1-based points of N^r.
"""
import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
import sympy

from . import _kernels
from .errors import DomainError, RangeError, ResourceError

DEFAULT_PREC = 256
_GUARD = 1 << 20
_TOP = (1 << 64) - _GUARD
_I63 = (1 << 63) - 1

_NUMBER = r"(?:\d+/\d+|\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)"
_CONST_RE = re.compile(
    rf"^\s*(?:(?P<mul>\d+)\s*\*\s*)?(?P<atom>sqrt\d+|pi|e|phi|{_NUMBER})"
    rf"\s*(?:(?P<sign>[-+])\s*(?P<add>{_NUMBER}))?\s*$")


def _rational(text):
    if "/" in text:
        p, q = text.split("/")
        if int(q) == 0:
            raise DomainError(f"zero denominator in {text!r}")
        return Fraction(int(p), int(q))
    return Fraction(text)


class Constant:
    """A real constant known to arbitrary precision."""

    def __init__(self, text):
        if isinstance(text, Constant):
            text = text.text
        if isinstance(text, (int, Fraction)):
            text = str(text)
        elif isinstance(text, float):
            text = repr(text)
        self.text = str(text).strip()
        m = _CONST_RE.match(self.text)
        if m is None:
            raise DomainError(f"cannot parse constant {self.text!r}")
        self._mul = int(m["mul"]) if m["mul"] else 1
        self._atom = m["atom"]
        add = _rational(m["add"]) if m["add"] else Fraction(0)
        self._add = -add if m["sign"] == "-" else add
        self.exact = None
        if self._atom[0].isdigit() or self._atom[0] == ".":
            self.exact = self._mul * _rational(self._atom) + self._add
        elif self._atom.startswith("sqrt"):
            k = int(self._atom[4:])
            r = math.isqrt(k)
            if r * r == k:
                self.exact = self._mul * r + self._add
        self.float = float(self.value(80))

    def value(self, prec=DEFAULT_PREC):
        """mpf value computed at ``prec`` bits."""
        with mpmath.workprec(prec):
            if self.exact is not None:
                return mpmath.mpf(self.exact.numerator) / self.exact.denominator
            a = self._atom
            if a.startswith("sqrt"):
                x = mpmath.sqrt(int(a[4:]))
            elif a == "pi":
                x = +mpmath.pi
            elif a == "e":
                x = +mpmath.e
            else:
                x = (1 + mpmath.sqrt(5)) / 2
            return self._mul * x + mpmath.mpf(self._add.numerator) / self._add.denominator

    @property
    def is_rational(self):
        return self.exact is not None

    def split128(self):
        """(floor(x), floor(frac(x) * 2^128)) exactly."""
        if self.exact is not None:
            ip = math.floor(self.exact)
            return ip, math.floor((self.exact - ip) * (1 << 128))
        x = self.value(DEFAULT_PREC + 64)
        ip = int(mpmath.floor(x))
        with mpmath.workprec(DEFAULT_PREC + 64):
            return ip, int(mpmath.floor((x - ip) * mpmath.mpf(2) ** 128))

    def __repr__(self):
        return f"Constant({self.text!r})"

    def __eq__(self, other):
        return isinstance(other, Constant) and self.text == other.text

    def __hash__(self):
        return hash(self.text)


def _as_int_array(n):
    arr = np.asarray(n)
    if arr.dtype.kind not in "iu":
        raise DomainError("sequence arguments must be integers")
    arr = arr.astype(np.int64)
    if arr.size and arr.min() < 1:
        raise DomainError("sequence arguments are positive integers")
    return arr


def _check_nonneg(vals, what):
    if vals.size and vals.min() < 0:
        raise DomainError(f"{what} produced negative values; sequences must map into N")
    return vals


def floor_linear(n, alpha, beta=Constant("0")):
    """floor(n alpha + beta) for an int array n, exact (128-bit with mpmath guard)."""
    n = np.asarray(n, dtype=np.int64)
    if n.size == 0:
        return n.copy()
    top = int(n.max()) * abs(alpha.float) + abs(beta.float) + 2
    if top >= 2.0**62:
        raise OverflowError(f"floor(n*{alpha.text}+{beta.text}) leaves the 64-bit range")
    if alpha.is_rational and beta.is_rational:
        a, b = alpha.exact, beta.exact
        den = a.denominator * b.denominator
        pa, pb = a.numerator * b.denominator, b.numerator * a.denominator
        if int(n.max()) * abs(pa) + abs(pb) < _I63:
            return (n * pa + pb) // den
        return np.array([(int(k) * pa + pb) // den for k in n.tolist()], dtype=np.int64)
    ai, af = alpha.split128()
    bi, bf = beta.split128()
    whole, frac = _kernels.fixed_mul(n.astype(np.uint64), af, bf)
    out = n * ai + bi + whole.astype(np.int64)
    risky = np.flatnonzero(frac >= np.uint64(_TOP))
    if risky.size:
        bits = DEFAULT_PREC + 64 + int(n.max()).bit_length()
        av, bv = alpha.value(bits), beta.value(bits)
        with mpmath.workprec(bits):
            for i in risky.tolist():
                out[i] = int(mpmath.floor(int(n[i]) * av + bv))
    return out


def frac_in_interval(m, alpha, b, c):
    """Boolean mask {m alpha} in [b, c) for an array of nonnegative ints m < 2^63."""
    m = np.asarray(m, dtype=np.int64)
    _, af = alpha.split128()
    _, frac = _kernels.fixed_mul(m.astype(np.uint64), af, 0)
    tb = math.floor(b.exact * (1 << 64)) if b.is_rational else int(b.value() * mpmath.mpf(2) ** 64)
    tc = math.floor(c.exact * (1 << 64)) if c.is_rational else int(c.value() * mpmath.mpf(2) ** 64)
    f = frac
    inside = (f >= np.uint64(tb)) & (f < np.uint64(min(tc, (1 << 64) - 1)))
    risky = (f >= np.uint64(_TOP))
    for t in (tb, tc):
        lo = max(t - _GUARD, 0)
        hi = min(t + _GUARD, (1 << 64) - 1)
        risky |= (f >= np.uint64(lo)) & (f <= np.uint64(hi))
    idx = np.flatnonzero(risky)
    if idx.size:
        bits = DEFAULT_PREC + 64 + int(m.max()).bit_length()
        av, bv, cv = alpha.value(bits), b.value(bits), c.value(bits)
        with mpmath.workprec(bits):
            for i in idx.tolist():
                x = int(m[i]) * av
                fr = x - mpmath.floor(x)
                inside[i] = bool(bv <= fr < cv)
    return inside


# ---------------------------------------------------------------------------
# members
# ---------------------------------------------------------------------------


class Member:
    arity = 1

    def values(self, n):
        raise NotImplementedError

    def __call__(self, n):
        if self.arity == 1:
            return int(self.values(np.array([n], dtype=np.int64))[0])
        return int(self.values(tuple(np.array([k], dtype=np.int64) for k in n))[0])

    def __eq__(self, other):
        return type(self) is type(other) and self.descriptor == other.descriptor

    def __hash__(self):
        return hash(self.descriptor)

    def __repr__(self):
        return f"<{self.descriptor}>"


class Beatty(Member):
    def __init__(self, alpha, beta="0"):
        self.alpha, self.beta = Constant(alpha), Constant(beta)
        if self.alpha.float <= 0:
            raise DomainError("Beatty sequences need alpha > 0")

    @property
    def descriptor(self):
        return f"beatty:{self.alpha.text}:{self.beta.text}"

    @property
    def increasing(self):
        return self.alpha.float >= 1

    def values(self, n):
        return _check_nonneg(floor_linear(_as_int_array(n), self.alpha, self.beta), self.descriptor)


class PowerFloor(Member):
    def __init__(self, c):
        self.c = Constant(c)
        if self.c.float <= 0:
            raise DomainError("power_floor needs c > 0")

    @property
    def descriptor(self):
        return f"powerfloor:{self.c.text}"

    increasing = property(lambda self: self.c.float >= 1)

    def _exact(self, k):
        if self.c.is_rational:
            p, q = self.c.exact.numerator, self.c.exact.denominator
            return int(sympy.integer_nthroot(k**p, q)[0])
        bits = DEFAULT_PREC + 64
        cv = self.c.value(bits)
        with mpmath.workprec(bits):
            return int(mpmath.floor(mpmath.mpf(k) ** cv))

    def values(self, n):
        n = _as_int_array(n)
        if n.size == 0:
            return n.copy()
        if float(n.max()) ** self.c.float >= 2.0**62:
            raise OverflowError(f"floor(n^{self.c.text}) leaves the 64-bit range")
        y = n.astype(np.float64) ** self.c.float
        out = np.floor(y).astype(np.int64)
        near = np.abs(y - np.round(y)) <= 1e-9 * np.maximum(1.0, y)
        for i in np.flatnonzero(near).tolist():
            out[i] = self._exact(int(n[i]))
        return out


class Polynomial(Member):
    """c0 + c1 n + ... with integer coefficients in ascending order."""

    def __init__(self, coeffs):
        self.coeffs = tuple(int(c) for c in coeffs)
        if not self.coeffs:
            raise DomainError("polynomial needs at least one coefficient")

    @property
    def descriptor(self):
        return "poly:" + ",".join(map(str, self.coeffs))

    @property
    def increasing(self):
        return False

    def values(self, n):
        n = _as_int_array(n)
        if n.size == 0:
            return n.copy()
        nmax = int(n.max())
        if sum(abs(c) * nmax**k for k, c in enumerate(self.coeffs)) > _I63:
            raise OverflowError(f"{self.descriptor} leaves the 64-bit range at n={nmax}")
        out = np.zeros(n.shape, dtype=np.int64)
        for c in reversed(self.coeffs):
            out = out * n + c
        return _check_nonneg(out, self.descriptor)


class LinearForm(Member):
    def __init__(self, coeffs):
        self.coeffs = tuple(int(c) for c in coeffs)
        if not self.coeffs:
            raise DomainError("linear form needs at least one coefficient")
        self.arity = len(self.coeffs)

    @property
    def descriptor(self):
        return "linform:" + ",".join(map(str, self.coeffs))

    @property
    def increasing(self):
        return self.arity == 1 and self.coeffs[0] > 0

    def values(self, n):
        if self.arity == 1 and not isinstance(n, tuple):
            n = (n,)
        if len(n) != self.arity:
            raise DomainError(f"{self.descriptor} takes points of N^{self.arity}")
        args = [_as_int_array(x) for x in n]
        out = sum(c * x for c, x in zip(self.coeffs, args))
        return _check_nonneg(np.asarray(out, dtype=np.int64), self.descriptor)


class VisitTimes(Member):
    """Increasing enumeration of S = {m >= 1 : {m^d alpha} in [b, c)}."""

    def __init__(self, d, alpha, b, c, search_cap=10**9):
        self.d = int(d)
        self.alpha, self.b, self.c = Constant(alpha), Constant(b), Constant(c)
        if self.d < 1:
            raise DomainError("visit times need d >= 1")
        if not 0 <= self.b.float < self.c.float <= 1:
            raise DomainError("visit times need 0 <= b < c <= 1")
        self.search_cap = int(search_cap)
        self._found = np.zeros(0, dtype=np.int64)
        self._scanned = 0

    @property
    def descriptor(self):
        return f"visit:{self.d}:{self.alpha.text}:{self.b.text}:{self.c.text}"

    increasing = True

    def ensure(self, count):
        chunk = 4096
        while self._found.shape[0] < count:
            if self._scanned >= self.search_cap:
                raise RangeError(
                    f"{self.descriptor}: only {self._found.shape[0]} visits below the search "
                    f"cap {self.search_cap}, {count} requested")
            hi = min(self._scanned + chunk, self.search_cap)
            m = np.arange(self._scanned + 1, hi + 1, dtype=np.int64)
            if float(hi) ** self.d >= 2.0**63:
                raise OverflowError(f"{self.descriptor}: m^{self.d} leaves the 64-bit range")
            md = m ** self.d
            if self.c.is_rational and self.c.exact == 1 and self.b.is_rational and self.b.exact == 0:
                hit = np.ones(m.shape[0], dtype=bool)
            else:
                hit = frac_in_interval(md, self.alpha, self.b, self.c)
            self._found = np.concatenate((self._found, m[hit]))
            self._scanned = hi
            chunk = min(chunk * 2, 1 << 22)
        return self._found[:count]

    def values(self, n):
        n = _as_int_array(n)
        if n.size == 0:
            return n.copy()
        return self.ensure(int(n.max()))[n - 1]


class Explicit(Member):
    def __init__(self, table):
        self.table = np.asarray(table, dtype=np.int64)
        _check_nonneg(self.table, "explicit table")

    @property
    def descriptor(self):
        return "explicit:" + ",".join(map(str, self.table.tolist()))

    @property
    def increasing(self):
        return bool(np.all(np.diff(self.table) > 0))

    def values(self, n):
        n = _as_int_array(n)
        if n.size and n.max() > self.table.shape[0]:
            raise RangeError(f"explicit table has {self.table.shape[0]} entries, n={n.max()} requested")
        return self.table[n - 1]


def visit_times(d, alpha, b, c, count, search_cap=10**9):
    """The first ``count`` m >= 1 with {m^d alpha} in [b, c)."""
    return VisitTimes(d, alpha, b, c, search_cap).ensure(int(count)).copy()


def parse_sequence(text):
    parts = [p.strip() for p in text.strip().split(":")]
    kind, args = parts[0].lower(), parts[1:]
    try:
        if kind == "beatty" and len(args) in (1, 2):
            return Beatty(*args)
        if kind == "powerfloor" and len(args) == 1:
            return PowerFloor(args[0])
        if kind == "poly" and len(args) == 1:
            return Polynomial(int(c) for c in args[0].split(","))
        if kind == "linform" and len(args) == 1:
            return LinearForm(int(c) for c in args[0].split(","))
        if kind == "visit" and len(args) == 4:
            return VisitTimes(int(args[0]), *args[1:])
        if kind == "explicit" and len(args) == 1:
            return Explicit([int(v) for v in args[0].split(",")])
    except (ValueError, DomainError) as exc:
        from .errors import DescriptorError
        raise DescriptorError(f"sequence descriptor {text!r}: {exc}") from exc
    from .errors import DescriptorError
    raise DescriptorError(f"cannot parse sequence descriptor {text!r}")


@dataclass
class SequenceFamily:
    members: list

    def __post_init__(self):
        self.members = list(self.members)
        if not self.members:
            raise DomainError("a family needs at least one member")
        ar = {m.arity for m in self.members}
        if len(ar) != 1:
            raise DomainError(f"family members have different arities {sorted(ar)}")
        self.arity = ar.pop()

    @classmethod
    def parse(cls, text):
        return cls([parse_sequence(t) for t in text.split(";") if t.strip()])

    @property
    def descriptor(self):
        return ";".join(m.descriptor for m in self.members)

    def __len__(self):
        return len(self.members)

    def __getitem__(self, j):
        return self.members[j]

    def grid(self, n):
        """Member values on the box [n]^r: list of arrays of shape (n,)*r."""
        axes = np.meshgrid(*[np.arange(1, n + 1, dtype=np.int64)] * self.arity, indexing="ij")
        if self.arity == 1:
            return [m.values(axes[0]) for m in self.members]
        return [m.values(tuple(axes)) for m in self.members]


def evaluate(family, j, n):
    """a_j(n) for the 0-based member index j and a point n of N^r."""
    if not 0 <= j < len(family):
        raise DomainError(f"member index {j} outside [0, {len(family)})")
    return family[j](n)


# ---------------------------------------------------------------------------
# independence
# ---------------------------------------------------------------------------


def coefficient_vectors(ell, k_max):
    """Nonzero k in [-K, K]^ell with first nonzero entry positive (one per +-k pair)."""
    out = []
    for k in itertools.product(range(-k_max, k_max + 1), repeat=ell):
        nz = [x for x in k if x]
        if nz and nz[0] > 0:
            out.append(k)
    return out


def _primitive(vec):
    g = 0
    for x in vec:
        g = math.gcd(g, int(x))
    vec = [int(x) // g for x in vec]
    first = next(x for x in vec if x)
    return tuple(-x for x in vec) if first < 0 else tuple(vec)


@dataclass
class IndependenceReport:
    mode: str
    k_max: int
    horizon: int
    entries: list = field(default_factory=list)
    verdict: bool = False
    certificate: str = ""
    counterexample: tuple = None
    prefix: int = 0

    def entry(self, k):
        return next(e for e in self.entries if e["k"] == tuple(k))

    def to_dict(self):
        return {"mode": self.mode, "K": self.k_max, "N": self.horizon, "verdict": self.verdict,
                "certificate": self.certificate, "counterexample": self.counterexample,
                "prefix": self.prefix, "entries": self.entries}


def exact_certificate(family):
    """Rank certificate for polynomial (r = 1) or linear-form families, else None.

    Returns (rank, null vector or None, text).
    """
    ms = family.members
    if all(isinstance(m, Polynomial) for m in ms):
        deg = max(len(m.coeffs) for m in ms)
        rows = [list(m.coeffs) + [0] * (deg - len(m.coeffs)) for m in ms]
        what = "polynomial coefficient"
    elif all(isinstance(m, LinearForm) for m in ms):
        rows = [list(m.coeffs) for m in ms]
        what = "linear form coefficient"
    else:
        return None
    mat = sympy.Matrix(rows)
    rank = mat.rank()
    null = None
    if rank < len(ms):
        v = mat.T.nullspace()[0]
        den = sympy.ilcm(*[x.q for x in v])
        null = _primitive([x * den for x in v])
    text = f"{what} matrix has rank {rank} over Q with {len(ms)} members"
    return rank, null, text


_ENUM_BUDGET = 4 * 10**9


def _solution_counts(family, k_max, n):
    vals = family.grid(n)
    ks = coefficient_vectors(len(family), k_max)
    if len(ks) * n**family.arity > _ENUM_BUDGET:
        raise ResourceError(
            f"enumeration of {len(ks)} coefficient vectors over [{n}]^{family.arity} exceeds "
            f"the budget of {_ENUM_BUDGET} evaluations; reduce K or N")
    out = []
    for k in ks:
        comb = np.zeros(vals[0].shape, dtype=np.int64)
        for kj, v in zip(k, vals):
            if kj:
                comb += kj * v
        sol = comb == 0
        cnt = int(np.count_nonzero(sol))
        largest = 0
        if cnt:
            idx = np.nonzero(sol)
            largest = int(max(int(ix.max()) for ix in idx)) + 1
        out.append((k, cnt, largest, sol))
    return out


def check_independence(family, k_max, n, exact=True):
    """Independence up to (K, N): every solution set lies in [1, sqrt(N)]^r.

    Polynomial and linear-form families get an exact rank certificate
    instead (unless ``exact=False``); a rank deficit yields the null vector
    as an identical counterexample.
    """
    k_max, n = int(k_max), int(n)
    if k_max < 1 or n < 1:
        raise DomainError("check_independence needs K >= 1 and N >= 1")
    rep = IndependenceReport("independent", k_max, n, prefix=math.isqrt(n))
    cert = exact_certificate(family) if exact else None
    if cert is not None and family.arity == 1:
        rank, null, text = cert
        rep.verdict = null is None
        rep.certificate = "exact: " + text
        if null is not None:
            rep.counterexample = null
            rep.entries.append({"k": null, "count": n, "largest": n, "density": 1.0})
        return rep
    if cert is not None:
        rank, null, text = cert
        rep.certificate = "exact: " + text
        coeffs = np.array([m.coeffs for m in family.members], dtype=np.int64)
        for k in coefficient_vectors(len(family), k_max):
            v = np.array(k) @ coeffs
            mixed = bool((v > 0).any() and (v < 0).any())
            sols = bool(not v.any() or mixed)
            rep.entries.append({"k": k, "combined": tuple(int(x) for x in v),
                                "infinite_solutions": sols})
            if sols and rep.counterexample is None:
                rep.counterexample = k
        rep.verdict = rep.counterexample is None
        return rep
    worst = None
    for k, cnt, largest, _ in _solution_counts(family, k_max, n):
        rep.entries.append({"k": k, "count": cnt, "largest": largest, "density": cnt / n**family.arity})
        if largest > rep.prefix and (worst is None or cnt > worst[1]):
            worst = (k, cnt)
    rep.verdict = worst is None
    rep.counterexample = None if worst is None else worst[0]
    rep.certificate = (f"enumerated {len(rep.entries)} coefficient vectors over [{n}]^{family.arity}; "
                       f"solutions confined to n <= {rep.prefix}" if rep.verdict else
                       f"k={worst[0]} has {worst[1]} solutions beyond n = {rep.prefix}")
    return rep


def check_weak_independence(family, k_max, n, threshold=1e-2):
    """Density of every solution set at N and N/2: pass iff <= threshold and non-increasing."""
    k_max, n = int(k_max), int(n)
    if k_max < 1 or n < 2:
        raise DomainError("check_weak_independence needs K >= 1 and N >= 2")
    rep = IndependenceReport("weakly_independent", k_max, n)
    half = n // 2
    r = family.arity
    worst = None
    for k, cnt, largest, sol in _solution_counts(family, k_max, n):
        sub = sol[(slice(0, half),) * r]
        d_full = cnt / n**r
        d_half = int(np.count_nonzero(sub)) / half**r
        ok = d_full <= threshold and d_full <= d_half
        rep.entries.append({"k": k, "count": cnt, "largest": largest, "density": d_full,
                            "density_half": d_half, "pass": ok})
        if not ok and (worst is None or d_full > worst[1]):
            worst = (k, d_full)
    rep.verdict = worst is None
    rep.counterexample = None if worst is None else worst[0]
    rep.certificate = (f"all densities <= {threshold} and non-increasing from N={half} to N={n}"
                       if rep.verdict else f"k={worst[0]} has density {worst[1]:.6g}")
    return rep


def check_congruence_equidistribution(family, u_max, n, budget=2 * 10**7):
    """max over u <= U and k != 0 (mod u) of |E_{n in [N]^r} e(sum k_j a_j(n) / u)|.

    Returns (statistic, u, k). One residue histogram per u, transformed by an
    ``ell``-dimensional FFT.
    """
    u_max, n = int(u_max), int(n)
    if u_max < 2:
        raise DomainError("congruence check needs U >= 2")
    ell = len(family)
    cost = sum(u**ell for u in range(2, u_max + 1))
    if cost > budget:
        raise ResourceError(
            f"{cost} residue vectors for U={u_max}, ell={ell} exceed the budget {budget}; "
            f"use a smaller U or fewer members")
    vals = [v.ravel() for v in family.grid(n)]
    total = vals[0].shape[0]
    best = (-1.0, None, None)
    for u in range(2, u_max + 1):
        idx = np.zeros(total, dtype=np.int64)
        for v in vals:
            idx = idx * u + v % u
        hist = np.bincount(idx, minlength=u**ell).reshape((u,) * ell).astype(np.float64)
        spec = np.abs(np.fft.fftn(hist)) / total
        spec.flat[0] = -1.0
        i = int(np.argmax(spec))
        if spec.flat[i] > best[0] + 1e-15:
            k = tuple(int(x) for x in np.unravel_index(i, spec.shape))
            # fftn uses e(-k.x/u); the modulus is the same for k and -k
            best = (float(spec.flat[i]), u, tuple((-x) % u for x in k))
    return best


def word_complexity(w, length, n=None):
    """Number of distinct length-L factors of w[0:n]."""
    w = np.asarray(w).astype(np.uint8)
    if n is not None:
        w = w[:int(n)]
    length = int(length)
    if length < 1 or length > w.shape[0]:
        raise DomainError(f"factor length {length} must lie in [1, {w.shape[0]}]")
    if length <= 62:
        codes = np.zeros(w.shape[0] - length + 1, dtype=np.int64)
        for i in range(length):
            codes = (codes << 1) | w[i:i + codes.shape[0]]
        return int(np.unique(codes).shape[0])
    win = np.lib.stride_tricks.sliding_window_view(w, length)
    return int(np.unique(win, axis=0).shape[0])


def indicator_of_range(a, n):
    """1_A on [1, N] (index i is n = i + 1) for a strictly increasing sequence a."""
    a = np.asarray(a, dtype=np.int64)
    if a.size > 1 and np.any(np.diff(a) <= 0):
        raise DomainError("indicator_of_range needs a strictly increasing sequence")
    out = np.zeros(int(n), dtype=np.uint8)
    inside = a[(a >= 1) & (a <= n)]
    out[inside - 1] = 1
    return out
