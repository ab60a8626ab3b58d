"""Correlation averages of multiplicative functions along shifts.

Three shift sources are supported:

* fixed      prod_j f_j(m + n_j) for a fixed tuple (n_0, ..., n_l)
* family     f_0(m) prod_{j>=1} f_j(m + a_j(n)) at an outer point n (n_0 = 0)
* composed   prod_j f_j(a(m + n_j)) for an increasing sequence a

Every average is a single pass of :func:`mfcorr._kernels.product_sums` over
value tables, so checkpoints, backends and thread counts all give the same
bits. Composition gathers f_j(a(m + n_j)) chunk by chunk from the sequence
generator; with a(n) = n the gathered tables coincide with the shifted value
tables and the result is bit-identical to the fixed-shift average.
"""
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .averaging import ConvergenceReport, as_schedule, harmonic
from .errors import DomainError
from .multfun import MultFnSpec, parse_function, value_table
from .sequences import Member, SequenceFamily, parse_sequence
from .sieve import build_sieve

GATHER_CHUNK = 1 << 20
DESK_TOLERANCE = 0.05


def _spec(f):
    return f if isinstance(f, MultFnSpec) else parse_function(str(f))


def _sequence(a):
    if a is None or isinstance(a, Member):
        return a
    if isinstance(a, str):
        return parse_sequence(a)
    raise DomainError(f"cannot use {a!r} as a sequence")


def _family(fam):
    return fam if isinstance(fam, SequenceFamily) else SequenceFamily.parse(str(fam))


def _ensure_sieve(sieve, top):
    if sieve is None:
        return build_sieve(max(int(top), 2))
    if top > sieve.limit:
        raise DomainError(f"the computation needs values up to {top}, beyond the sieve limit "
                          f"{sieve.limit}")
    return sieve


def _tables(specs, top, sieve):
    """(J, top+1) real and imaginary tables; imaginary is None for real input."""
    cache = {}
    for f in specs:
        if f not in cache:
            cache[f] = value_table(f, top, sieve)
    if all(cache[f][1] is None for f in specs):
        return np.stack([cache[f][0] for f in specs]), None
    zero = np.zeros(top + 1)
    re = np.stack([cache[f][0] for f in specs])
    im = np.stack([cache[f][1] if cache[f][1] is not None else zero for f in specs])
    return re, im


def _seq_values(a, n):
    return np.asarray(a.values(np.asarray(n, dtype=np.int64)), dtype=np.int64)


def _point_norm(n):
    return int(sum(abs(int(x)) for x in np.atleast_1d(n)))


def _average(sums, points, kind):
    pts = np.array(points, dtype=np.float64)
    if kind in ("log", "logarithmic"):
        return sums / harmonic(points)
    if kind == "cesaro":
        return sums / pts
    raise DomainError(f"unknown average kind {kind!r}")


def _weighted(kind):
    if kind in ("log", "logarithmic"):
        return True
    if kind == "cesaro":
        return False
    raise DomainError(f"unknown average kind {kind!r}")


@dataclass(frozen=True)
class ShiftSource:
    """Where the shifts come from; build with :meth:`fixed`, :meth:`family`, :meth:`composed`."""

    mode: str
    shifts: tuple = ()
    family: SequenceFamily = None
    point: object = None
    sequence: Member = None

    @classmethod
    def fixed(cls, shifts):
        shifts = tuple(int(s) for s in shifts)
        if any(s < 0 for s in shifts):
            raise DomainError(f"shifts must be nonnegative, got {shifts}")
        return cls("fixed", shifts)

    @classmethod
    def family_at(cls, family, n):
        family = _family(family)
        n = tuple(int(x) for x in np.atleast_1d(n))
        if len(n) != family.arity:
            raise DomainError(f"outer point {n} does not have the family arity {family.arity}")
        if any(x < 1 for x in n):
            raise DomainError(f"outer point {n} must lie in N^r")
        return cls("family", (), family, n)

    @classmethod
    def composed(cls, sequence, shifts):
        src = cls.fixed(shifts)
        seq = _sequence(sequence)
        if seq is None:
            raise DomainError("composition needs a sequence")
        return cls("composed", src.shifts, sequence=seq)

    def resolved_shifts(self):
        """Additive shifts of the table lookups (fixed and family modes)."""
        if self.mode == "family":
            pt = self.point if self.family.arity > 1 else self.point[0]
            return (0,) + tuple(int(m(pt)) for m in self.family.members)
        return self.shifts

    def to_dict(self):
        d = {"mode": self.mode}
        if self.mode == "family":
            d.update(family=self.family.descriptor, n=list(self.point),
                     norm=_point_norm(self.point), shifts=list(self.resolved_shifts()))
        else:
            d["shifts"] = list(self.shifts)
        if self.mode == "composed":
            d["sequence"] = self.sequence.descriptor
        return d


def _gather(specs, seq, shifts, n_max, sieve):
    """Tables g_j[m] = f_j(a(m + n_j)) for m = 0..n_max (entry 0 is 0)."""
    lo_s, hi_s = min(shifts), max(shifts)
    top = int(_seq_values(seq, [n_max + hi_s])[0])
    sieve = _ensure_sieve(sieve, top)
    re_t, im_t = _tables(specs, top, sieve)
    J = len(specs)
    gre = np.zeros((J, n_max + 1))
    gim = np.zeros((J, n_max + 1)) if im_t is not None else None
    for c0 in range(1, n_max + 1, GATHER_CHUNK):
        c1 = min(n_max, c0 + GATHER_CHUNK - 1)
        start = max(1, c0 + lo_s - 1)
        vals = _seq_values(seq, np.arange(start, c1 + hi_s + 1))
        if np.any(np.diff(vals) <= 0):
            raise DomainError(f"sequence {seq.descriptor} is not strictly increasing")
        if vals[0] < 1 or vals[-1] > top:
            raise DomainError(f"sequence {seq.descriptor} leaves [1, {top}]")
        for j, s in enumerate(shifts):
            idx = vals[c0 + s - start:c1 + s - start + 1]
            gre[j, c0:c1 + 1] = re_t[j, idx]
            if gim is not None:
                gim[j, c0:c1 + 1] = im_t[j, idx]
    return gre, gim, sieve


@dataclass
class CorrelationResult:
    report: ConvergenceReport
    mode: str
    spec: dict = field(default_factory=dict)
    outer: tuple = None
    outer_norm: int = None

    @property
    def checkpoints(self):
        return self.report.checkpoints

    @property
    def values(self):
        return self.report.values

    @property
    def final(self):
        return self.report.final

    def to_csv(self):
        return self.report.to_csv()

    def to_dict(self):
        d = {"mode": self.mode, "spec": self.spec, "report": self.report.to_dict()}
        if self.outer is not None:
            d.update(n=list(self.outer), norm=self.outer_norm)
        return d


@dataclass
class CorrelationSpec:
    functions: list
    source: ShiftSource
    kind: str = "logarithmic"
    schedule: object = None
    transform: object = None

    def __post_init__(self):
        self.functions = [_spec(f) for f in self.functions]
        if not self.functions:
            raise DomainError("a correlation needs at least one function")
        self.schedule = as_schedule(self.schedule)
        _weighted(self.kind)
        if self.source.mode == "family":
            need = len(self.source.family) + 1
        else:
            need = len(self.source.shifts)
        if len(self.functions) != need:
            raise DomainError(f"{len(self.functions)} functions for {need} shift positions")

    def to_dict(self):
        return {"functions": [f.descriptor for f in self.functions], "kind": self.kind,
                "schedule": self.schedule.descriptor, "source": self.source.to_dict()}

    def tables(self, sieve=None):
        """(re, im, offsets, sieve) ready for :func:`product_sums`."""
        n_max = self.schedule.n_max
        if self.source.mode == "composed":
            re, im, sieve = _gather(self.functions, self.source.sequence, self.source.shifts,
                                    n_max, sieve)
            offs = [0] * len(self.functions)
        else:
            offs = list(self.source.resolved_shifts())
            sieve = _ensure_sieve(sieve, n_max + max(offs))
            re, im = _tables(self.functions, n_max + max(offs), sieve)
        if self.transform is not None:
            re, im = self.transform(re, im)
        return re, im, offs, sieve

    def run(self, sieve=None):
        re, im, offs, sieve = self.tables(sieve)
        pts = self.schedule.points
        sums = _kernels.product_sums(re, im, [offs], pts, _weighted(self.kind))[0]
        report = ConvergenceReport(pts, _average(sums, pts, self.kind),
                                   label=",".join(f.descriptor for f in self.functions),
                                   meta={"kind": self.kind, "schedule": self.schedule.descriptor})
        src = self.source
        outer = src.point if src.mode == "family" else None
        return CorrelationResult(report, src.mode, self.to_dict(), outer,
                                 _point_norm(outer) if outer is not None else None)


def corr_fixed_shifts(functions, shifts, schedule, kind="logarithmic", sieve=None):
    """(l)E_{m <= N_k} prod_j f_j(m + n_j) at every checkpoint."""
    return CorrelationSpec(functions, ShiftSource.fixed(shifts), kind, schedule).run(sieve)


def corr_along_deterministic(functions, a, shifts, schedule, kind="logarithmic", sieve=None):
    """(l)E_{m <= N_k} prod_j f_j(a(m + n_j)) for a strictly increasing sequence a."""
    return CorrelationSpec(functions, ShiftSource.composed(a, shifts), kind, schedule).run(sieve)


def corr_shifted_by_family(functions, family, n, schedule, kind="logarithmic", sieve=None):
    """(l)E_{m <= N_k} f_0(m) prod_{j>=1} f_j(m + a_j(n))."""
    return CorrelationSpec(functions, ShiftSource.family_at(family, n), kind, schedule).run(sieve)


@dataclass
class IdentityCheck:
    lhs: complex
    rhs: complex
    gap: float
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return {"lhs": [self.lhs.real, self.lhs.imag], "rhs": [self.rhs.real, self.rhs.imag],
                "gap": self.gap, "meta": self.meta}


def _row_log_averages(re, im, offsets, n):
    """lE_{m <= n} prod_j t_j[m + off[r, j]] for every offset row r."""
    sums = _kernels.product_sums(re, im, offsets, [n], True)[:, 0]
    return sums / harmonic([n])[0]


def _log_outer(values):
    """Logarithmic average over n = 1..len(values) with fsum."""
    values = np.asarray(values, dtype=np.complex128)
    w = 1.0 / np.arange(1, values.shape[0] + 1, dtype=np.float64)
    h = math.fsum(w.tolist())
    return complex(math.fsum((values.real * w).tolist()) / h,
                   math.fsum((values.imag * w).tolist()) / h)


def _mean(values):
    values = np.asarray(values, dtype=np.complex128)
    n = values.shape[0]
    return complex(math.fsum(values.real.tolist()) / n, math.fsum(values.imag.tolist()) / n)


def identity_check_deterministic(functions, a, shifts, n_outer, n_inner, sieve=None):
    """LHS = lE_m prod f_j(a(m+n_j)); RHS = lE_{n<=N_outer} lE_m prod f_j(m + a(n+n_j))."""
    specs = [_spec(f) for f in functions]
    seq = _sequence(a)
    n_outer, n_inner = int(n_outer), int(n_inner)
    lhs = corr_along_deterministic(specs, seq, shifts, [n_inner], sieve=sieve).final
    shifts = [int(s) for s in shifts]
    offs = np.stack([_seq_values(seq, np.arange(1, n_outer + 1) + s) for s in shifts], axis=1)
    if offs.min() < 0:
        raise DomainError("the sequence takes negative values")
    top = n_inner + int(offs.max())
    sieve = _ensure_sieve(sieve, top)
    re, im = _tables(specs, top, sieve)
    rhs = _log_outer(_row_log_averages(re, im, offs, n_inner))
    meta = {"functions": [f.descriptor for f in specs], "sequence": seq.descriptor,
            "shifts": shifts, "N_outer": n_outer, "N_inner": n_inner}
    return IdentityCheck(complex(lhs), rhs, abs(complex(lhs) - rhs), meta)


@dataclass
class ProductIdentityCheck:
    lhs: float
    rhs_a: float
    rhs_b: float
    means: list
    meta: dict = field(default_factory=dict)

    @property
    def gap_a(self):
        return abs(self.lhs - self.rhs_a)

    @property
    def gap_b(self):
        return abs(self.lhs - self.rhs_b)

    def to_dict(self):
        return {"lhs": self.lhs, "rhs_a": self.rhs_a, "rhs_b": self.rhs_b, "gap_a": self.gap_a,
                "gap_b": self.gap_b, "means": self.means, "meta": self.meta}


def product_identity_check(functions, family, n_outer, n_inner, sieve=None):
    """E_{n in [N_outer]^r} lE_{m <= N_inner} prod_j f_j(m + a_j(n)) against products of means.

    ``rhs_a`` multiplies the means of f_1..f_l, ``rhs_b`` also includes f_0.
    Only real-valued functions with values in [-1, 1] are accepted.
    """
    specs = [_spec(f) for f in functions]
    for f in specs:
        if not f.is_real:
            raise DomainError(f"{f.descriptor} is complex valued; the product identity "
                              "only holds for real-valued functions")
    family = _family(family)
    if len(specs) != len(family) + 1:
        raise DomainError(f"{len(specs)} functions for a family of {len(family)} members")
    n_outer, n_inner = int(n_outer), int(n_inner)
    grid = family.grid(n_outer)
    offs = np.stack([np.zeros(grid[0].size, dtype=np.int64)] +
                    [np.asarray(g, dtype=np.int64).ravel() for g in grid], axis=1)
    if offs.min() < 0:
        raise DomainError("family members take negative values")
    top = n_inner + int(offs.max())
    sieve = _ensure_sieve(sieve, top)
    re, im = _tables(specs, top, sieve)
    if im is not None or np.max(np.abs(re)) > 1.0:
        raise DomainError("product identity needs real values in [-1, 1]")
    rows = _row_log_averages(re, None, offs, n_inner)
    lhs = math.fsum(rows.tolist()) / rows.shape[0]
    hn = harmonic([n_inner])[0]
    means = [float(_kernels.product_sums(re[j:j + 1], None, [[0]], [n_inner], True)[0, 0] / hn)
             for j in range(len(specs))]
    rhs_a = math.prod(means[1:])
    rhs_b = math.prod(means)
    meta = {"functions": [f.descriptor for f in specs], "family": family.descriptor,
            "N_outer": n_outer, "N_inner": n_inner}
    return ProductIdentityCheck(lhs, rhs_a, rhs_b, means, meta)


def _pattern_transform(eps):
    eps = np.asarray(eps, dtype=np.float64)[:, None]

    def apply(re, im):
        if im is not None and np.any(im != 0.0):
            raise DomainError("pattern densities need {-1, +1}-valued functions")
        body = re[:, 1:]
        if not np.all(np.abs(body) == 1.0):
            raise DomainError("pattern densities need {-1, +1}-valued functions")
        out = (1.0 + eps * re) * 0.5
        out[:, 0] = 0.0
        return out, None

    return apply


def _source(shifts=None, family=None, n=None, sequence=None):
    if family is not None:
        return ShiftSource.family_at(family, n)
    if sequence is not None:
        return ShiftSource.composed(sequence, shifts)
    return ShiftSource.fixed(shifts)


def pattern_density(functions, eps, schedule, shifts=None, family=None, n=None, sequence=None,
                    kind="logarithmic", sieve=None):
    """lE_{m <= N_k} prod_j (1 + eps_j f_j(m + shift_j)) / 2 for +-1 valued f_j."""
    eps = tuple(int(e) for e in eps)
    if any(e not in (-1, 1) for e in eps):
        raise DomainError(f"pattern entries must be +-1, got {eps}")
    spec = CorrelationSpec(functions, _source(shifts, family, n, sequence), kind, schedule,
                           _pattern_transform(eps))
    if len(eps) != len(spec.functions):
        raise DomainError(f"{len(eps)} pattern entries for {len(spec.functions)} functions")
    for f in spec.functions:
        if f.kind != "custom" and not f.is_sign_valued:
            raise DomainError(f"{f.descriptor} is not {{-1, +1}}-valued")
    res = spec.run(sieve)
    res.spec["eps"] = list(eps)
    return res


def pattern_densities(functions, schedule, shifts=None, family=None, n=None, sequence=None,
                      kind="logarithmic", sieve=None):
    """All 2^(l+1) sign patterns, keyed by the eps tuple."""
    k = len(functions)
    if sieve is None:
        spec = CorrelationSpec(functions, _source(shifts, family, n, sequence), kind, schedule)
        _, _, _, sieve = spec.tables()
    return {eps: pattern_density(functions, eps, schedule, shifts, family, n, sequence, kind,
                                 sieve)
            for eps in itertools.product((1, -1), repeat=k)}


def discrepancy_growth(f, a, schedule, sieve=None):
    """max_{n <= N_k} |sum_{k <= n} f(a(k))| at every checkpoint (a = None means a(n) = n)."""
    f = _spec(f)
    sch = as_schedule(schedule)
    seq = _sequence(a)
    if seq is None:
        sieve = _ensure_sieve(sieve, sch.n_max)
        re, im = value_table(f, sch.n_max, sieve)
    else:
        re, im, sieve = _gather([f], seq, [0], sch.n_max, sieve)
        re, im = re[0], (im[0] if im is not None else None)
    vals = re[1:] if im is None else re[1:] + 1j * im[1:]
    running = np.maximum.accumulate(np.abs(np.cumsum(vals)))
    out = running[np.array(sch.points) - 1]
    meta = {"function": f.descriptor, "sequence": seq.descriptor if seq else "identity",
            "schedule": sch.descriptor}
    return ConvergenceReport(sch.points, out, label="discrepancy", meta=meta)


def prime_dilation_identity_check(functions, shifts, d, p_max, n, sieve=None):
    """LHS = lE_m prod f_j(m + n_j); RHS = E_{p in P_d, p <= P} lE_m prod f_j(m + p n_j)."""
    specs = [_spec(f) for f in functions]
    shifts = np.array([int(s) for s in shifts], dtype=np.int64)
    if shifts.shape[0] != len(specs):
        raise DomainError(f"{len(specs)} functions for {shifts.shape[0]} shifts")
    if np.any(shifts < 0):
        raise DomainError("shifts must be nonnegative")
    n, p_max, d = int(n), int(p_max), int(d)
    top = n + p_max * int(shifts.max())
    sieve = _ensure_sieve(sieve, max(top, p_max))
    primes = sieve.primes_up_to(p_max, d)
    if primes.size == 0:
        raise DomainError(f"no primes in P_{d} up to {p_max}")
    re, im = _tables(specs, top, sieve)
    lhs = complex(_row_log_averages(re, im, shifts[None, :], n)[0])
    rows = _row_log_averages(re, im, primes[:, None] * shifts[None, :], n)
    rhs = _mean(rows)
    meta = {"functions": [f.descriptor for f in specs], "shifts": shifts.tolist(), "d": d,
            "P": p_max, "N": n, "primes": int(primes.size)}
    return IdentityCheck(lhs, rhs, abs(lhs - rhs), meta)
