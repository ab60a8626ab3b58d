"""Finite-scale correspondence: empirical moments and the indicator machinery.

The joint system of bounded sequences a_1..a_l is represented only through
its moments

    lE_{m <= N_k} prod_j a~_{c_j}(m + n_j),   a~ in {a, conj(a)},

stored in an append-only table keyed by a canonical string. Canonical keys
sort the factors and translate the shifts so that the smallest is 0, which
is harmless for shift-invariant limits.

Indexing: sequences are 1-based (``values[i] = a(i+1)``), binary sequences
y on Z_+ are 0-based. For an increasing a with range A,
tau_{1_A}(j) = a(j + 1).
"""
import json
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .averaging import ConvergenceReport, as_schedule, harmonic
from .correlations import _sequence, _spec, corr_along_deterministic
from .errors import DeterminismError, DomainError, RangeError
from .multfun import eval_range
from .sequences import Member
from .sieve import build_sieve


@dataclass(frozen=True)
class MomentSpec:
    """prod_j a~_{c_j}(m + n_j); ``conj[j]`` selects the conjugate sequence."""

    shifts: tuple
    components: tuple
    conj: tuple = None

    def __post_init__(self):
        shifts = tuple(int(s) for s in self.shifts)
        comps = tuple(int(c) for c in self.components)
        conj = tuple(bool(c) for c in self.conj) if self.conj is not None else (False,) * len(comps)
        if not shifts or not (len(shifts) == len(comps) == len(conj)):
            raise DomainError("shifts, components and conjugation flags need equal nonzero length")
        object.__setattr__(self, "shifts", shifts)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "conj", conj)

    @property
    def order(self):
        return len(self.shifts)

    def canonical(self):
        factors = sorted(zip(self.shifts, self.components, self.conj))
        base = factors[0][0]
        n, c, k = zip(*[(s - base, c, k) for s, c, k in factors])
        return MomentSpec(n, c, k)

    def translated(self, h):
        return MomentSpec(tuple(s + h for s in self.shifts), self.components, self.conj)

    @property
    def key(self):
        c = self.canonical()
        return ",".join(f"{n}:{j}{'*' if k else ''}"
                        for n, j, k in zip(c.shifts, c.components, c.conj))

    @classmethod
    def parse(cls, text):
        shifts, comps, conj = [], [], []
        for part in text.split(","):
            n, j = part.split(":")
            conj.append(j.endswith("*"))
            shifts.append(int(n))
            comps.append(int(j.rstrip("*")))
        return cls(shifts, comps, conj)


def _as_moment(spec):
    if isinstance(spec, MomentSpec):
        return spec
    if isinstance(spec, str):
        return MomentSpec.parse(spec)
    return MomentSpec(*spec)


class EmpiricalSystem:
    """Moments of bounded sequences along a checkpoint schedule.

    ``sequences`` are arrays with ``values[i] = a(i+1)``; each must cover
    [1, N_max + max_shift]. Values must lie in the closed unit disc.
    """

    def __init__(self, sequences, schedule, max_shift=None):
        self.schedule = as_schedule(schedule)
        seqs = [np.asarray(s, dtype=np.complex128) for s in sequences]
        if not seqs:
            raise DomainError("an empirical system needs at least one sequence")
        length = min(s.shape[0] for s in seqs)
        window = length - self.schedule.n_max
        if max_shift is not None:
            if max_shift > window:
                raise DomainError(f"sequences cover shifts up to {window}, not {max_shift}")
            window = int(max_shift)
        if window < 0:
            raise DomainError(f"sequences must cover [1, {self.schedule.n_max}]")
        for s in seqs:
            if np.any(np.abs(s) > 1 + 1e-12):
                raise DomainError("sequence values must lie in the unit disc")
        self.max_shift = window
        top = self.schedule.n_max + window
        self._re = np.zeros((len(seqs), top + 1))
        self._im = np.zeros((len(seqs), top + 1))
        for j, s in enumerate(seqs):
            self._re[j, 1:] = s[:top].real
            self._im[j, 1:] = s[:top].imag
        self._complex = bool(np.any(self._im != 0.0))
        self.table = {}

    @classmethod
    def from_functions(cls, functions, schedule, max_shift=16, sieve=None):
        sch = as_schedule(schedule)
        top = sch.n_max + max_shift
        if sieve is None:
            sieve = build_sieve(max(top, 2))
        seqs = [eval_range(_spec(f), 1, top, sieve) for f in functions]
        return cls(seqs, sch, max_shift)

    def __len__(self):
        return self._re.shape[0]

    def evaluate(self, spec, points=None):
        """Moment at the given (not translated) shifts, bypassing the table."""
        spec = _as_moment(spec)
        pts = self.schedule.points if points is None else tuple(points)
        if min(spec.shifts) < 0 or max(spec.shifts) > self.max_shift:
            raise DomainError(f"shifts {spec.shifts} are outside the window [0, {self.max_shift}]")
        for c in spec.components:
            if not 0 <= c < len(self):
                raise DomainError(f"unknown component index {c}; have {len(self)} sequences")
        re = self._re[list(spec.components)]
        im = None
        if self._complex:
            sign = np.array([-1.0 if k else 1.0 for k in spec.conj])[:, None]
            im = self._im[list(spec.components)] * sign
        sums = _kernels.product_sums(re, im, [list(spec.shifts)], pts, True)[0]
        return sums / harmonic(pts)

    def moment(self, spec):
        """Canonical moment as a :class:`ConvergenceReport`, recorded in the table."""
        spec = _as_moment(spec)
        canon = spec.canonical()
        values = self.evaluate(canon)
        self.record(spec.key, values)
        return ConvergenceReport(self.schedule.points, values, label=spec.key,
                                 meta={"kind": "moment", "schedule": self.schedule.descriptor})

    def record(self, key, values):
        values = np.asarray(values, dtype=np.complex128)
        if key in self.table:
            if not np.array_equal(self.table[key], values):
                raise DeterminismError(f"moment {key} was recorded with different values")
            return
        self.table[key] = values.copy()

    def to_json(self):
        pts = list(self.schedule.points)
        body = {key: [[n, float(v.real), float(v.imag)] for n, v in zip(pts, vals)]
                for key, vals in sorted(self.table.items())}
        return json.dumps({"schedule": self.schedule.descriptor, "moments": body}, indent=1,
                          sort_keys=True)

    def load_json(self, text):
        """Merge a serialized table; conflicting entries raise DeterminismError."""
        data = json.loads(text)
        for key, rows in data["moments"].items():
            if [r[0] for r in rows] != list(self.schedule.points):
                raise DomainError(f"moment {key} was computed on a different schedule")
            self.record(key, np.array([complex(r[1], r[2]) for r in rows]))


def moment(emp, shifts, components=None, conj=None):
    components = components if components is not None else (0,) * len(shifts)
    return emp.moment(MomentSpec(shifts, components, conj))


def shift_invariance_check(emp, specs, h):
    """max |moment(n) - moment(n + h)| at N_max over the sampled specs."""
    h = int(h)
    if h < 1:
        raise DomainError("translation amount h must be >= 1")
    n = [emp.schedule.n_max]
    gap = 0.0
    for spec in specs:
        spec = _as_moment(spec).canonical()
        a = emp.evaluate(spec, n)[0]
        b = emp.evaluate(spec.translated(h), n)[0]
        gap = max(gap, abs(a - b))
    return gap


@dataclass
class AdmissionVerdict:
    key: str
    values: list
    steps: list
    stabilizing: bool


def admission_test(emp, specs, tol):
    """"stabilizing" when the last two checkpoint increments are both <= tol."""
    if len(emp.schedule.points) < 3:
        raise DomainError("the admission test needs at least 3 checkpoints")
    out = []
    for spec in specs:
        spec = _as_moment(spec)
        vals = emp.moment(spec).values
        steps = [float(abs(vals[-2] - vals[-3])), float(abs(vals[-1] - vals[-2]))]
        out.append(AdmissionVerdict(spec.key, [complex(v) for v in vals], steps,
                                    all(s <= tol for s in steps)))
    return out


class IndicatorCorrespondence:
    """A 0-1 sequence y on [0, L) with cached ranks of its ones.

    ``in_z=True`` declares y to have finite support; tau is then 0.
    """

    def __init__(self, y, in_z=False):
        y = np.asarray(y)
        if y.ndim != 1 or np.any((y != 0) & (y != 1)):
            raise DomainError("y must be a 0-1 sequence")
        self.y = y.astype(np.uint8)
        self.in_z = bool(in_z)
        self.ones = np.flatnonzero(self.y).astype(np.int64)
        self.prefix = np.concatenate(([0], np.cumsum(self.y, dtype=np.int64)))

    @classmethod
    def from_sequence(cls, a, count):
        """y = 1_A on [0, a(count)] for the first ``count`` terms of a."""
        a = _sequence(a)
        vals = np.asarray(a.values(np.arange(1, int(count) + 1)), dtype=np.int64)
        if np.any(np.diff(vals) <= 0) or vals[0] < 0:
            raise DomainError(f"{a.descriptor} is not a strictly increasing sequence in Z_+")
        y = np.zeros(int(vals[-1]) + 1, dtype=np.uint8)
        y[vals] = 1
        return cls(y)

    def __len__(self):
        return self.y.shape[0]

    def tau(self, n):
        """Position of the (n+1)-th one of y."""
        n = int(n)
        if n < 0:
            raise DomainError("tau is defined on Z_+")
        if self.in_z:
            return 0
        if n >= self.ones.shape[0]:
            raise RangeError(f"tau({n}) needs {n + 1} ones but the cache [0, {len(self)}) holds "
                             f"{self.ones.shape[0]}; extend y")
        return int(self.ones[n])

    def taus(self, n):
        n = np.asarray(n, dtype=np.int64)
        if self.in_z:
            return np.zeros_like(n)
        if n.size and (n.min() < 0 or n.max() >= self.ones.shape[0]):
            raise RangeError(f"tau needs {int(n.max()) + 1} ones but the cache holds "
                             f"{self.ones.shape[0]}; extend y")
        return self.ones[n]

    def running_count(self, m):
        """k_y(m) = y(0) + ... + y(m-1)."""
        m = int(m)
        if not 0 <= m <= len(self):
            raise RangeError(f"k_y({m}) is outside the cached range [0, {len(self)}]")
        return int(self.prefix[m])

    def running_counts(self, m):
        m = np.asarray(m, dtype=np.int64)
        if m.size and (m.min() < 0 or m.max() > len(self)):
            raise RangeError(f"k_y is only cached on [0, {len(self)}]")
        return self.prefix[m]


def tau(ic, n):
    return ic.tau(n)


def running_count(ic, m):
    return ic.running_count(m)


@dataclass
class CorrespondenceCheck:
    lhs: complex
    rhs: complex
    alpha: float
    gap: float
    meta: dict

    def to_dict(self):
        return {"lhs": [self.lhs.real, self.lhs.imag], "rhs": [self.rhs.real, self.rhs.imag],
                "alpha": self.alpha, "gap": self.gap, "meta": self.meta}


def _count_at_most(seq, n):
    """#{i >= 1 : a(i) <= n} for an increasing sequence, by doubling and bisection."""
    if int(seq(1)) > n:
        return 0
    hi = 2
    while int(seq(hi)) <= n:
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        lo, hi = (mid, hi) if int(seq(mid)) <= n else (lo, mid)
    return lo


def correspondence_identity_check(functions, a, shifts, n, sieve=None):
    """LHS from F_{j,n}(x, y) = x_j(tau_y(n)) 1_{y(0)=1} along the orbit of (b, 1_A);
    RHS = alpha * lE_{m <= N} prod_j b_j(a(m + n_j)) with alpha the density of A in [1, N].
    """
    specs = [_spec(f) for f in functions]
    seq = _sequence(a)
    if not isinstance(seq, Member):
        raise DomainError("a must be a sequence")
    shifts = [int(s) for s in shifts]
    if len(shifts) != len(specs) or min(shifts) < 0:
        raise DomainError("one nonnegative shift per function is required")
    n = int(n)
    in_range = _count_at_most(seq, n)
    if in_range == 0:
        raise DomainError(f"the range of {seq.descriptor} has zero density in [1, {n}]")
    ic = IndicatorCorrespondence.from_sequence(seq, in_range + max(shifts) + 1)
    alpha = ic.running_count(n + 1) - ic.running_count(1)
    alpha = alpha / n
    top = max(n, int(ic.ones[-1]))
    if sieve is None:
        sieve = build_sieve(max(top, 2))
    # LHS: sum over m in [1, N] with y(m) = 1 of prod_j b_j(tau(k(m) + n_j)) / m
    ms = np.flatnonzero(ic.y[1:n + 1]) + 1
    ks = ic.running_counts(ms)
    prod = np.ones(ms.shape[0], dtype=np.complex128)
    tables = {}
    for f, s in zip(specs, shifts):
        if f not in tables:
            tables[f] = eval_range(f, 1, top, sieve)
        prod = prod * tables[f][ic.taus(ks + s) - 1]
    terms = np.zeros(n, dtype=np.complex128)
    terms[ms - 1] = prod
    lhs = complex(_kernels.series_sums(terms, [n], True)[0] / harmonic([n])[0])
    rhs = alpha * complex(corr_along_deterministic(specs, seq, shifts, [n], sieve=sieve).final)
    meta = {"functions": [f.descriptor for f in specs], "sequence": seq.descriptor,
            "shifts": shifts, "N": n}
    return CorrespondenceCheck(lhs, rhs, float(alpha), abs(lhs - rhs), meta)
