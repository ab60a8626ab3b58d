"""Cesaro and logarithmic averages with checkpointed convergence traces.

Sample arrays are 0-based views of 1-based sequences: ``samples[i] = a(i+1)``.
All sums go through :func:`mfcorr._kernels.product_sums`, so a logarithmic
average uses the same compensated block order for the numerator and for the
harmonic denominator.
"""
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import DomainError


def fmt17(x):
    """17 significant digits, the fixed float format of every report."""
    return format(float(x), ".17g")


class CheckpointSchedule:
    """N_k = ceil(N_0 r^k) capped at N_max; N_max is always the last point.

    The ratio is kept as an exact fraction (``1.5`` means 3/2), so the points
    never depend on floating point powers.
    """

    def __init__(self, n0, ratio, n_max):
        n0, n_max = int(n0), int(n_max)
        r = Fraction(str(ratio)) if not isinstance(ratio, Fraction) else ratio
        if n0 < 1:
            raise DomainError(f"schedule start must be >= 1, got {n0}")
        if r <= 1:
            raise DomainError(f"schedule ratio must exceed 1, got {ratio}")
        if n_max < n0:
            raise DomainError(f"schedule end {n_max} is below its start {n0}")
        self.n0, self.ratio, self.n_max = n0, r, n_max
        pts = []
        x = Fraction(n0)
        while True:
            n = math.ceil(x)
            if n >= n_max:
                break
            if not pts or n > pts[-1]:
                pts.append(n)
            x *= r
        pts.append(n_max)
        self.points = tuple(pts)

    @classmethod
    def explicit(cls, points):
        pts = [int(p) for p in points]
        if not pts or pts[0] < 1 or any(b <= a for a, b in zip(pts, pts[1:])):
            raise DomainError("explicit schedule must be increasing positive integers")
        obj = cls.__new__(cls)
        obj.n0, obj.ratio, obj.n_max = pts[0], None, pts[-1]
        obj.points = tuple(pts)
        return obj

    @property
    def descriptor(self):
        if self.ratio is None:
            return ",".join(map(str, self.points))
        r = self.ratio
        rs = str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"
        return f"{self.n0}:{rs}:{self.n_max}"

    @classmethod
    def parse(cls, text):
        """``"N0:RATIO:NMAX"`` or a comma list of explicit points."""
        text = str(text).strip()
        if ":" in text:
            n0, r, nmax = text.split(":")
            return cls(int(float(n0)), Fraction(r), int(float(nmax)))
        return cls.explicit(int(float(x)) for x in text.split(","))

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def __eq__(self, other):
        return isinstance(other, CheckpointSchedule) and self.points == other.points

    def __repr__(self):
        return f"CheckpointSchedule({self.descriptor!r})"


def as_schedule(schedule):
    if isinstance(schedule, CheckpointSchedule):
        return schedule
    if isinstance(schedule, (int, np.integer)):
        return CheckpointSchedule.explicit([int(schedule)])
    if isinstance(schedule, str):
        return CheckpointSchedule.parse(schedule)
    return CheckpointSchedule.explicit(schedule)


@dataclass
class ConvergenceReport:
    checkpoints: tuple
    values: np.ndarray
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.checkpoints = tuple(int(n) for n in self.checkpoints)
        self.values = np.asarray(self.values, dtype=np.complex128).reshape(-1)
        if len(self.checkpoints) != self.values.shape[0]:
            raise ValueError("one value per checkpoint is required")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("convergence report values must be finite")

    @property
    def final(self):
        return complex(self.values[-1])

    @property
    def tail(self):
        return self.values[-3:]

    @property
    def tail_max(self):
        return float(np.max(np.abs(self.tail)))

    @property
    def drift(self):
        """Sign of the change of |value| between the last two checkpoints."""
        if len(self.values) < 2:
            return 0
        d = abs(self.values[-1]) - abs(self.values[-2])
        return int(np.sign(d))

    def to_csv(self):
        out = io.StringIO()
        out.write("N,re,im\n")
        for n, v in zip(self.checkpoints, self.values):
            out.write(f"{n},{fmt17(v.real)},{fmt17(v.imag)}\n")
        return out.getvalue()

    def to_dict(self):
        return {
            "label": self.label,
            "checkpoints": list(self.checkpoints),
            "re": [float(v.real) for v in self.values],
            "im": [float(v.imag) for v in self.values],
            "tail_max": self.tail_max,
            "drift": self.drift,
            "meta": self.meta,
        }


def _real_or_complex(v, cplx):
    return complex(v) if cplx else float(v.real)


def _samples(samples, n):
    a = np.asarray(samples)
    if a.ndim != 1 or a.shape[0] < n:
        raise DomainError(f"samples must cover [1, {n}], got {a.shape[0] if a.ndim else 0} values")
    return a[:n] if np.iscomplexobj(a) else a[:n].astype(np.float64)


@lru_cache(maxsize=64)
def _harmonic(points):
    return _kernels.product_sums(np.ones((1, points[-1] + 1)), None, [[0]], points, True)[0]


def harmonic(points):
    """Compensated H_N = sum 1/n for each N in ``points``, same order as log sums."""
    pts = tuple(int(p) for p in points)
    return _harmonic(pts).copy()


def cesaro_sums(samples, schedule, weighted=False):
    sch = as_schedule(schedule)
    a = _samples(samples, sch.n_max)
    return _kernels.series_sums(a, sch.points, weighted)


def cesaro_avg(samples, n):
    n = int(n)
    if n < 1:
        raise DomainError("Cesaro average needs N >= 1")
    a = _samples(samples, n)
    return _real_or_complex(_kernels.series_sums(a, [n], False)[0] / n, np.iscomplexobj(a))


def log_avg(samples, n):
    n = int(n)
    if n < 1:
        raise DomainError("logarithmic average needs N >= 1")
    a = _samples(samples, n)
    s = _kernels.series_sums(a, [n], True)[0]
    return _real_or_complex(s / harmonic([n])[0], np.iscomplexobj(a))


def cesaro_trace(samples, schedule, label=""):
    sch = as_schedule(schedule)
    s = cesaro_sums(samples, sch, False)
    return ConvergenceReport(sch.points, s / np.array(sch.points, dtype=np.float64), label,
                             {"kind": "cesaro", "schedule": sch.descriptor})


def log_trace(samples, schedule, label=""):
    sch = as_schedule(schedule)
    s = cesaro_sums(samples, sch, True)
    return ConvergenceReport(sch.points, s / harmonic(sch.points), label,
                             {"kind": "logarithmic", "schedule": sch.descriptor})


def trace(samples, schedule, kind="logarithmic", label=""):
    if kind in ("log", "logarithmic"):
        return log_trace(samples, schedule, label)
    if kind == "cesaro":
        return cesaro_trace(samples, schedule, label)
    raise DomainError(f"unknown average kind {kind!r}")


def _fsum_c(values):
    values = np.asarray(values)
    if np.iscomplexobj(values):
        return complex(math.fsum(values.real.tolist()), math.fsum(values.imag.tolist()))
    return math.fsum(values.tolist())


def log_avg_primes(values, primes, n, d=1):
    """sum a(p)/p over p in P_d, p <= N, divided by the sum of 1/p.

    ``values[i]`` belongs to the prime ``primes[i]``.
    """
    primes = np.asarray(primes, dtype=np.int64)
    values = np.asarray(values)
    sel = (primes <= n) & ((primes - 1) % d == 0)
    if not sel.any():
        raise DomainError(f"no primes in P_{d} up to {n}")
    w = 1.0 / primes[sel].astype(np.float64)
    num = _fsum_c(values[sel] * w)
    return num / math.fsum(w.tolist())


def density_diagnostic(c, n, r=1):
    """E_{n in [N]^r} |c(n)|; ``c`` is an array of shape (N,)*r or a callable on index grids."""
    if r not in (1, 2, 3):
        raise DomainError("density_diagnostic supports r in {1, 2, 3}")
    if callable(c):
        grids = np.meshgrid(*[np.arange(1, n + 1)] * r, indexing="ij", sparse=True)
        vals = np.broadcast_to(np.asarray(c(*grids)), (n,) * r)
    else:
        vals = np.asarray(c)
        if vals.shape != (n,) * r:
            raise DomainError(f"expected an array of shape {(n,) * r}, got {vals.shape}")
    return math.fsum(np.abs(vals).ravel().tolist()) / n**r


def short_interval_variance(values, n_w, m):
    """E_{m'<=M} |E_{n<=N_w} a(n+m') - alpha|^2 with alpha = E_{n<=M} a(n).

    ``values[i] = a(i+1)`` must cover [1, M + N_w]. Window means come from
    one prefix-sum pass.
    """
    n_w, m = int(n_w), int(m)
    if n_w >= m:
        raise DomainError(f"window length {n_w} must be below the outer range {m}")
    if n_w < 1:
        raise DomainError("window length must be >= 1")
    a = np.asarray(values, dtype=np.float64)
    if a.shape[0] < m + n_w:
        raise DomainError(f"values must cover [1, {m + n_w}]")
    prefix = np.concatenate(([0.0], np.cumsum(a[:m + n_w])))
    alpha = math.fsum(a[:m].tolist()) / m
    # window for m' covers n + m' with n = 1..N_w, i.e. indices m'+1 .. m'+N_w
    starts = np.arange(1, m + 1)
    means = (prefix[starts + n_w] - prefix[starts]) / n_w
    return math.fsum(((means - alpha) ** 2).tolist()) / m
