"""Pretentious distance, the Archimedean twist minimum and aperiodicity scans.

    D(f, g; N)^2 = sum_{p <= N} (1 - Re f(p) conj(g(p))) / p
    M(f; N)      = min_{|t| <= T} D(f, n^{it}; N)^2

The minimum over t is searched on the finite grid t = k * step, |t| <= T
(the grid always contains t = 0), followed by golden-section refinement
around the best grid point. T = 100 by default instead of T = N; every
result carries the configuration it was computed with.
"""
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .averaging import as_schedule, fmt17
from .errors import DomainError
from .multfun import MultFnSpec, characters, parse_function, prime_values


@dataclass(frozen=True)
class TwistSearchConfig:
    t_max: float = 100.0
    grid_step: float = 0.01
    refine: int = 30

    def __post_init__(self):
        if not (self.t_max > 0 and self.grid_step > 0):
            raise DomainError("t_max and grid_step must be positive")
        if self.grid_step >= self.t_max:
            raise DomainError("grid_step must be smaller than t_max")
        if self.refine < 0:
            raise DomainError("refinement iterations must be >= 0")

    @property
    def half_width(self):
        """Number of grid points on each side of t = 0."""
        return int(math.floor(self.t_max / self.grid_step + 1e-9))

    def to_dict(self):
        return {"t_max": self.t_max, "grid_step": self.grid_step, "refine": self.refine,
                "policy": "finite t-grid |t| <= t_max, golden-section refinement"}


def _primes(n, sieve):
    if n > sieve.limit:
        raise DomainError(f"N={n} exceeds the sieve limit {sieve.limit}")
    return sieve.primes_up_to(n)


def _prime_vals(f, primes):
    if isinstance(f, str):
        f = parse_function(f)
    if isinstance(f, MultFnSpec):
        return prime_values(f, primes)
    vals = np.asarray(f, dtype=np.complex128)
    if vals.shape[0] < primes.shape[0]:
        raise DomainError("prime value array is shorter than the prime list")
    return vals[:primes.shape[0]]


def _terms(a, b, primes):
    prod = a * np.conj(b)
    return np.maximum(0.0, 1.0 - prod.real) / primes.astype(np.float64)


def pretentious_distance_sq(f, g, n, sieve):
    """D(f, g; N)^2 with a correctly rounded sum (math.fsum)."""
    primes = _primes(int(n), sieve)
    if primes.size == 0:
        return 0.0
    return math.fsum(_terms(_prime_vals(f, primes), _prime_vals(g, primes), primes).tolist())


def pretentious_distance(f, g, n, sieve):
    return math.sqrt(pretentious_distance_sq(f, g, n, sieve))


def similarity_defect(a, b, n, sieve):
    """lE_{p <= N} (1 - Re a(p) conj(b(p))), weights 1/p."""
    primes = _primes(int(n), sieve)
    if primes.size == 0:
        raise DomainError(f"no primes up to {n}")
    w = 1.0 / primes.astype(np.float64)
    num = math.fsum(_terms(_prime_vals(a, primes), _prime_vals(b, primes), primes).tolist())
    return num / math.fsum(w.tolist())


def _twist_value(vals, logp, pf, t):
    if t == 0.0:
        return math.fsum(_terms(vals, 1.0, pf).tolist())
    ang = t * logp
    terms = np.maximum(0.0, 1.0 - (vals.real * np.cos(ang) + vals.imag * np.sin(ang))) / pf
    return math.fsum(terms.tolist())


@dataclass
class TwistResult:
    n: int
    t_star: float
    value: float
    value_at_zero: float
    config: TwistSearchConfig


def _golden(fun, a, b, iters):
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv * (b - a)
    d = a + inv * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = fun(d)
    return (c, fc) if fc <= fd else (d, fd)


def archimedean_min_trace(f, schedule, config, sieve):
    """M^(f; N_k) for every checkpoint from one pass over the primes."""
    config = config or TwistSearchConfig()
    sch = as_schedule(schedule)
    primes = _primes(sch.n_max, sieve)
    vals = _prime_vals(f, primes)
    logp = np.log(primes.astype(np.float64))
    pf = primes.astype(np.float64)
    invp = 1.0 / pf
    cuts = np.searchsorted(primes, np.array(sch.points), side="right")
    kk = config.half_width
    grid = _kernels.twist_grid(vals.real, vals.imag, logp, invp, -kk, 2 * kk + 1,
                               config.grid_step, cuts)
    out = []
    for ci, n in enumerate(sch.points):
        m = cuts[ci]
        v, lp, ip = vals[:m], logp[:m], pf[:m]
        row = grid[ci].copy()
        zero = _twist_value(v, lp, ip, 0.0)
        row[kk] = zero
        i = int(np.argmin(row))
        t_best = (i - kk) * config.grid_step
        best = float(row[i])
        if config.refine > 0 and m > 0:
            lo = max(-config.t_max, t_best - config.grid_step)
            hi = min(config.t_max, t_best + config.grid_step)
            t_ref, v_ref = _golden(lambda t: _twist_value(v, lp, ip, t), lo, hi, config.refine)
            if v_ref < best:
                t_best, best = t_ref, v_ref
        out.append(TwistResult(n, float(t_best), max(0.0, float(best)), float(zero), config))
    return out


def archimedean_min(f, n, config=None, sieve=None):
    """(t*, value) approximating min_{|t| <= t_max} D(f, n^{it}; N)^2."""
    res = archimedean_min_trace(f, [int(n)], config, sieve)[0]
    return res.t_star, res.value


@dataclass
class AperiodicityScan:
    q_max: int
    checkpoints: tuple
    config: TwistSearchConfig
    function: str
    rows: list = field(default_factory=list)

    @property
    def strongly_aperiodic(self):
        return all(r["increasing"] for r in self.rows)

    def failing(self):
        return [r for r in self.rows if not r["increasing"]]

    def to_csv(self):
        out = io.StringIO()
        out.write("modulus,character,N,value\n")
        for r in self.rows:
            for n, v in zip(self.checkpoints, r["values"]):
                out.write(f"{r['modulus']},{r['character']},{n},{fmt17(v)}\n")
        return out.getvalue()

    def to_dict(self):
        return {"function": self.function, "Q": self.q_max, "checkpoints": list(self.checkpoints),
                "config": self.config.to_dict(), "strongly_aperiodic": self.strongly_aperiodic,
                "rows": self.rows}


def scan_characters(q_max):
    """Principal and primitive characters of every modulus q <= Q."""
    out = []
    for q in range(1, q_max + 1):
        for chi in characters(q):
            if chi.is_principal or chi.is_primitive:
                out.append(chi)
    return out


def aperiodicity_scan(f, q_max, schedule, config=None, sieve=None, growth_eps=1e-9):
    """M^(f chi; N_k) for the principal and primitive characters of modulus <= Q.

    The twist f chi is formed on primes. A row is "increasing" when every
    checkpoint value exceeds the previous one by more than ``growth_eps``.
    """
    config = config or TwistSearchConfig()
    sch = as_schedule(schedule)
    primes = _primes(sch.n_max, sieve)
    base = _prime_vals(f, primes)
    if isinstance(f, str):
        f = parse_function(f)
    name = f.descriptor if isinstance(f, MultFnSpec) else "prime-values"
    scan = AperiodicityScan(int(q_max), sch.points, config, name)
    for chi in scan_characters(int(q_max)):
        twisted = base * chi.table[primes % chi.q]
        res = archimedean_min_trace(twisted, sch, config, sieve)
        vals = [r.value for r in res]
        inc = all(b > a + growth_eps for a, b in zip(vals, vals[1:]))
        scan.rows.append({"modulus": chi.q, "character": chi.index,
                          "primitive": chi.is_primitive, "values": vals,
                          "t_star": [r.t_star for r in res], "increasing": inc})
    return scan
