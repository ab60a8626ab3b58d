"""Segmented smallest-prime-factor sieve producing lambda, mu and Omega tables.

A window [lo, hi] is sieved by the base primes up to sqrt(hi). Every prime
power p^k <= hi marks its multiples once, so after the pass ``big_omega``
counts every prime factor except possibly one prime larger than sqrt(hi);
that leftover is detected by comparing the product of the marked primes with
n itself. Windows are cut into segments that are sieved independently (in
parallel under numba), so the result never depends on the segmentation.

Binary table format (all little-endian)::

    offset  size  field
    0       4     magic  b"MFCT"
    4       4     uint32 format version (currently 1)
    8       8     uint64 lo
    16      8     uint64 hi
    24      n     uint8  big_omega[n]      (n = hi - lo + 1)
    24+n    n     int8   mobius[n]
    24+2n   8n    int64  spf[n]            (spf(1) = 1)
"""
import math
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import DomainError, ResourceError

DEFAULT_SEGMENT = 1 << 18
DEFAULT_BUDGET = 2 << 30
BYTES_PER_ENTRY = 10
FORMAT_VERSION = 1
_MAGIC = b"MFCT"
_HEADER = struct.Struct("<4sIQQ")


def small_primes(n):
    """Primes <= n by a plain boolean Eratosthenes sieve."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return np.flatnonzero(flags).astype(np.int64)


@dataclass(frozen=True)
class ArithmeticTable:
    """lambda, mu, Omega and smallest prime factor on the window [lo, hi].

    Arrays are 0-based: ``big_omega[i]`` belongs to ``n = lo + i``.
    """

    lo: int
    hi: int
    big_omega: np.ndarray
    mobius: np.ndarray
    spf: np.ndarray

    @property
    def lam(self):
        """Liouville values (-1)^Omega as int8."""
        return (1 - 2 * (self.big_omega & 1)).astype(np.int8)

    @property
    def n(self):
        return np.arange(self.lo, self.hi + 1, dtype=np.int64)

    def __len__(self):
        return self.hi - self.lo + 1

    def window(self, lo, hi):
        """Sub-window view."""
        if lo < self.lo or hi > self.hi or lo > hi:
            raise DomainError(f"[{lo}, {hi}] is not inside [{self.lo}, {self.hi}]")
        a, b = lo - self.lo, hi - self.lo + 1
        return ArithmeticTable(lo, hi, self.big_omega[a:b], self.mobius[a:b], self.spf[a:b])

    def dump(self, path):
        header = _HEADER.pack(_MAGIC, FORMAT_VERSION, self.lo, self.hi)
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(self.big_omega.astype("<u1").tobytes())
            fh.write(self.mobius.astype("<i1").tobytes())
            fh.write(self.spf.astype("<i8").tobytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            magic, version, lo, hi = _HEADER.unpack(fh.read(_HEADER.size))
            if magic != _MAGIC:
                raise ValueError(f"{path}: not an arithmetic table (bad magic)")
            if version != FORMAT_VERSION:
                raise ValueError(f"{path}: format version {version}, expected {FORMAT_VERSION}")
            n = hi - lo + 1
            omega = np.frombuffer(fh.read(n), dtype="<u1").copy()
            mu = np.frombuffer(fh.read(n), dtype="<i1").copy()
            spf = np.frombuffer(fh.read(8 * n), dtype="<i8").astype(np.int64)
        if spf.shape[0] != n:
            raise ValueError(f"{path}: truncated table")
        return cls(int(lo), int(hi), omega, mu, spf)


class SegmentedFactorSieve:
    """Factorization tables for every window of [1, limit].

    The object is immutable after construction. A prefix table [1, M] is
    kept once computed so that repeated requests near the origin are cheap;
    with ``cache_dir`` the full [1, limit] table is stored on disk keyed by
    (limit, format version).
    """

    def __init__(self, limit, segment_size=DEFAULT_SEGMENT, memory_budget=DEFAULT_BUDGET,
                 cache_dir=None):
        limit = int(limit)
        if limit < 2:
            raise DomainError(f"sieve limit must be >= 2, got {limit}")
        need = limit * BYTES_PER_ENTRY
        if need > memory_budget:
            raise ResourceError(
                f"limit {limit} needs about {need} bytes of tables, over the memory budget "
                f"of {memory_budget} bytes; raise memory_budget or lower the limit")
        if segment_size < 1:
            raise DomainError("segment_size must be positive")
        self.limit = limit
        self.segment_size = int(segment_size)
        self.memory_budget = int(memory_budget)
        self.cache_dir = Path(cache_dir) if cache_dir is not None else None
        self.base_primes = small_primes(math.isqrt(limit))
        self._prefix = None

    def __repr__(self):
        return f"SegmentedFactorSieve(limit={self.limit}, segment_size={self.segment_size})"

    def _check_window(self, lo, hi):
        if not (1 <= lo <= hi <= self.limit):
            raise DomainError(f"window [{lo}, {hi}] is outside [1, {self.limit}]")

    def sieve(self, lo, hi, segment_size=None):
        """Sieve [lo, hi] from scratch (no caching)."""
        lo, hi = int(lo), int(hi)
        self._check_window(lo, hi)
        seg = int(segment_size or self.segment_size)
        omega, mu, spf = _kernels.sieve_window(lo, hi, self.base_primes, seg)
        return ArithmeticTable(lo, hi, omega, mu, spf)

    def _cache_path(self):
        return self.cache_dir / f"mfcorr-sieve-v{FORMAT_VERSION}-{self.limit}.bin"

    def prefix_table(self, n):
        """Table on [1, n], served from the cached prefix when possible."""
        n = int(n)
        self._check_window(1, n)
        if self._prefix is None or self._prefix.hi < n:
            if self.cache_dir is not None:
                self._prefix = self._load_or_build_full()
            else:
                self._prefix = self.sieve(1, n)
        return self._prefix.window(1, n)

    def _load_or_build_full(self):
        path = self._cache_path()
        if path.exists():
            try:
                table = ArithmeticTable.load(path)
                if table.lo == 1 and table.hi == self.limit:
                    return table
            except (ValueError, OSError):
                pass
        table = self.sieve(1, self.limit)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(f".tmp{os.getpid()}")
        table.dump(tmp)
        os.replace(tmp, path)
        return table

    def arithmetic_table(self, lo, hi=None):
        """lambda/mu/Omega table on [lo, hi] (``lo`` alone means [1, lo])."""
        if hi is None:
            lo, hi = 1, lo
        lo, hi = int(lo), int(hi)
        self._check_window(lo, hi)
        if lo == 1 or (self._prefix is not None and hi <= self._prefix.hi):
            return self.prefix_table(hi).window(lo, hi)
        return self.sieve(lo, hi)

    def factorize(self, n):
        """[(p, e), ...] in increasing p with prod p^e = n."""
        n = int(n)
        if not (1 <= n <= self.limit):
            raise DomainError(f"factorize: n={n} is outside [1, {self.limit}]")
        out = []
        if self._prefix is not None and n <= self._prefix.hi:
            spf = self._prefix.spf
            while n > 1:
                p = int(spf[n - 1])
                e = 0
                while n % p == 0:
                    n //= p
                    e += 1
                out.append((p, e))
            return out
        for p in self.base_primes.tolist():
            if p * p > n:
                break
            if n % p == 0:
                e = 0
                while n % p == 0:
                    n //= p
                    e += 1
                out.append((p, e))
        if n > 1:
            out.append((n, 1))
        return out

    def primes_up_to(self, n, d=1):
        """Increasing primes p <= n, restricted to p = 1 (mod d) when d > 1."""
        n = int(n)
        if n > self.limit:
            raise DomainError(f"primes_up_to: {n} exceeds the sieve limit {self.limit}")
        if d < 1:
            raise DomainError("residue modulus d must be >= 1")
        if n < 2:
            return np.zeros(0, dtype=np.int64)
        table = self.prefix_table(n)
        nums = table.n
        primes = nums[(table.spf == nums) & (nums >= 2)]
        if d > 1:
            primes = primes[(primes - 1) % d == 0]
        return primes


def build_sieve(limit, **kwargs):
    return SegmentedFactorSieve(limit, **kwargs)
