"""Bounded multiplicative functions f: N -> closed unit disc, with f(n) = 0 for n <= 0.

Descriptor grammar (round-trippable through :func:`parse_function` and
:attr:`MultFnSpec.descriptor`)::

    liouville | moebius | one | mu_squared
    archimedean:T          n^{iT}, T a finite real
    root_twist:D[:K]       completely multiplicative, f(p) = e(K/D); K defaults to 1
    dirichlet:Q:I          character number I of modulus Q (I = 0 is principal)

Custom functions are built in code with :func:`custom` from a prime-power
rule ``(p, e) -> value``; they have no textual form.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Callable, Optional

import numpy as np
import sympy

from .errors import DescriptorError, DomainError

BUILTIN_KINDS = ("liouville", "moebius", "one", "mu_squared", "archimedean", "root_twist",
                 "dirichlet", "custom")

_SQRT3_2 = math.sqrt(3.0) / 2.0
_EXACT_ROOTS = {
    Fraction(0): 1 + 0j, Fraction(1, 12): complex(_SQRT3_2, 0.5),
    Fraction(1, 6): complex(0.5, _SQRT3_2), Fraction(1, 4): 1j,
    Fraction(1, 3): complex(-0.5, _SQRT3_2), Fraction(5, 12): complex(-_SQRT3_2, 0.5),
    Fraction(1, 2): -1 + 0j, Fraction(7, 12): complex(-_SQRT3_2, -0.5),
    Fraction(2, 3): complex(-0.5, -_SQRT3_2), Fraction(3, 4): -1j,
    Fraction(5, 6): complex(0.5, -_SQRT3_2), Fraction(11, 12): complex(_SQRT3_2, -0.5),
    Fraction(1, 8): complex(math.sqrt(0.5), math.sqrt(0.5)),
    Fraction(3, 8): complex(-math.sqrt(0.5), math.sqrt(0.5)),
    Fraction(5, 8): complex(-math.sqrt(0.5), -math.sqrt(0.5)),
    Fraction(7, 8): complex(math.sqrt(0.5), -math.sqrt(0.5)),
}


def unit_root(x):
    """e(x) = exp(2 pi i x) for a rational x; exact at multiples of 1/8 and 1/12."""
    x = Fraction(x) % 1
    if x in _EXACT_ROOTS:
        return _EXACT_ROOTS[x]
    ang = 2.0 * math.pi * float(x)
    return complex(math.cos(ang), math.sin(ang))


# ---------------------------------------------------------------------------
# Dirichlet characters
# ---------------------------------------------------------------------------


def _primitive_root(p):
    phi = p - 1
    qs = list(sympy.factorint(phi))
    for g in range(2, p):
        if all(pow(g, phi // r, p) != 1 for r in qs):
            return g
    return 1


def _unit_group_generators(q):
    """Generators (g, order) of (Z/qZ)^*, one cyclic factor each."""
    gens = []
    fac = sympy.factorint(q)
    for p, e in sorted(fac.items()):
        pe = p ** e
        rest = q // pe

        def lift(x):
            if rest == 1:
                return x % q
            # x mod p^e, 1 mod rest
            return (x * rest * pow(rest, -1, pe) + pe * pow(pe, -1, rest)) % q

        if p == 2:
            if e >= 2:
                gens.append((lift(pe - 1), 2))
            if e >= 3:
                gens.append((lift(5), 2 ** (e - 2)))
        else:
            g = _primitive_root(p)
            if e > 1 and pow(g, p - 1, p * p) == 1:
                g += p
            gens.append((lift(g), (p - 1) * p ** (e - 1)))
    return gens


class DirichletCharacter:
    """Character of (Z/qZ)^* given by exact residue tables.

    ``index`` is read as mixed-radix digits (a_1, ..., a_s) over the cyclic
    factor orders, first factor least significant, and chi(g_i) = e(a_i/o_i).
    """

    def __init__(self, q, index):
        if q < 1:
            raise DomainError(f"character modulus must be >= 1, got {q}")
        gens = _unit_group_generators(q)
        count = math.prod(o for _, o in gens)
        if not 0 <= index < count:
            raise DomainError(f"character index {index} out of range [0, {count}) for modulus {q}")
        digits = []
        rem = index
        for _, o in gens:
            digits.append(rem % o)
            rem //= o
        self.q = q
        self.index = index
        self.digits = tuple(digits)
        self.generators = tuple(gens)
        angles = {}
        for exps in product(*[range(o) for _, o in gens]):
            r = 1 % q
            ang = Fraction(0)
            for (g, o), x, a in zip(gens, exps, digits):
                r = (r * pow(g, x, q)) % q
                ang += Fraction(a * x, o)
            angles[r] = ang % 1
        self.angles = angles
        table = np.zeros(q, dtype=np.complex128)
        for r, ang in angles.items():
            table[r] = unit_root(ang)
        self.table = table
        self.table.setflags(write=False)

    @property
    def is_principal(self):
        return self.index == 0

    @property
    def is_real(self):
        return all(a in (Fraction(0), Fraction(1, 2)) for a in self.angles.values())

    @property
    def conductor(self):
        for d in sorted(sympy.divisors(self.q)):
            if all(self.angles[r] == 0 for r in self.angles if r % d == 1 % d):
                return d
        return self.q

    @property
    def is_primitive(self):
        return self.conductor == self.q

    def __call__(self, n):
        return complex(self.table[int(n) % self.q]) if n > 0 else 0j


@lru_cache(maxsize=256)
def character(q, index):
    return DirichletCharacter(q, index)


def character_count(q):
    return int(sympy.totient(q))


def characters(q):
    return [character(q, i) for i in range(character_count(q))]


# ---------------------------------------------------------------------------
# MultFnSpec
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultFnSpec:
    kind: str
    params: tuple = ()
    completely_multiplicative: bool = True
    rule: Optional[Callable] = field(default=None, compare=False, repr=False)
    name: str = ""

    def __post_init__(self):
        if self.kind not in BUILTIN_KINDS:
            raise DomainError(f"unknown multiplicative function kind {self.kind!r}")

    @property
    def descriptor(self):
        if self.kind == "custom":
            return f"custom:{self.name or 'rule'}"
        if self.kind == "archimedean":
            return f"archimedean:{self.params[0]!r}"
        if self.kind == "root_twist":
            d, k = self.params
            return f"root_twist:{d}" if k == 1 else f"root_twist:{d}:{k}"
        if self.kind == "dirichlet":
            return f"dirichlet:{self.params[0]}:{self.params[1]}"
        return self.kind

    def __str__(self):
        return self.descriptor

    @property
    def character(self):
        if self.kind != "dirichlet":
            return None
        return character(*self.params)

    @property
    def is_real(self):
        k = self.kind
        if k in ("liouville", "moebius", "one", "mu_squared"):
            return True
        if k == "archimedean":
            return self.params[0] == 0.0
        if k == "root_twist":
            d, j = self.params
            return (2 * j) % d == 0
        if k == "dirichlet":
            return self.character.is_real
        return bool(getattr(self.rule, "is_real", False))

    @property
    def is_sign_valued(self):
        """True when every value on the positive integers is +-1."""
        if self.kind in ("liouville", "one"):
            return True
        if self.kind == "root_twist":
            d, j = self.params
            return (2 * j) % d == 0
        return False

    def prime_power(self, p, e):
        """f(p^e)."""
        k = self.kind
        if k == "liouville":
            return -1.0 if e % 2 else 1.0
        if k == "moebius":
            return -1.0 if e == 1 else 0.0
        if k == "one" or k == "mu_squared":
            return 1.0 if (k == "one" or e == 1) else 0.0
        if k == "archimedean":
            x = self.params[0] * e * math.log(p)
            return complex(math.cos(x), math.sin(x))
        if k == "root_twist":
            d, j = self.params
            return unit_root(Fraction(j * e, d))
        if k == "dirichlet":
            return self.character(pow(p, e))
        return complex(self.rule(p, e))


def make_builtin(kind, *params):
    """Construct a built-in function; parameters as in the descriptor grammar."""
    if kind in ("liouville", "one"):
        if params:
            raise DomainError(f"{kind} takes no parameters")
        return MultFnSpec(kind, (), True)
    if kind in ("moebius", "mu_squared"):
        if params:
            raise DomainError(f"{kind} takes no parameters")
        return MultFnSpec(kind, (), False)
    if kind == "archimedean":
        if len(params) != 1:
            raise DomainError("archimedean takes one real parameter t")
        t = float(params[0])
        if not math.isfinite(t):
            raise DomainError("archimedean parameter must be finite")
        return MultFnSpec(kind, (t,), True)
    if kind == "root_twist":
        if len(params) not in (1, 2):
            raise DomainError("root_twist takes d and optionally k")
        d = int(params[0])
        k = int(params[1]) if len(params) == 2 else 1
        if d < 2:
            raise DomainError(f"root_twist needs d >= 2, got {d}")
        if k % d == 0:
            raise DomainError("root_twist needs a nontrivial root (k not divisible by d)")
        return MultFnSpec(kind, (d, k % d), True)
    if kind == "dirichlet":
        if len(params) != 2:
            raise DomainError("dirichlet takes a modulus q and an index")
        q, idx = int(params[0]), int(params[1])
        character(q, idx)
        return MultFnSpec(kind, (q, idx), True)
    raise DomainError(f"unknown built-in kind {kind!r}")


def custom(rule, completely_multiplicative=False, name="rule", is_real=False):
    """Multiplicative function from a prime-power rule (p, e) -> unit-disc value."""
    try:
        rule.is_real = is_real
    except AttributeError:
        pass
    return MultFnSpec("custom", (), completely_multiplicative, rule, name)


LIOUVILLE = make_builtin("liouville")
MOEBIUS = make_builtin("moebius")
ONE = make_builtin("one")
MU_SQUARED = make_builtin("mu_squared")


def parse_function(text):
    """Parse a descriptor such as ``"dirichlet:4:1"``."""
    parts = text.strip().split(":")
    kind = parts[0].strip().lower()
    args = [a.strip() for a in parts[1:]]
    arity = {"liouville": (0,), "moebius": (0,), "one": (0,), "mu_squared": (0,),
             "archimedean": (1,), "root_twist": (1, 2), "dirichlet": (2,)}
    if kind not in arity:
        raise DescriptorError(f"unknown function descriptor {text!r}")
    if len(args) not in arity[kind]:
        raise DescriptorError(
            f"descriptor {text!r}: {kind} expects {' or '.join(map(str, arity[kind]))} "
            f"parameter(s), got {len(args)}")
    try:
        if kind == "archimedean":
            vals = [float(args[0])]
        else:
            vals = [int(a) for a in args]
        return make_builtin(kind, *vals)
    except (ValueError, DomainError) as exc:
        raise DescriptorError(f"descriptor {text!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def eval(f, n):
    """f(n) as a complex number; 0 for n <= 0. Factorization via sympy."""
    n = int(n)
    if n <= 0:
        return 0j
    k = f.kind
    if k == "dirichlet":
        return f.character(n)
    if k == "archimedean":
        x = f.params[0] * math.log(n)
        return complex(math.cos(x), math.sin(x))
    fac = sympy.factorint(n)
    if k == "root_twist":
        d, j = f.params
        return unit_root(Fraction(j * sum(fac.values()), d))
    val = 1 + 0j
    for p, e in sorted(fac.items()):
        val *= f.prime_power(p, e)
    return complex(val)


def _custom_range(f, lo, hi, sieve):
    spf = sieve.prefix_table(hi).spf
    rem = np.arange(lo, hi + 1, dtype=np.int64)
    vals = np.ones(rem.shape[0], dtype=np.complex128)
    cache = {}
    while True:
        idx = np.flatnonzero(rem > 1)
        if idx.size == 0:
            return vals
        r = rem[idx]
        p = spf[r - 1]
        e = np.zeros(idx.size, dtype=np.int64)
        div = np.ones(idx.size, dtype=bool)
        while div.any():
            div = r % p == 0
            r = np.where(div, r // p, r)
            e += div
        pairs = np.stack((p, e), axis=1)
        uniq, inv = np.unique(pairs, axis=0, return_inverse=True)
        fac = np.empty(uniq.shape[0], dtype=np.complex128)
        for i, (pp, ee) in enumerate(uniq.tolist()):
            key = (pp, ee)
            if key not in cache:
                cache[key] = complex(f.rule(pp, ee))
            fac[i] = cache[key]
        vals[idx] *= fac[inv.ravel()]
        rem[idx] = r


def eval_range_split(f, lo, hi, sieve):
    """(real part, imaginary part or None) of f on [lo, hi] as float64 arrays."""
    lo, hi = int(lo), int(hi)
    if not (1 <= lo <= hi <= sieve.limit):
        raise DomainError(f"window [{lo}, {hi}] is outside the sieve range [1, {sieve.limit}]")
    k = f.kind
    if k == "one":
        return np.ones(hi - lo + 1), None
    if k == "dirichlet":
        chi = f.character
        vals = chi.table[np.arange(lo, hi + 1, dtype=np.int64) % chi.q]
        return (vals.real.copy(), None) if chi.is_real else (vals.real.copy(), vals.imag.copy())
    if k == "archimedean":
        x = f.params[0] * np.log(np.arange(lo, hi + 1, dtype=np.float64))
        return np.cos(x), (np.sin(x) if f.params[0] != 0.0 else None)
    if k == "custom":
        vals = _custom_range(f, lo, hi, sieve)
        return (vals.real.copy(), None) if f.is_real else (vals.real.copy(), vals.imag.copy())
    table = sieve.arithmetic_table(lo, hi)
    if k == "liouville":
        return table.lam.astype(np.float64), None
    if k == "moebius":
        return table.mobius.astype(np.float64), None
    if k == "mu_squared":
        return (table.mobius != 0).astype(np.float64), None
    # root_twist: e(j * Omega / d)
    d, j = f.params
    roots = np.array([unit_root(Fraction(j * w, d)) for w in range(d)])
    vals = roots[table.big_omega.astype(np.int64) % d]
    return (vals.real.copy(), None) if f.is_real else (vals.real.copy(), vals.imag.copy())


def eval_range(f, lo, hi, sieve):
    """f(n) for n in [lo, hi] as a complex128 array."""
    re, im = eval_range_split(f, lo, hi, sieve)
    return re + 1j * im if im is not None else re.astype(np.complex128)


def value_table(f, top, sieve):
    """Arrays indexed by n = 0..top with entry 0 equal to f(0) = 0."""
    re, im = eval_range_split(f, 1, top, sieve)
    re = np.concatenate(([0.0], re))
    if im is not None:
        im = np.concatenate(([0.0], im))
    return re, im


def prime_values(f, primes):
    """f(p) for an array of primes, complex128."""
    primes = np.asarray(primes, dtype=np.int64)
    k = f.kind
    if k in ("liouville", "moebius"):
        return -np.ones(primes.shape[0], dtype=np.complex128)
    if k in ("one", "mu_squared"):
        return np.ones(primes.shape[0], dtype=np.complex128)
    if k == "archimedean":
        x = f.params[0] * np.log(primes.astype(np.float64))
        return np.cos(x) + 1j * np.sin(x)
    if k == "root_twist":
        return np.full(primes.shape[0], f.prime_power(2, 1), dtype=np.complex128)
    if k == "dirichlet":
        chi = f.character
        return chi.table[primes % chi.q].astype(np.complex128)
    return np.array([complex(f.rule(int(p), 1)) for p in primes.tolist()], dtype=np.complex128)
