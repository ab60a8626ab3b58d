"""Slow, independent reference implementations used only by the tests."""
from fractions import Fraction
import math


def trial_factor(n):
    out = []
    p = 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
        p += 1
    if n > 1:
        out.append((n, 1))
    return out


def big_omega(n):
    return sum(e for _, e in trial_factor(n))


def liouville(n):
    return -1 if big_omega(n) % 2 else 1


def mobius(n):
    fac = trial_factor(n)
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def is_prime(n):
    return n >= 2 and trial_factor(n) == [(n, 1)]


def naive_primes(n):
    """Primes <= n by an odd-only Eratosthenes over a Python bytearray."""
    if n < 2:
        return []
    flags = bytearray([1]) * (n + 1)
    flags[0] = flags[1] = 0
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p::p] = bytearray(len(range(p * p, n + 1, p)))
    return [i for i in range(n + 1) if flags[i]]


def exact_log_average(values):
    """sum a(n)/n / sum 1/n over n = 1..len(values), in exact rationals."""
    num = sum(Fraction(v) / n for n, v in enumerate(values, start=1))
    den = sum(Fraction(1, n) for n in range(1, len(values) + 1))
    return num / den


def exact_harmonic(n):
    return sum(Fraction(1, k) for k in range(1, n + 1))
