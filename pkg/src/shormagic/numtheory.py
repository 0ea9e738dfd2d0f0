"""Classical number theory for order finding.

Modular arithmetic, multiplicative orders via Carmichael-lambda divisor
descent, period decompositions r = 2^k * r_odd, exact order-occurrence
spectra, and continued-fraction period recovery. Everything here is pure
and deterministic; Python integers make all intermediates exact, so there
is no overflow to guard against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

__all__ = [
    "PeriodDecomposition",
    "ContinuedFraction",
    "OrderSpectrum",
    "RecoveryResult",
    "mod_pow",
    "multiplicative_order",
    "split_period",
    "order_spectrum",
    "coprimes_by_period",
    "continued_fraction_expand",
    "recover_period",
    "carmichael_lambda",
    "factorize",
    "is_probable_prime",
]

SPECTRUM_BOUND = 10**6


@dataclass(frozen=True)
class PeriodDecomposition:
    """Factorization r = 2^k * r_odd with the derived plateau quantities.

    tau_star = ceil(log2(r_odd)) marks the end of the initial support
    doubling; epsilon is 1 for odd r and 0 for even r.
    """

    r: int
    k: int
    r_odd: int
    tau_star: int
    epsilon: int


@dataclass(frozen=True)
class ContinuedFraction:
    """Euclidean continued fraction of a rational in [0, 1).

    coefficients are the partial quotients a_1..a_j of
    x = 1/(a_1 + 1/(a_2 + ...)); convergents are the (numerator,
    denominator) pairs, already in lowest terms, with strictly
    increasing denominators.
    """

    coefficients: tuple[int, ...]
    convergents: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class OrderSpectrum:
    """Occurrence frequency g(r) of each multiplicative order mod N.

    Frequencies are exact rationals over the coprimes a in [2, N-1], so
    sum(entries.values()) == 1 holds exactly. a = 1 (order 1) is excluded:
    it is never drawn by the algorithm and would add a spurious r = 1 bin.
    """

    N: int
    entries: dict[int, Fraction]
    total_coprimes: int

    def frequencies(self) -> dict[int, float]:
        return {r: float(g) for r, g in self.entries.items()}

    def periods(self) -> list[int]:
        return sorted(self.entries)


@dataclass(frozen=True)
class RecoveryResult:
    success: bool
    found: int | None


def mod_pow(a: int, e: int, N: int) -> int:
    """a^e mod N for e >= 0, N >= 2."""
    if N < 2:
        raise ValueError(f"modulus must be >= 2, got {N}")
    if e < 0:
        raise ValueError(f"exponent must be >= 0, got {e}")
    return pow(a, e, N)


# Deterministic Miller-Rabin witness set for n < 3.3 * 10^24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for w in _MR_WITNESSES:
        x = pow(w, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    """One nontrivial factor of composite n (Brent's cycle variant)."""
    if n % 2 == 0:
        return 2
    seed = 1
    while True:
        y, c, m = 2 + seed, 1 + seed, 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = gcd(abs(x - ys), n)
        if g != n:
            return g
        seed += 1  # rare cycle degeneracy: retry with a new polynomial


def factorize(n: int) -> dict[int, int]:
    """Prime factorization as {prime: exponent}."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    factors: dict[int, int] = {}
    for p in (2, 3, 5, 7, 11, 13):
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_probable_prime(m):
            factors[m] = factors.get(m, 0) + 1
            continue
        d = _pollard_rho(m)
        stack.append(d)
        stack.append(m // d)
    return factors


def carmichael_lambda(N: int) -> int:
    """Carmichael function: the exponent of the unit group mod N."""
    lam = 1
    for p, e in factorize(N).items():
        if p == 2:
            block = 1 if e == 1 else (2 if e == 2 else 2 ** (e - 2))
        else:
            block = p ** (e - 1) * (p - 1)
        lam = math.lcm(lam, block)
    return lam


def _order_from_exponent(a: int, N: int, exponent: int, primes: tuple[int, ...]) -> int:
    """Order of a given a multiple `exponent` of it and that multiple's prime set."""
    o = exponent
    for p in primes:
        while o % p == 0 and pow(a, o // p, N) == 1:
            o //= p
    return o


def multiplicative_order(a: int, N: int) -> int:
    """Smallest r >= 1 with a^r = 1 mod N.

    Computed by divisor descent from carmichael_lambda(N), not by brute
    force, so it stays cheap for N in the 10^4..10^6 range.

    Raises ValueError when gcd(a, N) != 1: no order exists, and the
    caller holds a factor of N already.
    """
    a %= N
    g = gcd(a, N)
    if g != 1:
        raise ValueError(f"gcd({a}, {N}) = {g} != 1; no multiplicative order")
    lam = carmichael_lambda(N)
    primes = tuple(factorize(lam))
    return _order_from_exponent(a, N, lam, primes)


def split_period(r: int) -> PeriodDecomposition:
    """Decompose r = 2^k * r_odd and derive tau_star, epsilon."""
    if r < 1:
        raise ValueError(f"period must be >= 1, got {r}")
    k = (r & -r).bit_length() - 1
    r_odd = r >> k
    tau_star = (r_odd - 1).bit_length()  # ceil(log2(r_odd)), 0 for r_odd = 1
    return PeriodDecomposition(r=r, k=k, r_odd=r_odd, tau_star=tau_star, epsilon=int(k == 0))


def _spectrum_counts(N: int, bound: int) -> tuple[dict[int, int], int]:
    if N > bound:
        raise ValueError(f"N = {N} exceeds the spectrum bound {bound}")
    if N < 9 or N % 2 == 0 or is_probable_prime(N):
        raise ValueError(f"N = {N} is not an odd composite")
    lam = carmichael_lambda(N)
    primes = tuple(factorize(lam))
    counts: dict[int, int] = {}
    total = 0
    for a in range(2, N):
        if gcd(a, N) != 1:
            continue
        r = _order_from_exponent(a, N, lam, primes)
        counts[r] = counts.get(r, 0) + 1
        total += 1
    return counts, total


def order_spectrum(N: int, bound: int = SPECTRUM_BOUND) -> OrderSpectrum:
    """Exact order-occurrence spectrum g(r) over the coprimes of N.

    Enumerates every a in [2, N-1] with gcd(a, N) = 1. Orders come from
    lambda(N)-divisor descent; frequencies are exact Fractions.
    """
    counts, total = _spectrum_counts(N, bound)
    entries = {r: Fraction(c, total) for r, c in sorted(counts.items())}
    return OrderSpectrum(N=N, entries=entries, total_coprimes=total)


def coprimes_by_period(N: int, bound: int = SPECTRUM_BOUND) -> dict[int, list[int]]:
    """Map r -> ascending list of coprimes a in [2, N-1] with order r."""
    if N > bound:
        raise ValueError(f"N = {N} exceeds the spectrum bound {bound}")
    lam = carmichael_lambda(N)
    primes = tuple(factorize(lam))
    table: dict[int, list[int]] = {}
    for a in range(2, N):
        if gcd(a, N) != 1:
            continue
        r = _order_from_exponent(a, N, lam, primes)
        table.setdefault(r, []).append(a)
    return {r: table[r] for r in sorted(table)}


def continued_fraction_expand(x_num: int, x_den: int) -> ContinuedFraction:
    """Exact Euclidean continued fraction of x_num/x_den in [0, 1).

    Intended for x_den = 2^t (a t-bit phase estimate), but the expansion
    is exact for any positive denominator. x = 0 gives an empty
    expansion with no convergents.
    """
    if x_den <= 0:
        raise ValueError(f"denominator must be positive, got {x_den}")
    if not 0 <= x_num < x_den:
        raise ValueError(f"need 0 <= x_num < x_den, got {x_num}/{x_den}")
    coefficients: list[int] = []
    p, q = x_num, x_den
    while p:
        a, rem = divmod(q, p)
        coefficients.append(a)
        p, q = rem, p
    convergents: list[tuple[int, int]] = []
    h_prev, h = 1, 0  # numerators h_{-1}, h_0
    k_prev, k = 0, 1  # denominators k_{-1}, k_0
    for a in coefficients:
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        convergents.append((h, k))
    return ContinuedFraction(coefficients=tuple(coefficients), convergents=tuple(convergents))


def recover_period(x_num: int, t: int, a: int, N: int, true_r: int) -> RecoveryResult:
    """Textbook continued-fraction post-processing of a t-bit estimate.

    Scans the convergent denominators d <= N of x_num/2^t in increasing
    order and stops at the first one with a^d = 1 mod N. The run counts
    as successful only when that denominator is exactly true_r; a
    denominator that is a submultiple of the period never passes the
    modular test, which is precisely the failure mode of estimates s/r
    with gcd(s, r) > 1.
    """
    cf = continued_fraction_expand(x_num, 1 << t)
    found = None
    for _, d in cf.convergents:
        if d > N:
            break
        if pow(a, d, N) == 1:
            found = d
            break
    return RecoveryResult(success=found == true_r, found=found)
