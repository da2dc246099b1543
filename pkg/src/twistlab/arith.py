"""Exact integer and modular arithmetic.

Scalar routines work on Python ints (arbitrary precision).  The ``*_vec``
routines evaluate the same quantities for a whole array of odd primes at
once with int64 numpy arithmetic; they are what the census sweeps call, and
every one of them is tested against its scalar counterpart.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import ResourceLimitExceeded

MAX_SIEVE = 10**8

# Deterministic Miller-Rabin for n < 3.317e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_LIMIT = 3_317_044_064_679_887_385_961_981

# residues < 2**30: products < 2**60, sums of three products fit int64
_VEC_MODULUS_LIMIT = 2**30


@dataclass(frozen=True)
class SquarefreeInteger:
    """A positive squarefree integer together with its prime factorization."""

    value: int
    factors: tuple[int, ...]

    def __post_init__(self):
        if self.value < 1:
            raise ValueError(f"squarefree integer must be positive, got {self.value}")
        prod = 1
        prev = 1
        for p in self.factors:
            if p <= prev or not is_prime(p):
                raise ValueError(f"factors must be strictly increasing primes: {self.factors}")
            prod *= p
            prev = p
        if prod != self.value:
            raise ValueError(f"factors {self.factors} do not multiply to {self.value}")

    @classmethod
    def from_factors(cls, primes: Sequence[int]) -> "SquarefreeInteger":
        fs = tuple(sorted(int(p) for p in primes))
        value = 1
        for p in fs:
            value *= p
        return cls(value, fs)

    @classmethod
    def from_int(cls, n: int) -> "SquarefreeInteger":
        """Factor ``n``; raises ValueError unless it is squarefree."""
        n = int(n)
        if n < 1:
            raise ValueError(f"squarefree integer must be positive, got {n}")
        fac = factorize(n)
        if any(e > 1 for e in fac.values()):
            raise ValueError(f"{n} is not squarefree")
        return cls(n, tuple(sorted(fac)))

    def __int__(self) -> int:
        return self.value


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    if n >= _MR_LIMIT:
        raise ResourceLimitExceeded(f"primality of {n} beyond deterministic Miller-Rabin range")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of ``|n|`` as {prime: exponent}."""
    from sympy import factorint

    return {int(p): int(e) for p, e in factorint(abs(int(n))).items()}


def kronecker_symbol(a: int, n: int) -> int:
    """Kronecker symbol (a/n), including even and negative ``n``."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -1
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 == 1 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a/n), n odd positive.
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def ord2(m: int) -> int:
    """2-adic valuation of a positive integer."""
    if m < 1:
        raise ValueError(f"ord2 needs m >= 1, got {m}")
    return (m & -m).bit_length() - 1


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    n = abs(n)
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


# --- polynomials over F_p, coefficient lists low -> high -------------------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], f: list[int], p: int) -> list[int]:
    a = [c % p for c in a]
    _trim(a)
    inv_lead = pow(f[-1], -1, p)
    df = len(f) - 1
    while len(a) - 1 >= df:
        q = a[-1] * inv_lead % p
        shift = len(a) - 1 - df
        for i, c in enumerate(f):
            a[shift + i] = (a[shift + i] - q * c) % p
        _trim(a)
    return a


def _poly_mulmod(a: list[int], b: list[int], f: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] += x * y
    return _poly_mod(prod, f, p)


def _poly_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a = _trim([c % p for c in a])
    b = _trim([c % p for c in b])
    while b:
        a, b = b, _poly_mod(a, b, p)
    return a


def _cubic_mod(coeffs: Sequence[int], ell: int) -> list[int]:
    if len(coeffs) != 4:
        raise ValueError("expected 4 coefficients (leading first)")
    if ell == 2 or not is_prime(ell):
        raise ValueError(f"ell must be an odd prime, got {ell}")
    f = [int(c) % ell for c in reversed(coeffs)]
    if f[3] == 0:
        raise ValueError(f"leading coefficient vanishes mod {ell}")
    return f


def cubic_roots_mod(coeffs: Sequence[int], ell: int) -> int:
    """Number of distinct roots in F_ell of c3 x^3 + c2 x^2 + c1 x + c0.

    ``coeffs`` is (c3, c2, c1, c0).  Computes deg gcd(f, x^ell - x) with
    x^ell reduced mod f by repeated squaring.
    """
    f = _cubic_mod(coeffs, ell)
    result = [1]
    base = [0, 1]
    e = ell
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, f, ell)
        base = _poly_mulmod(base, base, f, ell)
        e >>= 1
    frob_minus_x = list(result) + [0] * (2 - len(result))
    frob_minus_x[1] = (frob_minus_x[1] - 1) % ell
    # a zero remainder means f | x^ell - x, and the gcd is f itself
    return len(_poly_gcd(f, frob_minus_x, ell)) - 1


def cubic_has_root_mod(coeffs: Sequence[int], ell: int) -> bool:
    return cubic_roots_mod(coeffs, ell) > 0


# --- sieves ------------------------------------------------------------------

def _guard(X: int, max_limit: int) -> None:
    if X > max_limit:
        raise ResourceLimitExceeded(f"bound {X} exceeds configured maximum {max_limit}")


def sieve_primes(X: int, max_limit: int = MAX_SIEVE) -> np.ndarray:
    """All primes <= X in ascending order (int64 array)."""
    if X < 2:
        raise ValueError(f"sieve bound must be >= 2, got {X}")
    _guard(X, max_limit)
    is_p = np.ones(X + 1, dtype=bool)
    is_p[:2] = False
    is_p[4::2] = False
    for p in range(3, int(X**0.5) + 1, 2):
        if is_p[p]:
            is_p[p * p :: 2 * p] = False
    return np.flatnonzero(is_p).astype(np.int64)


def smallest_prime_factor_sieve(X: int, max_limit: int = MAX_SIEVE) -> np.ndarray:
    """spf[n] = smallest prime factor of n for 2 <= n <= X (spf[0] = spf[1] = 0)."""
    _guard(X, max_limit)
    spf = np.zeros(X + 1, dtype=np.int64)
    if X >= 2:
        spf[2::2] = 2
    for p in range(3, int(X**0.5) + 1, 2):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    rest = np.flatnonzero(spf == 0)
    spf[rest[rest >= 2]] = rest[rest >= 2]
    return spf


def enumerate_squarefree(X: int, max_limit: int = MAX_SIEVE) -> Iterator[SquarefreeInteger]:
    """Yield every squarefree d <= X, ascending, with its factorization."""
    if X < 1:
        raise ValueError(f"bound must be >= 1, got {X}")
    _guard(X, max_limit)
    spf = smallest_prime_factor_sieve(max(X, 2), max_limit).tolist()
    yield SquarefreeInteger(1, ())
    for n in range(2, X + 1):
        factors = []
        m = n
        ok = True
        while m > 1:
            p = spf[m]
            m //= p
            if m % p == 0:
                ok = False
                break
            factors.append(p)
        if ok:
            # object.__new__ skips re-validating factors the sieve produced
            d = object.__new__(SquarefreeInteger)
            object.__setattr__(d, "value", n)
            object.__setattr__(d, "factors", tuple(factors))
            yield d


# --- vectorized modular arithmetic over arrays of odd primes ---------------

def _check_vec_moduli(p: np.ndarray) -> None:
    if p.size and int(p.max()) >= _VEC_MODULUS_LIMIT:
        raise ResourceLimitExceeded("vectorized arithmetic supports moduli below 2**30")


def reduce_mod_vec(c: int, p: np.ndarray) -> np.ndarray:
    """Python int ``c`` reduced modulo each entry of ``p`` (exact for any size of c)."""
    if -(2**62) < c < 2**62:
        return np.mod(np.int64(c), p)
    return np.array([c % int(q) for q in p], dtype=np.int64)


def modpow_vec(base: np.ndarray, exp: np.ndarray, p: np.ndarray) -> np.ndarray:
    _check_vec_moduli(p)
    base = np.mod(base, p)
    result = np.ones_like(p)
    nbits = int(exp.max()).bit_length() if exp.size else 0
    for bit in range(nbits - 1, -1, -1):
        result = result * result % p
        on = ((exp >> bit) & 1).astype(bool)
        result = np.where(on, result * base % p, result)
    return result


def legendre_vec(a: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Legendre symbol (a/p) for odd primes p, values in {-1, 0, 1}."""
    r = modpow_vec(np.mod(a, p), (p - 1) // 2, p)
    return np.where(r == p - 1, -1, r).astype(np.int64)


def ord2_vec(m: np.ndarray) -> np.ndarray:
    low = m & -m
    return np.log2(low.astype(np.float64)).astype(np.int64)


def cubic_has_root_mod_vec(coeffs: Sequence[int], p: np.ndarray) -> np.ndarray:
    """Batch version of :func:`cubic_has_root_mod` for odd primes not dividing disc.

    Uses x^p mod f together with Stickelberger's theorem: a separable cubic
    over F_p has no root iff x^p != x (mod f) and its discriminant is a square.
    """
    p = np.asarray(p, dtype=np.int64)
    _check_vec_moduli(p)
    c3, c2, c1, c0 = (int(c) for c in coeffs)
    disc = c2 * c2 * c1 * c1 - 4 * c3 * c1**3 - 4 * c2**3 * c0 - 27 * c3 * c3 * c0 * c0 + 18 * c3 * c2 * c1 * c0
    inv = modpow_vec(reduce_mod_vec(c3, p), p - 2, p)
    A = reduce_mod_vec(c2, p) * inv % p
    B = reduce_mod_vec(c1, p) * inv % p
    C = reduce_mod_vec(c0, p) * inv % p
    # x^3 = -(A x^2 + B x + C); x^4 = (A^2 - B) x^2 + (AB - C) x + AC
    r3 = ((-A) % p, (-B) % p, (-C) % p)  # coefficients of x^2, x, 1
    r4 = ((A * A - B) % p, (A * B - C) % p, A * C % p)

    def mul(u, v):
        u0, u1, u2 = u
        v0, v1, v2 = v
        k0 = u0 * v0 % p
        k1 = (u0 * v1 + u1 * v0) % p
        k2 = (u0 * v2 + u1 * v1 + u2 * v0) % p
        k3 = (u1 * v2 + u2 * v1) % p
        k4 = u2 * v2 % p
        return (
            (k0 + k3 * r3[2] + k4 * r4[2]) % p,
            (k1 + k3 * r3[1] + k4 * r4[1]) % p,
            (k2 + k3 * r3[0] + k4 * r4[0]) % p,
        )

    def times_x(u):
        u0, u1, u2 = u
        return ((u2 * r3[2]) % p, (u0 + u2 * r3[1]) % p, (u1 + u2 * r3[0]) % p)

    zero = np.zeros_like(p)
    res = (np.ones_like(p), zero, zero)
    nbits = int(p.max()).bit_length() if p.size else 0
    for bit in range(nbits - 1, -1, -1):
        res = mul(res, res)
        on = ((p >> bit) & 1).astype(bool)
        shifted = times_x(res)
        res = tuple(np.where(on, s, r) for s, r in zip(shifted, res))
    frob_is_x = (res[0] == 0) & (res[1] == 1) & (res[2] == 0)
    disc_square = legendre_vec(reduce_mod_vec(disc, p), p) == 1
    return frob_is_x | ~disc_square
