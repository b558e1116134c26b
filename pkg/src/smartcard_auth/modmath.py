"""Modular arithmetic over a prime modulus.

Not constant time. This is a protocol testbed, not production crypto.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .counting import tally

MR_ROUNDS = 40

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71)


class ZeroInverse(ArithmeticError):
    """Raised when inverting a residue congruent to zero."""


def is_probable_prime(n: int, rounds: int = MR_ROUNDS, rng: random.Random | None = None) -> bool:
    """Miller-Rabin test; false-positive probability at most 4**-rounds."""
    if n < 2:
        return False
    for q in _SMALL_PRIMES:
        if n == q:
            return True
        if n % q == 0:
            return False
    rng = rng or random.Random(n)
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
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


@dataclass(frozen=True)
class Residue:
    """An element of Z/pZ with a prime modulus."""

    value: int
    modulus: int

    def __post_init__(self) -> None:
        if not is_probable_prime(self.modulus):
            raise ValueError(f"modulus {self.modulus} is not prime")
        if not 0 <= self.value < self.modulus:
            raise ValueError(f"residue {self.value} outside [0, {self.modulus})")

    def __int__(self) -> int:
        return self.value


@dataclass(frozen=True)
class Exponent:
    """An exponent reduced modulo p - 1."""

    value: int
    modulus: int

    def __post_init__(self) -> None:
        if not 0 <= self.value < self.modulus - 1:
            raise ValueError(f"exponent {self.value} outside [0, {self.modulus - 1})")

    def __int__(self) -> int:
        return self.value


def mod_exp(base: int | Residue, exp: int | Exponent, p: int) -> int:
    """Return ``base**exp mod p``; ``0**0`` is 1."""
    tally("E")
    return pow(int(base), int(exp), p)


def mod_mul(a: int, b: int, p: int) -> int:
    tally("M")
    return a * b % p


def mod_inv(a: int | Residue, p: int) -> int:
    a = int(a) % p
    if a == 0:
        raise ZeroInverse(f"0 has no inverse modulo {p}")
    return pow(a, -1, p)


def gen_prime(bits: int, rng: random.Random | None = None) -> int:
    """Return a probable prime with exactly ``bits`` bits."""
    if bits < 8:
        raise ValueError("bits must be >= 8")
    rng = rng or random.SystemRandom()
    while True:
        candidate = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        if is_probable_prime(candidate, rng=rng):
            return candidate


def sample_exponent(p: int, coprime_to: int, rng: random.Random) -> int:
    """Uniform r in [2, p - 2]; with ``coprime_to = p - 1`` also gcd(r, p - 1) = 1."""
    if coprime_to not in (1, p - 1):
        raise ValueError("coprime_to must be 1 or p - 1")
    if p < 5:
        raise ValueError("p too small to sample an exponent")
    while True:
        r = rng.randint(2, p - 2)
        if math.gcd(r, coprime_to) == 1:
            return r


def primitive_root(p: int) -> int:
    """Smallest generator of (Z/pZ)*, found by trial over the factors of p - 1."""
    n, factors, f = p - 1, set(), 2
    while f * f <= n:
        while n % f == 0:
            factors.add(f)
            n //= f
        f += 1
    if n > 1:
        factors.add(n)
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in factors):
            return g
    raise ValueError(f"no primitive root for {p}")
