"""Moebius and alpha = mu * mu tables, and smoothed Dirichlet polynomials for 1/zeta."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

from .errors import CapacityError, DomainError

EPSILON = 0.1  # fixed exponent slack in every x^{1+eps} cutoff
MAX_SIEVE = 10**9


@dataclass(frozen=True)
class CoeffTable:
    """Integer coefficients c(1..N); ``values[0]`` is an unused 0 slot."""

    values: np.ndarray
    N: int

    def __post_init__(self):
        self.values.setflags(write=False)

    def __getitem__(self, k):
        if np.any(np.asarray(k) < 1) or np.any(np.asarray(k) > self.N):
            raise IndexError(f"index {k} outside 1..{self.N}")
        return self.values[k]

    def __len__(self):
        return self.N

    def as_list(self):
        return self.values[1:].tolist()


def _check_n(N):
    N = int(N)
    if N < 1:
        raise DomainError("sieve length must be >= 1")
    if N > MAX_SIEVE:
        raise CapacityError(f"sieve length {N} exceeds the supported maximum {MAX_SIEVE}")
    return N


def primes_upto(N: int) -> np.ndarray:
    """Primes <= N by the sieve of Eratosthenes."""
    if N < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(N + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(N) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags)


@lru_cache(maxsize=4)
def _moebius(N):
    mu = np.ones(N + 1, dtype=np.int8)
    mu[0] = 0
    for p in primes_upto(N):
        p = int(p)
        mu[p::p] *= -1
        if p * p <= N:
            mu[p * p :: p * p] = 0
    return mu


@lru_cache(maxsize=4)
def _alpha(N):
    a = np.ones(N + 1, dtype=np.int64)
    a[0] = 0
    for p in primes_upto(N):
        p = int(p)
        a[p::p] *= -2
        if p * p <= N:
            a[p * p :: p * p] //= -2  # exact: undoes the factor -2 so alpha(p^2) = 1
            if p**3 <= N:
                a[p**3 :: p**3] = 0
    return a.astype(np.int8)


def moebius_sieve(N: int) -> CoeffTable:
    """mu(k) for 1 <= k <= N."""
    N = _check_n(N)
    return CoeffTable(_moebius(N).copy(), N)


def alpha_sieve(N: int) -> CoeffTable:
    """alpha(k) = sum_{mn=k} mu(m) mu(n); alpha(p) = -2, alpha(p^2) = 1, alpha(p^j) = 0 for j >= 3."""
    N = _check_n(N)
    return CoeffTable(_alpha(N).copy(), N)


def _smoothed_sum(coeffs, t, x):
    kmax = int(math.floor(x ** (1 + EPSILON)))
    k = np.arange(1, kmax + 1, dtype=float)
    # round the sieve length up so the cache is reused across calls
    c = coeffs(1 << max(10, kmax.bit_length()))[1 : kmax + 1].astype(float)
    nz = c != 0
    k, c = k[nz], c[nz]
    terms = c * np.exp(-(1 + 2j * t) * np.log(k) - k / x)
    return complex(terms.sum())


def _check_tx(t, x):
    if t < 10 or x < 2:
        raise DomainError("smoothed sums need t >= 10 and x >= 2")


def afe_inv_zeta_sq(t: float, x: float) -> complex:
    """sum_{k <= x^{1.1}} alpha(k) k^{-1-2it} e^{-k/x}, approximating 1/zeta(1+2it)^2."""
    _check_tx(t, x)
    return _smoothed_sum(_alpha, t, x)


def afe_inv_zeta(t: float, x: float) -> complex:
    """sum_{k <= x^{1.1}} mu(k) k^{-1-2it} e^{-k/x}, approximating 1/zeta(1+2it)."""
    _check_tx(t, x)
    return _smoothed_sum(_moebius, t, x)


def divisors(n: int) -> list[int]:
    small, large = [], []
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
    return small + large[::-1]
