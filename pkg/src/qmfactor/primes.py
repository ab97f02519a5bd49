"""Exact and asymptotic prime counting.

Small arguments are answered from a packed odd-only sieve table; larger ones
use Lucy's O(x^{3/4}) recurrence over the values ``floor(x/i)``.
"""
from __future__ import annotations

import math
import struct
import threading
import warnings
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import integrate

from .exceptions import DomainError, ResourceError

#: Meissel-Mertens constant B1.
MERTENS_B1 = 0.26149721284764278375542683860869585

DEFAULT_SIEVE_LIMIT = 10**8
DEFAULT_CEILING = 10**13

# 2^16 integers per checkpoint block -> 2^15 odd slots -> 4096 bytes
_BLOCK_BITS = 1 << 15
_BLOCK_BYTES = _BLOCK_BITS // 8
_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)

CACHE_MAGIC = b"QMFSIEVE"
CACHE_VERSION = 1


def simple_sieve(limit: int) -> np.ndarray:
    """All primes <= limit as an int64 array."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def _odd_flags(limit: int, segment: int = 1 << 22) -> np.ndarray:
    """Primality flags for the odd numbers 1, 3, 5, ..., sieved in segments."""
    n_odd = (limit + 1) // 2
    flags = np.ones(n_odd, dtype=bool)
    if n_odd:
        flags[0] = False  # 1 is not prime
    base = simple_sieve(math.isqrt(limit))[1:]  # odd base primes
    for lo in range(0, n_odd, segment):
        hi = min(lo + segment, n_odd)
        seg = flags[lo:hi]
        for p in base:
            p = int(p)
            first = p * p
            if first > 2 * hi - 1:
                break
            # smallest odd multiple of p >= max(p^2, 2*lo+1)
            start = max(first, ((2 * lo + 1 + p - 1) // p) * p)
            if start % 2 == 0:
                start += p
            seg[(start - 1) // 2 - lo :: p] = False
    return flags


class PrimeTable:
    """Packed odd-only primality table with cumulative-count checkpoints.

    Bit ``i`` stands for the odd number ``2*i + 1``. ``checkpoints[b]`` is the
    number of primes among the odd slots before block ``b``, so a rank query
    touches at most one 4 KiB block.
    """

    def __init__(self, limit: int, bits: np.ndarray | None = None):
        if limit < 2:
            raise DomainError("sieve limit must be at least 2")
        self.limit = int(limit)
        if bits is None:
            bits = np.packbits(_odd_flags(self.limit), bitorder="little")
        self.bits = bits
        per_block = _POPCOUNT[self.bits].reshape(-1)
        pad = (-len(per_block)) % _BLOCK_BYTES
        blocks = np.concatenate([per_block, np.zeros(pad, dtype=np.int64)])
        sums = blocks.reshape(-1, _BLOCK_BYTES).sum(axis=1)
        self.checkpoints = np.concatenate([[0], np.cumsum(sums)])

    def __contains__(self, n: int) -> bool:
        return self.is_prime(n)

    def is_prime(self, n: int) -> bool:
        n = int(n)
        if n > self.limit:
            raise DomainError(f"{n} exceeds table limit {self.limit}")
        if n == 2:
            return True
        if n < 2 or n % 2 == 0:
            return False
        i = (n - 1) // 2
        return bool((self.bits[i >> 3] >> (i & 7)) & 1)

    def _odd_count(self, m: int) -> int:
        # primes among odd slots [0, m)
        b = m // _BLOCK_BITS
        count = int(self.checkpoints[b])
        start = b * _BLOCK_BYTES
        full, rem = divmod(m - b * _BLOCK_BITS, 8)
        count += int(_POPCOUNT[self.bits[start : start + full]].sum())
        if rem:
            count += int(_POPCOUNT[self.bits[start + full] & ((1 << rem) - 1)])
        return count

    def pi(self, x: int) -> int:
        x = int(x)
        if x > self.limit:
            raise DomainError(f"{x} exceeds table limit {self.limit}")
        if x < 2:
            return 0
        return 1 + self._odd_count((x + 1) // 2)

    @property
    def count(self) -> int:
        return self.pi(self.limit)

    def primes(self, lo: int = 2, hi: int | None = None) -> np.ndarray:
        """Primes in [lo, hi] (hi defaults to the table limit)."""
        hi = self.limit if hi is None else min(int(hi), self.limit)
        lo = max(int(lo), 2)
        if hi < lo:
            return np.array([], dtype=np.int64)
        i0, i1 = lo // 2, (hi + 1) // 2  # slots of the first odd >= lo and past hi
        byte0 = i0 >> 3
        flags = np.unpackbits(self.bits[byte0 : (i1 >> 3) + 1], bitorder="little")
        flags = flags[i0 - 8 * byte0 : i1 - 8 * byte0]
        out = 2 * (np.flatnonzero(flags) + i0) + 1
        if lo <= 2:
            out = np.concatenate([[2], out])
        return out.astype(np.int64)

    def save(self, path) -> None:
        """Write the versioned binary cache (magic, version, limit, bit set)."""
        path = Path(path)
        with open(path, "wb") as fh:
            fh.write(CACHE_MAGIC)
            fh.write(struct.pack("<IQ", CACHE_VERSION, self.limit))
            fh.write(self.bits.tobytes())

    @classmethod
    def load(cls, path, limit: int | None = None) -> "PrimeTable | None":
        """Read a cache file; ``None`` if absent, foreign or of another limit."""
        path = Path(path)
        if not path.exists():
            return None
        raw = path.read_bytes()
        head = len(CACHE_MAGIC) + 12
        if len(raw) < head or raw[: len(CACHE_MAGIC)] != CACHE_MAGIC:
            return None
        version, stored = struct.unpack("<IQ", raw[len(CACHE_MAGIC) : head])
        if version != CACHE_VERSION or (limit is not None and stored != limit):
            return None
        bits = np.frombuffer(raw[head:], dtype=np.uint8).copy()
        if len(bits) != ((stored + 1) // 2 + 7) // 8:
            return None
        return cls(stored, bits=bits)


class LucyTable:
    """pi(v) for every v of the form floor(n/i), by Lucy's recurrence."""

    def __init__(self, n: int):
        n = int(n)
        if n < 1:
            raise DomainError("n must be positive")
        self.n = n
        r = math.isqrt(n)
        self.r = r
        idx = np.arange(r + 1, dtype=np.int64)
        small = idx - 1  # small[v] = #{2..v}
        small[0] = 0
        large = np.zeros(r + 1, dtype=np.int64)  # large[i] = S(n // i)
        large[1:] = n // idx[1:] - 1
        for p in range(2, r + 1):
            if small[p] == small[p - 1]:
                continue
            sp = small[p - 1]
            p2 = p * p
            # large part: i with n//i >= p^2
            i_max = min(r, n // p2)
            i = idx[1 : i_max + 1]
            ip = i * p
            inner = np.where(ip <= r, large[np.minimum(ip, r)], small[np.minimum(n // np.maximum(ip, 1), r)])
            large[1 : i_max + 1] -= inner - sp
            # small part: v in [p^2, r]
            if p2 <= r:
                v = idx[p2 : r + 1]
                small[p2 : r + 1] -= small[v // p] - sp
        self.small = small
        self.large = large

    def pi(self, v: int) -> int:
        v = int(v)
        if v < 0:
            raise DomainError("negative argument")
        if v <= self.r:
            return int(self.small[v])
        i = self.n // v
        if i > self.r or self.n // i != v:
            raise KeyError(v)
        return int(self.large[i])


def lucy_pi(x: int) -> int:
    """Sublinear prime count, independent of any sieve table."""
    if x < 2:
        return 0
    return LucyTable(x).pi(x)


class PrimeCounter:
    """pi(x) and x(j) over a lazily grown sieve plus memoized Lucy tables."""

    def __init__(self, sieve_limit: int = DEFAULT_SIEVE_LIMIT, ceiling: int = DEFAULT_CEILING,
                 cache_dir=None):
        self.sieve_limit = int(sieve_limit)
        self.ceiling = int(ceiling)
        self.cache_dir = None if cache_dir is None else Path(cache_dir)
        self._table: PrimeTable | None = None
        self._lock = threading.Lock()
        self._lucy = lru_cache(maxsize=64)(LucyTable)

    def table(self, need: int) -> PrimeTable:
        """A sieve table covering at least ``need`` (capped at the sieve limit)."""
        need = int(need)
        if need > self.sieve_limit:
            raise ResourceError(f"{need} exceeds sieve limit {self.sieve_limit}")
        with self._lock:
            t = self._table
            if t is None or t.limit < need:
                size = max(need, 1 << 20, 0 if t is None else 4 * t.limit)
                size = min(size, self.sieve_limit)
                t = self._load_or_build(size)
                self._table = t
        return t

    def _load_or_build(self, size: int) -> PrimeTable:
        if self.cache_dir is not None:
            path = self.cache_dir / f"sieve-{size}.bin"
            cached = PrimeTable.load(path, limit=size)
            if cached is not None:
                return cached
            table = PrimeTable(size)
            self.cache_dir.mkdir(parents=True, exist_ok=True)
            table.save(path)
            return table
        return PrimeTable(size)

    def _check(self, x: int) -> None:
        if x > self.ceiling:
            raise ResourceError(f"{x} exceeds the counting ceiling {self.ceiling}")

    def pi(self, x) -> int:
        x = math.floor(x)
        if x < 2:
            return 0
        self._check(x)
        if x <= self.sieve_limit:
            return self.table(x).pi(x)
        return self.lucy_table(x).pi(x)

    def lucy_table(self, n: int) -> LucyTable:
        self._check(n)
        return self._lucy(int(n))

    def nth_prime(self, j: int) -> int:
        j = int(j)
        if j < 1:
            raise DomainError("j must be >= 1")
        # Rosser: p_j < j (ln j + ln ln j) for j >= 6
        bound = 15 if j < 6 else int(j * (math.log(j) + math.log(math.log(j)))) + 1
        self._check(bound)
        if bound > self.sieve_limit:
            raise ResourceError(f"the {j}-th prime exceeds the sieve limit {self.sieve_limit}")
        t = self.table(bound)
        lo, hi = 2, bound
        while lo < hi:  # smallest x with pi(x) >= j
            mid = (lo + hi) // 2
            if t.pi(mid) >= j:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def primes(self, lo: int, hi: int) -> np.ndarray:
        return self.table(hi).primes(lo, hi)


_default = PrimeCounter()


def default_counter() -> PrimeCounter:
    return _default


def set_default_counter(counter: PrimeCounter) -> None:
    global _default
    _default = counter


def pi_exact(x) -> int:
    """Number of primes <= x."""
    if x < 0:
        raise DomainError("x must be non-negative")
    return _default.pi(x)


def nth_prime(j: int) -> int:
    return _default.nth_prime(j)


def li(x: float) -> float:
    """Offset logarithmic integral, the integral of 1/ln t over [2, x].

    Integrated in s = ln t, where the integrand e^s/s is smooth.
    """
    x = float(x)
    if not x >= 2.0:
        raise DomainError("li is defined here for x >= 2")
    if x == 2.0:
        return 0.0
    a, b = math.log(2.0), math.log(x)
    with warnings.catch_warnings():
        # beyond x ~ 1e6 an absolute 1e-10 is finer than one ulp of the result
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(lambda s: math.exp(s) / s, a, b, epsabs=1e-10, epsrel=1e-13, limit=200)
    return val


def meissel_mertens_C() -> float:
    """ln 2 + B1, the large-N constant of the ensemble-size asymptote."""
    return math.log(2.0) + MERTENS_B1
