"""The factorization ensemble: every x*y (x <= y prime) with pi(sqrt(x*y)) = j."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import primes
from .exceptions import CheckFailure, DomainError, ResourceError

DEFAULT_INTERVAL_BOUND = 10**9


@dataclass(frozen=True)
class PrimeContext:
    """The input N and the constants derived from it."""

    N: int
    j: int
    gamma: float
    x_j: int
    x_j1: int
    q_max: float
    C: float

    @classmethod
    def from_N(cls, N: int) -> "PrimeContext":
        N = int(N)
        if N < 9:
            raise DomainError("N must be >= 9")
        root = math.isqrt(N)
        j = primes.pi_exact(root)
        return cls(
            N=N,
            j=j,
            gamma=j / math.sqrt(N),
            x_j=primes.nth_prime(j),
            x_j1=primes.nth_prime(j + 1),
            q_max=math.sqrt(N) / 8.0,
            C=primes.meissel_mertens_C(),
        )

    @property
    def interval(self) -> tuple[int, int]:
        """Half-open range [x_j^2, x_{j+1}^2) of admissible N_sigma."""
        return self.x_j * self.x_j, self.x_j1 * self.x_j1

    @property
    def sqrt_N(self) -> float:
        return math.sqrt(self.N)


@dataclass(frozen=True)
class EnsembleEntry:
    N_sigma: int
    x_sigma: int
    y_sigma: int
    pi_x: int
    pi_y: int
    j: int
    t: float
    u: float
    k: int
    kappa: float

    @property
    def E_exact(self) -> Fraction:
        return Fraction(self.pi_x * self.pi_y, self.j * self.j)

    @property
    def p_exact(self) -> Fraction:
        return Fraction(self.pi_y - self.pi_x, 2 * self.j)

    @property
    def q_exact(self) -> Fraction:
        return Fraction(self.pi_y + self.pi_x, 2 * self.j)

    @property
    def E(self) -> float:
        return float(self.E_exact)

    @property
    def p(self) -> float:
        return float(self.p_exact)

    @property
    def q(self) -> float:
        return float(self.q_exact)

    @property
    def phi(self) -> int:
        return (self.x_sigma - 1) * (self.y_sigma - 1)


@dataclass
class Ensemble:
    """Column store of the ensemble, sorted by rank k = 1..F.

    E, p and q are kept exactly as integer numerators over the fixed
    denominators j^2, 2j and 2j.
    """

    context: PrimeContext
    N_sigma: np.ndarray
    x: np.ndarray
    y: np.ndarray
    pi_x: np.ndarray
    pi_y: np.ndarray
    include_squares: bool = True
    block_base: dict = field(default_factory=dict, repr=False)

    @property
    def F(self) -> int:
        return int(len(self.N_sigma))

    def __len__(self) -> int:
        return self.F

    @property
    def j(self) -> int:
        return self.context.j

    @property
    def E_num(self) -> np.ndarray:
        return self.pi_x * self.pi_y

    @property
    def p_num(self) -> np.ndarray:
        return self.pi_y - self.pi_x

    @property
    def q_num(self) -> np.ndarray:
        return self.pi_y + self.pi_x

    @property
    def E(self) -> np.ndarray:
        return self.E_num / float(self.j * self.j)

    @property
    def p(self) -> np.ndarray:
        return self.p_num / float(2 * self.j)

    @property
    def q(self) -> np.ndarray:
        return self.q_num / float(2 * self.j)

    @property
    def t(self) -> np.ndarray:
        return np.arctanh(self.p_num / self.q_num)

    @property
    def u(self) -> np.ndarray:
        return self.context.gamma * np.log(np.sqrt(self.N_sigma.astype(float)) / self.x)

    @property
    def phi(self) -> np.ndarray:
        return (self.x - 1) * (self.y - 1)

    @property
    def k(self) -> np.ndarray:
        return np.arange(1, self.F + 1, dtype=np.int64)

    @property
    def kappa(self) -> np.ndarray:
        return self.k / float(self.F) if self.F else np.array([], dtype=float)

    def entry(self, i: int) -> EnsembleEntry:
        """Entry at zero-based position ``i`` (rank ``i + 1``)."""
        return EnsembleEntry(
            N_sigma=int(self.N_sigma[i]), x_sigma=int(self.x[i]), y_sigma=int(self.y[i]),
            pi_x=int(self.pi_x[i]), pi_y=int(self.pi_y[i]), j=self.j,
            t=float(self.t[i]), u=float(self.u[i]), k=i + 1, kappa=(i + 1) / self.F,
        )

    @property
    def entries(self) -> list[EnsembleEntry]:
        return [self.entry(i) for i in range(self.F)]

    def find(self, N_sigma: int) -> EnsembleEntry:
        hit = np.flatnonzero(self.N_sigma == N_sigma)
        if not len(hit):
            raise KeyError(N_sigma)
        return self.entry(int(hit[0]))


def factor_interval(lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
    """Smallest prime factor and Omega (with multiplicity) for every n in [lo, hi).

    Omega is capped at 3, enough to tell semiprimes apart.
    """
    n = np.arange(lo, hi, dtype=np.int64)
    rest = n.copy()
    omega = np.zeros(len(n), dtype=np.int8)
    spf = np.zeros(len(n), dtype=np.int64)
    for p in primes.default_counter().primes(2, math.isqrt(max(hi - 1, 1))):
        p = int(p)
        off = (-lo) % p
        if off >= len(n):
            continue
        r = rest[off::p]
        o = omega[off::p]
        s = spf[off::p]
        s[s == 0] = p
        while True:
            m = (r % p == 0) & (o < 3)
            if not m.any():
                break
            r[m] //= p
            o[m] += 1
        # r is a view with stride; writes above went to rest already
    big = rest > 1
    omega = np.minimum(omega + big, 3)
    spf = np.where(spf == 0, rest, spf)
    return spf, omega


def _block_bases(ctx: PrimeContext, xs: np.ndarray) -> tuple[dict, dict]:
    """For each prime x: pi of the lower and upper y-limits of its block.

    y runs over primes in (L_x, U_x] with L_x = max((lo-1)//x, x-1) and
    U_x = (hi-1)//x, both counted by Lucy tables independent of the sieve.
    """
    lo, hi = ctx.interval
    counter = primes.default_counter()
    upper = counter.lucy_table(hi - 1) if hi - 1 > counter.sieve_limit else None
    lower = counter.lucy_table(lo - 1) if lo - 1 > counter.sieve_limit else None

    def count(table, v):
        if table is not None:
            try:
                return table.pi(v)
            except KeyError:
                pass
        return counter.pi(v)

    lows, highs = {}, {}
    for x in xs:
        x = int(x)
        L = max((lo - 1) // x, x - 1)
        U = (hi - 1) // x
        lows[x] = count(lower, L)
        highs[x] = count(upper, U) if U > L else lows[x]
    return lows, highs


def build_ensemble(N: int, include_squares: bool = True,
                   interval_bound: int = DEFAULT_INTERVAL_BOUND) -> Ensemble:
    """Enumerate the factorization ensemble of N by sieving its interval."""
    ctx = PrimeContext.from_N(N)
    lo, hi = ctx.interval
    if hi - lo > interval_bound:
        raise ResourceError(f"interval length {hi - lo} exceeds bound {interval_bound}")
    spf, omega = factor_interval(lo, hi)
    keep = np.flatnonzero(omega == 2)
    N_sigma = keep.astype(np.int64) + lo
    x = spf[keep]
    y = N_sigma // x
    if not include_squares:
        m = x != y
        N_sigma, x, y = N_sigma[m], x[m], y[m]

    counter = primes.default_counter()
    xs = np.unique(x)
    lows, highs = _block_bases(ctx, xs)
    pi_x = np.array([counter.pi(int(v)) for v in x], dtype=np.int64)
    # within an x-block the y are consecutive primes, so pi(y) = base + rank
    order = np.lexsort((y, x))
    pi_y = np.empty(len(x), dtype=np.int64)
    xo = x[order]
    starts = np.flatnonzero(np.r_[True, xo[1:] != xo[:-1]])
    ends = np.r_[starts[1:], len(xo)]
    for s, e in zip(starts, ends):
        xv = int(xo[s])
        base = lows[xv]
        if not include_squares and xv * xv >= lo:
            base += 1  # the square x*x was dropped
        pi_y[order[s:e]] = base + np.arange(1, e - s + 1)

    E_num = pi_x * pi_y
    rank = np.lexsort((N_sigma, -x, E_num))  # ascending E, then x desc, then N asc
    ens = Ensemble(
        context=ctx, N_sigma=N_sigma[rank], x=x[rank], y=y[rank],
        pi_x=pi_x[rank], pi_y=pi_y[rank], include_squares=include_squares,
        block_base={int(v): (lows[int(v)], highs[int(v)]) for v in xs},
    )
    return ens


def per_x_counts(ens: Ensemble) -> dict[int, int]:
    """#{y prime : y >= x, x*y in the interval} from prime counts alone.

    Covers every prime x up to x_{j+1}, including those with no entries.
    """
    ctx = ens.context
    xs = primes.default_counter().primes(2, ctx.x_j1)
    lows, highs = _block_bases(ctx, xs)
    counts = {}
    for x in xs:
        x = int(x)
        c = highs[x] - lows[x]
        if not ens.include_squares and x * x in range(*ctx.interval):
            c -= 1
        if c > 0:
            counts[x] = c
    return counts


def cardinality_exact(ens: Ensemble) -> int:
    """F, checked against the per-x prime-count reconstruction."""
    counts = per_x_counts(ens)
    total = sum(counts.values())
    if total != ens.F:
        raise CheckFailure(f"per-x reconstruction {total} != enumerated {ens.F}")
    xs, c = np.unique(ens.x, return_counts=True)
    if dict(zip(xs.tolist(), c.tolist())) != counts:
        raise CheckFailure("per-x block sizes differ from the prime-count reconstruction")
    return ens.F


def cardinality_literal(ctx: PrimeContext) -> dict:
    """The closed form f(j+1) - f(j-1) + j with f(j) = sum_{i<j} pi(x(j)^2/x_i).

    Returned for comparison only; the enumeration is authoritative.
    """
    counter = primes.default_counter()
    j = ctx.j

    def f(jj: int) -> int:
        if jj < 2:
            return 0
        xjj = counter.nth_prime(jj)
        M = xjj * xjj
        table = counter.lucy_table(M) if M > counter.sieve_limit else None
        total = 0
        for xi in counter.primes(2, counter.nth_prime(jj - 1)):
            v = M // int(xi)
            total += table.pi(v) if table is not None else counter.pi(v)
        return total

    return {"f(j+1)": f(j + 1), "f(j-1)": f(j - 1), "F_literal": f(j + 1) - f(j - 1) + j}


def cardinality_asymptote(N: int, C: float | None = None) -> float:
    """sqrt(N) (lnln sqrt(N) + C)(1 - lnln sqrt(N)/ln sqrt(N) + 1/ln sqrt(N))."""
    if N < 10**4:
        raise DomainError("the asymptote is only offered for N >= 10^4")
    C = primes.meissel_mertens_C() if C is None else C
    r = math.sqrt(N)
    L = math.log(r)
    LL = math.log(L)
    return r * (LL + C) * (1.0 - LL / L + 1.0 / L)


@dataclass(frozen=True)
class Step:
    x: int
    count: int
    formula_count: int
    E_min: float
    E_max: float
    k_min: int
    k_max: int


def step_structure(ens: Ensemble) -> dict[int, Step]:
    """Per-x block statistics; block sizes must match the prime-count formula."""
    formula = per_x_counts(ens)
    out = {}
    k = ens.k
    E = ens.E
    for xv in np.unique(ens.x):
        m = ens.x == xv
        xv = int(xv)
        cnt = int(m.sum())
        if formula.get(xv, 0) != cnt:
            raise CheckFailure(f"block x={xv}: {cnt} entries, formula gives {formula.get(xv, 0)}")
        out[xv] = Step(x=xv, count=cnt, formula_count=formula[xv], E_min=float(E[m].min()),
                       E_max=float(E[m].max()), k_min=int(k[m].min()), k_max=int(k[m].max()))
    return out


def x3_rank_band(ens: Ensemble) -> tuple[float, float]:
    """Rank band [F - 5 sqrt(N)/6, F - sqrt(N)/2) predicted for the x=3 block."""
    r = ens.context.sqrt_N
    return ens.F - 5.0 * r / 6.0, ens.F - r / 2.0


def check_identities(ens: Ensemble) -> None:
    """Exact integer checks of q^2 - p^2 = E and the totient identity."""
    # (q_num)^2 - (p_num)^2 = 4 E_num, denominators (2j)^2 and j^2
    qn = [int(v) for v in ens.q_num]
    pn = [int(v) for v in ens.p_num]
    En = [int(v) for v in ens.E_num]
    for a, b, e in zip(qn, pn, En):
        if a * a - b * b != 4 * e:
            raise CheckFailure("q^2 - p^2 != E")
    for n, x, y in zip(ens.N_sigma.tolist(), ens.x.tolist(), ens.y.tolist()):
        if x * y != n or (x - 1) * (y - 1) != n - (x + y) + 1:
            raise CheckFailure(f"totient identity fails at {n}")
