"""pi_QM(x;N) and the convergence experiment against the true pi(x)."""
from __future__ import annotations

import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import primes
from .asymptotics import QmModel, build_model, e_qm, u_of_x
from .ensemble import DEFAULT_INTERVAL_BOUND, PrimeContext, build_ensemble
from .exceptions import DomainError


def pi_qm(x: int, model: QmModel, exact: bool = False) -> float:
    """E_QM(x;N) pi(sqrt N)^2 / pi(N/x), the counts replaced by Li unless ``exact``."""
    x = int(x)
    if x < 2:
        raise DomainError("x must be >= 2")
    c = model.context
    E = e_qm(x, model)
    if exact:
        return E * c.j ** 2 / primes.pi_exact(c.N // x)
    return E * primes.li(c.sqrt_N) ** 2 / primes.li(c.N / x)


def u_shortcut(x: float, gamma: float) -> float:
    """1 - gamma (ln x - 1), the PNT shortcut for u(x;N)."""
    return 1.0 - gamma * (math.log(x) - 1.0)


def pi_qm_asymptotic(x: int, model: QmModel) -> tuple[float, float]:
    """(display form E1 gamma x (1+u) E_QM, variant gamma x (1+u) E_QM).

    Both take u from the shortcut; the variant drops the leading E1.
    """
    E = e_qm(x, model)
    u = u_shortcut(x, model.gamma)
    variant = model.gamma * x * (1.0 + u) * E
    return model.E1 * variant, variant


@dataclass(frozen=True)
class ComparisonRow:
    x: int
    pi_exact: int
    pi_qm: float
    pi_qm_asymptotic: float
    pi_qm_asymptotic_alt: float
    u: float
    E_qm: float
    rel_err: float
    valid: bool = True


def compare(x: int, model: QmModel, exact: bool = False) -> ComparisonRow:
    """One comparison row; an x outside the validity range gives a flagged row."""
    pe = primes.pi_exact(x)
    try:
        E = e_qm(x, model)
    except DomainError:
        nan = math.nan
        u = u_of_x(x, model.context) if 2 <= x <= model.context.sqrt_N else nan
        return ComparisonRow(x, pe, nan, nan, nan, u, nan, nan, valid=False)
    pq = pi_qm(x, model, exact=exact)
    lit, alt = pi_qm_asymptotic(x, model)
    return ComparisonRow(x=x, pi_exact=pe, pi_qm=pq, pi_qm_asymptotic=lit, pi_qm_asymptotic_alt=alt,
                         u=u_of_x(x, model.context), E_qm=E, rel_err=abs(pq - pe) / pe)


def comparison_table(x_grid, model: QmModel, exact: bool = False, threads: int = 1) -> list[ComparisonRow]:
    xs = [int(x) for x in x_grid]
    if threads > 1 and len(xs) > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(lambda x: compare(x, model, exact), xs))
    return [compare(x, model, exact) for x in xs]


def fit_pipeline(N: int, literal: bool = False, use_exact_F: bool = True,
                 interval_bound: int = DEFAULT_INTERVAL_BOUND) -> QmModel:
    """Context, exact ensemble size where enumerable, then the fitted model."""
    ctx = PrimeContext.from_N(N)
    F = None
    if use_exact_F:
        lo, hi = ctx.interval
        if hi - lo <= interval_bound:
            F = build_ensemble(N, interval_bound=interval_bound).F
    return build_model(ctx, F, literal=literal)


@dataclass
class SweepResult:
    N: int
    model: QmModel
    rows: list
    invalid: list = field(default_factory=list)

    @property
    def valid_rows(self) -> list:
        return [r for r in self.rows if r.valid]

    @property
    def median(self) -> float:
        errs = [r.rel_err for r in self.valid_rows]
        return statistics.median(errs) if errs else math.nan

    @property
    def max(self) -> float:
        errs = [r.rel_err for r in self.valid_rows]
        return max(errs) if errs else math.nan

    def median_over(self, xs) -> float:
        keep = set(xs)
        errs = [r.rel_err for r in self.valid_rows if r.x in keep]
        return statistics.median(errs) if errs else math.nan

    def monotonicity_violations(self, x_min: int = 10) -> list[int]:
        """x at which pi_QM fails to increase (diagnostic only)."""
        rows = [r for r in self.valid_rows if r.x >= x_min]
        return [b.x for a, b in zip(rows, rows[1:]) if not b.pi_qm > a.pi_qm]


def convergence_sweep(x_grid, N_list, models: dict | None = None, threads: int = 1,
                      **pipeline) -> dict[int, SweepResult]:
    """Per-N comparison tables; invalid cells are kept as flagged rows."""
    out = {}
    x_grid = [int(x) for x in x_grid]
    for N in N_list:
        N = int(N)
        model = (models or {}).get(N) or fit_pipeline(N, **pipeline)
        rows = comparison_table(x_grid, model, threads=threads)
        out[N] = SweepResult(N=N, model=model, rows=rows, invalid=[r.x for r in rows if not r.valid])
    return out


def common_valid_x(results: dict[int, SweepResult]) -> list[int]:
    sets = [set(r.x for r in res.valid_rows) for res in results.values()]
    return sorted(set.intersection(*sets)) if sets else []


def convergence_report(results: dict[int, SweepResult]) -> dict:
    Ns = sorted(results)
    medians = [results[N].median for N in Ns]
    common = common_valid_x(results)
    common_medians = [results[N].median_over(common) for N in Ns]
    return {
        "N": Ns,
        "median": medians,
        "max": [results[N].max for N in Ns],
        "n_valid": [len(results[N].valid_rows) for N in Ns],
        "strictly_decreasing": all(b < a for a, b in zip(medians, medians[1:])),
        "common_x": len(common),
        "common_median": common_medians,
        "common_non_increasing": all(b <= a for a, b in zip(common_medians, common_medians[1:])),
    }


def li_comparison(x_grid, model: QmModel) -> dict:
    """Median relative error of pi_QM against that of Li(x) on the same grid."""
    rows = [r for r in comparison_table(x_grid, model) if r.valid]
    li_err = [abs(primes.li(r.x) - r.pi_exact) / r.pi_exact for r in rows] if rows else []
    return {
        "pi_qm": statistics.median([r.rel_err for r in rows]) if rows else math.nan,
        "li": statistics.median(li_err) if li_err else math.nan,
    }
