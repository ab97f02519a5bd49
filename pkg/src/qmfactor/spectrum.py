"""Spectrum of the confined inverted oscillator psi'' + q^2 psi = E psi on [sqrt(E), q_max].

Two routes: shooting on the ODE itself, and root-finding on the asymptotic
phase condition built from the Coulomb phase and a logarithmic drift.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .exceptions import DomainError, NoRootError
from .special import delta_coulomb


@dataclass(frozen=True)
class SpectralLevel:
    n: int
    k: int
    E: float
    method: str
    residual: float


@dataclass(frozen=True)
class PhaseParams:
    A: float
    h1: float
    source: str = "formula"

    def __post_init__(self):
        if self.source == "formula" and not self.A > 0:
            raise DomainError("A must be positive")

    @classmethod
    def from_formula(cls, N: int, F: int, gamma: float, kappa1: float) -> "PhaseParams":
        """A = pi F/(sqrt(N) ln(1/gamma)), h1 = pi k1 with k1 = kappa1 F."""
        A = math.pi * F / (math.sqrt(N) * math.log(1.0 / gamma))
        return cls(A=A, h1=math.pi * kappa1 * F, source="formula")


def level_count(N: int) -> int:
    """floor(N / (128 pi)), the semiclassical number of levels."""
    return math.floor(N / (128.0 * math.pi))


def q_max(N: int) -> float:
    return math.sqrt(N) / 8.0


def prufer_phase(E: float, qm: float, tol: float = 1e-10) -> float:
    """Prufer angle theta(q_max) for psi(sqrt E) = 0, psi'(sqrt E) = 1.

    With psi = r sin(theta), psi' = r cos(theta) the amplitude drops out:
    theta' = cos^2 theta + (q^2 - E) sin^2 theta. Eigenvalues sit where
    theta(q_max) is a multiple of pi.
    """
    q0 = math.sqrt(E)
    if q0 >= qm:
        raise DomainError("E must lie below q_max^2")

    def rhs(q, th):
        s = math.sin(th[0])
        c = math.cos(th[0])
        return [c * c + (q * q - E) * s * s]

    sol = solve_ivp(rhs, (q0, qm), [0.0], method="DOP853", rtol=tol, atol=tol * 1e-2)
    if not sol.success:
        raise RuntimeError(f"integrator failed at E={E}: {sol.message}")
    return float(sol.y[0, -1])


def mismatch(E: float, qm: float, tol: float = 1e-10) -> float:
    """Normalized far-boundary value psi(q_max)/|(psi, psi')|."""
    return math.sin(prufer_phase(E, qm, tol))


def node_count(theta: float) -> int:
    """Interior zeros of psi on (sqrt E, q_max) given the final Prufer angle."""
    return max(math.ceil(theta / math.pi - 1e-12) - 1, 0)


def prufer_phases(E, qm: float, tol: float = 1e-10) -> np.ndarray:
    """theta(q_max) for many energies in one integration.

    Each domain [sqrt(E), q_max] is mapped onto s in [0, 1] so the whole batch
    shares one independent variable.
    """
    E = np.asarray(E, dtype=float)
    q0 = np.sqrt(E)
    if np.any(q0 >= qm):
        raise DomainError("E must lie below q_max^2")
    width = qm - q0

    def rhs(s, th):
        q = q0 + s * width
        sn = np.sin(th)
        cs = np.cos(th)
        return width * (cs * cs + (q * q - E) * sn * sn)

    sol = solve_ivp(rhs, (0.0, 1.0), np.zeros_like(E), method="DOP853", rtol=tol, atol=tol * 1e-2)
    if not sol.success:
        raise RuntimeError(f"integrator failed: {sol.message}")
    return sol.y[:, -1]


def _batched(fn, E: np.ndarray, threads: int, chunk: int = 64) -> np.ndarray:
    parts = [E[i : i + chunk] for i in range(0, len(E), chunk)]
    if threads > 1 and len(parts) > 1:
        with ThreadPoolExecutor(threads) as pool:
            out = list(pool.map(fn, parts))
    else:
        out = [fn(p) for p in parts]
    return np.concatenate(out) if out else np.array([])


def solve_ode_spectrum(N: int, E_range: tuple[float, float] | None = None, tol: float = 1e-10,
                       grid_step: float = 1.0, rel_tol: float = 1e-10,
                       threads: int = 1) -> list[SpectralLevel]:
    """All eigenvalues in E_range by Prufer shooting, ascending in E.

    The lower boundary sqrt(E) moves with every trial E. A grid of trial
    energies brackets each crossing theta = m pi, then all brackets are
    bisected together down to ``rel_tol``. Chunks of the grid are independent
    integrations, so the result does not depend on ``threads``.
    """
    qm = q_max(N)
    top = qm * qm
    lo, hi = E_range if E_range is not None else (0.5, 0.99 * top)
    if not 0 < lo < hi < top:
        raise DomainError(f"E_range must lie inside (0, {top})")
    grid = np.linspace(lo, hi, max(int(math.ceil((hi - lo) / grid_step)), 2) + 1)
    theta = _batched(lambda e: prufer_phases(e, qm, tol), grid, threads)

    a, b, m = [], [], []
    for i in range(len(grid) - 1):
        t_lo, t_hi = sorted((theta[i], theta[i + 1]))
        for mm in range(max(math.ceil(t_lo / math.pi), 1), math.floor(t_hi / math.pi) + 1):
            if t_lo < mm * math.pi <= t_hi:
                a.append(grid[i])
                b.append(grid[i + 1])
                m.append(mm)
    if not m:
        return []
    a, b, m = np.array(a), np.array(b), np.array(m)
    target = m * math.pi
    f_a = theta[np.searchsorted(grid, a)] - target
    while np.any(b - a > rel_tol * np.abs(a + b) / 2):
        mid = 0.5 * (a + b)
        f_mid = prufer_phases(mid, qm, tol) - target
        left = np.sign(f_mid) == np.sign(f_a)
        a = np.where(left, mid, a)
        f_a = np.where(left, f_mid, f_a)
        b = np.where(left, b, mid)
    E = 0.5 * (a + b)
    resid = np.sin(prufer_phases(E, qm, tol))

    n0 = level_count(N)
    levels = [SpectralLevel(n=int(mm - 1), k=n0 - int(mm - 1), E=float(e), method="ode",
                            residual=float(r)) for mm, e, r in zip(m, E, resid)]
    levels.sort(key=lambda lv: lv.E)
    for x, y in zip(levels, levels[1:]):
        if x.n - y.n != 1:
            warnings.warn(f"possible missed root between E={x.E:.6g} and E={y.E:.6g}")
    return levels


def phase_terms(E: float, N: int) -> float:
    """The parameter-free part of the phase: delta_Coul + N/128 - (E/4) ln(N/64)."""
    return delta_coulomb(E) + N / 128.0 - (E / 4.0) * math.log(N / 64.0)


def delta_0(E: float, N: int, params: PhaseParams) -> float:
    return -params.A * math.sqrt(N) * math.log(E) - params.h1


def phase_residual(E: float, N: int, n: int, params: PhaseParams) -> float:
    return phase_terms(E, N) + delta_0(E, N, params) - n * math.pi


def fit_phase_params(levels: list[SpectralLevel], N: int) -> tuple[PhaseParams, float]:
    """Least-squares (A, h1) making the phase condition hold at the given levels.

    The condition is linear in (A, h1): A sqrt(N) ln E + h1 = phase_terms - n pi.
    Returns the parameters and the rms phase residual.
    """
    if len(levels) < 2:
        raise DomainError("need at least two levels to fit (A, h1)")
    X = np.array([[math.sqrt(N) * math.log(lv.E), 1.0] for lv in levels])
    y = np.array([phase_terms(lv.E, N) - lv.n * math.pi for lv in levels])
    (A, h1), *_ = np.linalg.lstsq(X, y, rcond=None)
    rms = float(np.sqrt(np.mean((X @ np.array([A, h1]) - y) ** 2)))
    return PhaseParams(A=float(A), h1=float(h1), source="fitted"), rms


def phase_spectrum(N: int, params: PhaseParams, n_values, E_range: tuple[float, float] | None = None,
                   grid_step: float = 0.25, strict: bool = True) -> list[SpectralLevel]:
    """Root of the phase condition for each n, searched inside E_range.

    Where several sign changes exist, the one of smallest E is kept and a
    warning is issued. An n without any sign change raises NoRootError, or
    is skipped when ``strict`` is false.
    """
    top = q_max(N) ** 2
    lo, hi = E_range if E_range is not None else (0.5, 0.99 * top)
    grid = np.linspace(lo, hi, max(int(math.ceil((hi - lo) / grid_step)), 2) + 1)
    base = np.array([phase_terms(float(e), N) + delta_0(float(e), N, params) for e in grid])
    n0 = level_count(N)
    out = []
    missing = []
    for n in n_values:
        r = base - n * math.pi
        idx = np.flatnonzero(np.sign(r[:-1]) * np.sign(r[1:]) <= 0)
        if not len(idx):
            missing.append(n)
            continue
        if len(idx) > 1:
            warnings.warn(f"phase condition has {len(idx)} roots for n={n}; keeping the lowest")
        i = int(idx[0])
        E = brentq(lambda e: phase_residual(e, N, n, params), grid[i], grid[i + 1], xtol=1e-14, rtol=1e-12)
        out.append(SpectralLevel(n=n, k=n0 - n, E=E, method="phase",
                                 residual=phase_residual(E, N, n, params)))
    if missing and strict:
        raise NoRootError(f"no root in bracket for n={missing}")
    return out


def reduced_energy(N: int, k: int, params: PhaseParams) -> float:
    """Root of the reduced Bohr-Sommerfeld form (sqrt(N)/pi) ln E = (k - h1/pi)/A."""
    return math.exp(math.pi * (k - params.h1 / math.pi) / (params.A * math.sqrt(N)))
