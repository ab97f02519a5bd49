"""Asymptotic model of the ensemble functional: u(x;N), E_Li, the u<->kappa
quadratic, the matching point kappa1 and amplitude E1, and E_QM."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ensemble import PrimeContext, cardinality_asymptote
from .exceptions import DomainError


def u_of_x(x, context: PrimeContext):
    """gamma * ln(sqrt(N)/x) for 2 <= x <= sqrt(N)."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 2) or np.any(xa > context.sqrt_N):
        raise DomainError("u(x;N) needs 2 <= x <= sqrt(N)")
    out = context.gamma * np.log(context.sqrt_N / xa)
    return float(out) if out.ndim == 0 else out


def e_li(u):
    """1/(1 - u^2); the pole at |u| = 1 is an error."""
    ua = np.asarray(u, dtype=float)
    if np.any(np.abs(ua) >= 1.0):
        raise DomainError("E_Li diverges for |u| >= 1")
    out = 1.0 / (1.0 - ua * ua)
    return float(out) if out.ndim == 0 else out


def kappa3(context: PrimeContext, F: int) -> float:
    return 1.0 - (5.0 / 6.0) * context.sqrt_N / F


def fit_u_kappa(context: PrimeContext, F: int) -> tuple[float, float]:
    """(alpha, beta) of u = alpha*kappa - beta*kappa^2 through the three anchors

    (0, 0), (kappa(3), u(3)) and (1, u(2)).
    """
    k3 = kappa3(context, F)
    if not 0.0 < k3 < 1.0:
        raise DomainError(f"degenerate anchor kappa(3) = {k3}; need F > 5 sqrt(N)/6")
    u2 = u_of_x(2, context)
    u3 = u_of_x(3, context)
    # alpha - beta = u2 ; alpha*k3 - beta*k3^2 = u3
    alpha = (u3 - u2 * k3 * k3) / (k3 * (1.0 - k3))
    beta = alpha - u2
    return alpha, beta


def u_of_kappa(kappa, alpha: float, beta: float):
    k = np.asarray(kappa, dtype=float)
    out = alpha * k - beta * k * k
    return float(out) if out.ndim == 0 else out


def kappa1_series(gamma: float, C: float) -> float:
    """(1/6)/ln(1/gamma) + R/ln(1/gamma)^2 with R = 5C/6."""
    L = math.log(1.0 / gamma)
    return (1.0 / 6.0) / L + (5.0 / 6.0) * C / (L * L)


@dataclass
class QmModel:
    context: PrimeContext
    F: int
    alpha: float
    beta: float
    kappa1: float
    E1: float
    R: float
    anchors: tuple
    F_source: str = "exact"
    literal: bool = False
    E1_alt: float = field(default=math.nan)

    @property
    def gamma(self) -> float:
        return self.context.gamma

    @property
    def u1(self) -> float:
        return u_of_kappa(self.kappa1, self.alpha, self.beta)

    @property
    def E1_gap(self) -> float:
        """Relative gap between E1_alt = gamma^-(5 sqrt(N)/6F + kappa1)/3 and the matched E1."""
        return abs(self.E1_alt - self.E1) / self.E1

    @property
    def x_limit(self) -> float:
        """Upper end of the validity range, sqrt(N) exp(-u(kappa1)/gamma)."""
        return self.context.sqrt_N * math.exp(-self.u1 / self.gamma)

    @property
    def u_vertex(self) -> float:
        return self.alpha * self.alpha / (4.0 * self.beta)

    def kappa_of_u(self, u):
        return kappa_of_u(u, self)

    def e_qm(self, x):
        return e_qm(x, self)

    def as_dict(self) -> dict:
        c = self.context
        return {
            "N": c.N, "j": c.j, "gamma": c.gamma, "x_j": c.x_j, "x_j1": c.x_j1,
            "q_max": c.q_max, "C": c.C, "F": self.F, "F_source": self.F_source,
            "literal": int(self.literal), "alpha": self.alpha, "beta": self.beta,
            "kappa1": self.kappa1, "u1": self.u1, "E1": self.E1, "E1_alt": self.E1_alt,
            "E1_gap": self.E1_gap, "R": self.R, "x_limit": self.x_limit,
            "kappa3": self.anchors[1][0], "u3": self.anchors[1][1], "u2": self.anchors[2][1],
            "li_convention": "offset-2",
        }


def kappa_of_u(u, model: QmModel):
    """Branch of the inverse quadratic with kappa(0) = 0."""
    a, b = model.alpha, model.beta
    ua = np.asarray(u, dtype=float)
    disc = a * a / 4.0 - b * ua
    if np.any(disc < -1e-15 * max(1.0, a * a)):
        raise DomainError("u lies above the vertex alpha^2/(4 beta)")
    out = a / (2.0 * b) - np.sqrt(np.maximum(disc, 0.0)) / b
    return float(out) if out.ndim == 0 else out


def build_model(context: PrimeContext, F: int | None = None, literal: bool = False) -> QmModel:
    """Fit (alpha, beta), then kappa1 from its two-term series and E1 by matching E_Li.

    Without an enumerated F the cardinality asymptote is used. ``literal``
    replaces the fitted (alpha, beta) by their limits (2, 1).
    """
    source = "exact"
    if F is None:
        F = int(round(cardinality_asymptote(context.N, context.C)))
        source = "asymptote"
    if literal:
        alpha, beta = 2.0, 1.0
    else:
        alpha, beta = fit_u_kappa(context, F)
    k1 = kappa1_series(context.gamma, context.C)
    if not 0.0 < k1 < 1.0:
        raise DomainError(f"kappa1 = {k1} outside (0, 1)")
    u1 = alpha * k1 - beta * k1 * k1
    E1 = e_li(u1)
    anchors = ((0.0, 0.0), (kappa3(context, F), u_of_x(3, context)), (1.0, u_of_x(2, context)))
    E1_alt = (1.0 / 3.0) * context.gamma ** (-((5.0 / 6.0) * context.sqrt_N / F + k1))
    return QmModel(context=context, F=int(F), alpha=alpha, beta=beta, kappa1=k1, E1=E1,
                   R=(5.0 / 6.0) * context.C, anchors=anchors, F_source=source,
                   literal=literal, E1_alt=E1_alt)


def e_qm_exponent(u, model: QmModel):
    """Exponent of gamma in E_QM, equal to kappa1 - kappa(u)."""
    a, b = model.alpha, model.beta
    ua = np.asarray(u, dtype=float)
    return np.sqrt(a * a / 4.0 - b * ua) / b + model.kappa1 - a / (2.0 * b)


def e_qm(x, model: QmModel, check: bool = True):
    """E1 * gamma^(kappa1 - kappa(u(x;N))), inside the validity range u >= u(kappa1)."""
    xa = np.asarray(x, dtype=float)
    if check and np.any(xa >= model.x_limit):
        raise DomainError(f"x must be below {model.x_limit:.6g} (kappa >= kappa1)")
    u = np.asarray(u_of_x(xa, model.context), dtype=float)
    if np.any(u > model.u_vertex):
        raise DomainError("u(x;N) above the vertex of the u<->kappa quadratic")
    out = model.E1 * model.gamma ** e_qm_exponent(u, model)
    return float(out) if out.ndim == 0 else out


def dump_model(model: QmModel) -> str:
    """key=value lines, reals at 17 significant digits."""
    lines = []
    for key, val in model.as_dict().items():
        if isinstance(val, float):
            val = format(val, ".17g")
        lines.append(f"{key}={val}")
    return "\n".join(lines) + "\n"
