"""Factorization ensembles, their quantized spectrum, and the prime counting
function pi_QM(x;N) built from them."""

__version__ = "0.1.0"

from .asymptotics import QmModel, build_model, e_li, e_qm, fit_u_kappa, kappa_of_u, u_of_x
from .ensemble import Ensemble, EnsembleEntry, PrimeContext, build_ensemble, cardinality_asymptote, cardinality_exact
from .estimator import QuantumPrimeCounter
from .piqm import convergence_sweep, pi_qm
from .primes import li, meissel_mertens_C, nth_prime, pi_exact
from .special import delta_coulomb
from .spectrum import phase_spectrum, solve_ode_spectrum

__all__ = [
    "Ensemble", "EnsembleEntry", "PrimeContext", "QmModel", "QuantumPrimeCounter",
    "build_ensemble", "build_model", "cardinality_asymptote", "cardinality_exact",
    "convergence_sweep", "delta_coulomb", "e_li", "e_qm", "fit_u_kappa", "kappa_of_u",
    "li", "meissel_mertens_C", "nth_prime", "phase_spectrum", "pi_exact", "pi_qm",
    "solve_ode_spectrum", "u_of_x",
]
