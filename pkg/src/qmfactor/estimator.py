"""scikit-learn style front end: fit the asymptotic model for one N, then
predict pi_QM(x;N) for any array of x."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .asymptotics import e_qm, kappa_of_u, u_of_x
from .ensemble import DEFAULT_INTERVAL_BOUND
from .piqm import fit_pipeline, pi_qm
from .validation import check_N, check_x


class QuantumPrimeCounter(RegressorMixin, TransformerMixin, BaseEstimator):
    """Approximate pi(x) by pi_QM(x;N).

    Parameters
    ----------
    N : int
        The number whose factorization ensemble calibrates the model.
    literal : bool
        Use the limiting quadratic coefficients (2, 1) instead of the
        three-anchor fit.
    use_exact_F : bool
        Enumerate the ensemble for its exact size; otherwise use the
        cardinality asymptote.
    exact_pi : bool
        Divide by the exact pi(N/x) instead of Li(N/x).
    interval_bound : int
        Largest ensemble interval that will be enumerated.
    """

    def __init__(self, N=10**10, literal=False, use_exact_F=True, exact_pi=False,
                 interval_bound=DEFAULT_INTERVAL_BOUND):
        self.N = N
        self.literal = literal
        self.use_exact_F = use_exact_F
        self.exact_pi = exact_pi
        self.interval_bound = interval_bound

    def fit(self, X=None, y=None):
        # X and y are not used: the model is determined by N alone
        N = check_N(self.N)
        model = fit_pipeline(N, literal=self.literal, use_exact_F=self.use_exact_F,
                             interval_bound=self.interval_bound)
        self.model_ = model
        self.context_ = model.context
        self.F_ = model.F
        self.alpha_ = model.alpha
        self.beta_ = model.beta
        self.kappa1_ = model.kappa1
        self.E1_ = model.E1
        self.x_limit_ = model.x_limit
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        xs = check_x(X)
        return np.array([pi_qm(int(x), self.model_, exact=self.exact_pi) for x in xs])

    def transform(self, X):
        """Columns u(x;N), kappa(u) and E_QM(x;N)."""
        check_is_fitted(self, "model_")
        xs = check_x(X)
        u = np.atleast_1d(u_of_x(xs, self.context_))
        return np.column_stack([u, np.atleast_1d(kappa_of_u(u, self.model_)),
                                np.atleast_1d(e_qm(xs, self.model_))])

    def in_range(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        return check_x(X) < self.x_limit_
