import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from qmfactor import QuantumPrimeCounter
from qmfactor.exceptions import DomainError
from qmfactor.piqm import pi_qm

from conftest import model_for


def test_params_and_clone():
    est = QuantumPrimeCounter(N=10**6, literal=True)
    params = est.get_params()
    assert params["N"] == 10**6 and params["literal"] is True
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(N=10**8)
    assert est.N == 10**8


def test_not_fitted():
    with pytest.raises(NotFittedError):
        QuantumPrimeCounter(N=10**6).predict([10])


def test_fit_predict_matches_functional_api():
    est = QuantumPrimeCounter(N=10**8).fit()
    m = model_for(10**8)
    assert est.F_ == m.F and est.alpha_ == m.alpha and est.x_limit_ == m.x_limit
    xs = np.arange(10, 200)
    np.testing.assert_array_equal(est.predict(xs), [pi_qm(int(x), m) for x in xs])
    np.testing.assert_array_equal(est.predict(xs.reshape(-1, 1)), est.predict(xs))


def test_transform_columns():
    est = QuantumPrimeCounter(N=10**8).fit()
    Z = est.transform([10, 100])
    assert Z.shape == (2, 3)
    u, kappa, E = Z.T
    assert np.all(np.diff(u) < 0) and np.all(np.diff(E) < 0)
    assert np.all((kappa > est.kappa1_) & (kappa <= 1))


def test_in_range_and_score():
    est = QuantumPrimeCounter(N=10**10).fit()
    assert est.in_range([10, 1000, 2000]).tolist() == [True, True, False]
    from qmfactor.primes import pi_exact
    xs = np.arange(10, 1001)
    assert est.score(xs, [pi_exact(int(x)) for x in xs]) > 0.95


@pytest.mark.parametrize("bad", [[1], [2.5], [[1, 2]], ["a"]])
def test_bad_input(bad):
    est = QuantumPrimeCounter(N=10**6).fit()
    with pytest.raises(DomainError):
        est.predict(bad)


def test_bad_N():
    with pytest.raises(DomainError):
        QuantumPrimeCounter(N=5).fit()
    assert QuantumPrimeCounter(N="1e6").fit().F_ == 4764
