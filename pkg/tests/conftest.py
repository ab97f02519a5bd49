import warnings
from functools import lru_cache

import pytest

from qmfactor.ensemble import build_ensemble
from qmfactor.piqm import fit_pipeline
from qmfactor.spectrum import solve_ode_spectrum


@lru_cache(maxsize=None)
def ensemble_for(N):
    return build_ensemble(N)


@lru_cache(maxsize=None)
def model_for(N, literal=False):
    return fit_pipeline(N, literal=literal)


@lru_cache(maxsize=None)
def ode_levels(N=10**4, tol=1e-10):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        return tuple(solve_ode_spectrum(N, tol=tol))


@pytest.fixture(scope="session")
def ens77():
    return ensemble_for(77)


@pytest.fixture(scope="session")
def spectrum_1e4():
    return ode_levels()


ACCEPTANCE_LINES = []


def record(number, passed, detail):
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
