import warnings

import pytest

import maxprod_kantorovich as mk


@pytest.fixture(scope="session")
def kernels():
    """All four catalog kernels, built once."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return {name: mk.load_kernel(name) for name in ("logistic", "tanh", "ramp", "step")}


@pytest.fixture(scope="session")
def funcs():
    return mk.corpus()


@pytest.fixture(scope="session")
def phis():
    return {
        "power2": mk.make_power_phi(2),
        "zygmund": mk.make_zygmund(1, 1),
        "exponential": mk.make_exponential(1),
    }
