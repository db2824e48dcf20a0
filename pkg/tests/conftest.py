import pytest

from heatchannel.channel import make_params

# the single seed used by every Monte-Carlo test; fixed before any run
SEED = 20261014


@pytest.fixture
def ref():
    """alpha = 1 s, beta = 100, theta2 = 0.01 W/Hz."""
    return make_params(1.0, 100.0, 0.01)


@pytest.fixture(params=["numba", "numpy"])
def kernel_path(request, monkeypatch):
    """Run a test once through each kernel flavour."""
    monkeypatch.setenv("HEATCHANNEL_DISABLE_NUMBA", "1" if request.param == "numpy" else "0")
    return request.param
