import pytest

from svhmc import _kernels


@pytest.fixture(params=_kernels.available_backends())
def backend(request):
    """Run the test once per available kernel backend, restoring the default."""
    previous = _kernels.BACKEND
    _kernels.use_backend(request.param)
    yield request.param
    _kernels.use_backend(previous)
