import pytest

from sgtori import kernels


@pytest.fixture(scope="session", autouse=True)
def jit_warmup():
    """Compile the numba kernels once so timed tests measure the math."""
    kernels.warmup()
