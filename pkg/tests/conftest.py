import io

import pytest

from airlog.fixtures import kitchen_kb, kitchen_stream_text, synthetic_stream
from airlog.observation import read_samples


@pytest.fixture(scope="session")
def kitchen():
    return kitchen_kb()


@pytest.fixture(scope="session")
def stream_3day():
    return read_samples(io.StringIO(kitchen_stream_text(3)))


@pytest.fixture(scope="session")
def stream_5day():
    return read_samples(io.StringIO(kitchen_stream_text(5)))


@pytest.fixture(scope="session")
def warm_kernel(kitchen):
    """Compile/load the numba kernel once so timed tests measure steady state."""
    import airlog

    samples = read_samples(io.StringIO(synthetic_stream(10, 30)))
    airlog.run(kitchen, samples, granularity=1)
    return True
