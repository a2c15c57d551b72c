import pytest

from rmexit.codes import LinearCode, rm_generator
from rmexit.gf2core import BitMatrix
from rmexit.schemas import RmParams
from rmexit.settings import get_settings


def rm(n: int, r: int) -> LinearCode:
    return rm_generator(RmParams(n=n, r=r))


@pytest.fixture
def rm31() -> LinearCode:
    return rm(3, 1)


@pytest.fixture
def rm42() -> LinearCode:
    return rm(4, 2)


@pytest.fixture
def toy_code() -> LinearCode:
    """Bits 0 and 1 repeat each other, bit 2 is free: not transitive."""
    return LinearCode(BitMatrix.from_dense([[1, 1, 0], [0, 0, 1]]), "toy")


@pytest.fixture
def toy_generator_file(tmp_path):
    path = tmp_path / "toy.txt"
    path.write_text("# two rows\n110\n001\n")
    return path


@pytest.fixture
def env_settings(monkeypatch):
    """Monkeypatch RMEXIT_* variables with fresh settings and generator caches."""
    get_settings.cache_clear()
    rm_generator.cache_clear()
    yield monkeypatch
    get_settings.cache_clear()
    rm_generator.cache_clear()
