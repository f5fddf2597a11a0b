import pytest

from reference import make_toy


@pytest.fixture
def toy():
    return make_toy()
