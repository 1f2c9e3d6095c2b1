import numpy as np
import pytest

from demogrowth.synthetic import make_fixture, write_fixture


@pytest.fixture(scope="session")
def fixture():
    return make_fixture()


@pytest.fixture(scope="session")
def fixture_config(tmp_path_factory):
    return write_fixture(tmp_path_factory.mktemp("fixture"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
