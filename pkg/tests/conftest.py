import pytest

from openmedium.utils.config import RunConfig
from openmedium.utils.data_handler import CACHE, ancestor_text
from openmedium.utils.rng import RngStreams
from openmedium.worlds import isa, make_world


@pytest.fixture(autouse=True)
def _fresh_cache():
    CACHE.clear()
    yield
    CACHE.clear()


@pytest.fixture
def ancestor():
    return isa.parse_genome(ancestor_text(""))


@pytest.fixture
def soup_config():
    return RunConfig(world_kind="soup", soup_size=8000, metrics_interval=50)


@pytest.fixture
def quiet_soup_config(soup_config):
    return soup_config.replace(p_copy_flip=0.0, p_cosmic=0.0)


@pytest.fixture
def atoms_config():
    return RunConfig(
        world_kind="atoms", grid_width=32, grid_height=32,
        food_count=100, cap_food_count=20, metrics_interval=50,
    )


@pytest.fixture
def soup_world(quiet_soup_config, ancestor):
    return make_world(quiet_soup_config, RngStreams(quiet_soup_config.seed), ancestor)


@pytest.fixture
def atoms_world(atoms_config):
    return make_world(atoms_config, RngStreams(atoms_config.seed))
