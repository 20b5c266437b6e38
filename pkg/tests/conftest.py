import pytest

from app.schemas.scenario import Scenario
from app.services.actions import ActionModel, make_map, pull_back
from app.services.groups import FreeAbelian, FreeGroup, normal_form
from app.services.wildness import TruncationParams


@pytest.fixture
def f2():
    return FreeGroup(("a", "b"))


@pytest.fixture
def z2():
    return FreeAbelian(("a", "b"))


@pytest.fixture
def f2_action(f2):
    return ActionModel(f2, f2.parse("a"))


@pytest.fixture
def f2_pullback(f2, f2_action):
    return pull_back(f2_action, make_map("right_multiply", f2, f2.parse("b")))


@pytest.fixture
def z2_action(z2):
    return ActionModel(z2, z2.parse("a"))


@pytest.fixture
def trunc4():
    return TruncationParams(radius=4)


@pytest.fixture
def el(f2):
    """Parse an F2 word into a GroupElement."""
    return lambda text: normal_form(text, f2)


def make_scenario(**overrides) -> Scenario:
    data = {
        "name": "f2-small",
        "g": "a",
        "group": {"family": "free", "rank": 2},
        "truncation": {"R": 4},
        "samples": {
            "probe_radius": 2,
            "pair_radius": 2,
            "interval_radius": 3,
            "lip_radius": 2,
            "behrstock_radius": 2,
            "census": ["b"],
        },
        "complex": {"K": ["default"], "coset_radius": 2, "depth": 4, "n_max": 4},
    }
    data.update(overrides)
    return Scenario.model_validate(data)


@pytest.fixture
def f2_scenario():
    return make_scenario()
