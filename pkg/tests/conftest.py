import pytest

from surfplan.channel import synthesize_channels
from surfplan.scenes import desk_scene


@pytest.fixture(scope="session")
def desk_channels():
    """The shipped indoor scene at full size (8 users, 6 surfaces)."""
    return synthesize_channels(desk_scene())
