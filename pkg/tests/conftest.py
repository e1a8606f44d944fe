import numpy as np
import pytest

from tenthsim.geometry import Pose2D
from tenthsim.gridmap import FREE, OCCUPIED, OccupancyGridMap
from tenthsim.track import Track


@pytest.fixture(scope="session")
def square_room():
    """20 m free square with 0.25 m thick walls, 0.05 m cells."""
    cells = np.zeros((400, 400), dtype=np.uint8)
    cells[:5, :] = OCCUPIED
    cells[-5:, :] = OCCUPIED
    cells[:, :5] = OCCUPIED
    cells[:, -5:] = OCCUPIED
    return OccupancyGridMap(resolution=0.05, origin=Pose2D(0, 0, 0), cells=cells)


@pytest.fixture(scope="session")
def ring_track():
    """Regular 200-gon of radius 10 with 1 m half-widths (closed)."""
    phi = np.linspace(0, 2 * np.pi, 200, endpoint=False)
    return Track.from_waypoints(10 * np.cos(phi), 10 * np.sin(phi), 1.0, 1.0)


@pytest.fixture(scope="session")
def straight_track():
    """Open straight track along +x, 3 m wide, 30 m long."""
    xs = np.linspace(0.0, 30.0, 61)
    return Track.from_waypoints(xs, np.zeros_like(xs), 1.5, 1.5)


def bundled(name: str) -> str:
    from tenthsim.harness.scenario import data_dir

    return str(data_dir() / name)
