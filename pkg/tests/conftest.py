import numpy as np
import pytest

from pathbank.mesh import TriMesh
from pathbank.procedural import box_mesh, wall_with_windows
from pathbank.se3 import Configuration, Rotation


@pytest.fixture
def unit_cube() -> TriMesh:
    return box_mesh((1.0, 1.0, 1.0))


@pytest.fixture
def small_cube() -> TriMesh:
    return box_mesh((0.8, 0.8, 0.8))


@pytest.fixture
def windowed_wall() -> TriMesh:
    """Thin wall in the x-z plane with one generous window at the origin."""
    return wall_with_windows(6.0, 5.0, 0.4, [(0.0, 0.0, 2.0, 2.0)])


def config(x=0.0, y=0.0, z=0.0, rot: Rotation | None = None) -> Configuration:
    return Configuration(np.array([x, y, z]), rot or Rotation.identity())
