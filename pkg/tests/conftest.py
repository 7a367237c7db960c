import numpy as np
import pytest
from hypothesis import settings

from backbone_arm.env import Environment, TeamSpec
from backbone_arm.maps import load_map

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def square(cx, cy, half):
    return [[cx - half, cy - half], [cx + half, cy - half], [cx + half, cy + half], [cx - half, cy + half]]


@pytest.fixture
def empty_env():
    return Environment((-20, -20, 20, 20), (), (0, 0))


@pytest.fixture(scope="session")
def illustrative():
    return load_map("illustrative")


@pytest.fixture(scope="session")
def large():
    return load_map("large")


@pytest.fixture
def team4():
    return TeamSpec(4, 5.0, 0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_map(rng, max_obstacles=4, half=10.0):
    """Random axis-aligned boxes and triangles that leave the origin free."""
    from shapely.geometry import Point, Polygon

    obstacles = []
    for _ in range(int(rng.integers(0, max_obstacles + 1))):
        for _try in range(50):
            c = rng.uniform(-half + 2, half - 2, 2)
            if rng.random() < 0.5:
                w, h = rng.uniform(0.5, 3.0, 2)
                poly = [[c[0] - w, c[1] - h], [c[0] + w, c[1] - h], [c[0] + w, c[1] + h], [c[0] - w, c[1] + h]]
            else:
                ang = np.sort(rng.uniform(0, 2 * np.pi, 3))
                r = rng.uniform(1.0, 3.0, 3)
                poly = (c + np.column_stack([r * np.cos(ang), r * np.sin(ang)])).tolist()
            shp = Polygon(poly)
            if shp.area < 0.2 or shp.buffer(0.3).intersects(Point(0, 0)):
                continue
            if any(shp.buffer(0.1).intersects(Polygon(o)) for o in obstacles):
                continue
            obstacles.append(poly)
            break
    return Environment((-half, -half, half, half), tuple(obstacles), (0, 0))


CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Report one acceptance criterion as a PASS/FAIL line, then assert it."""

    def report(number: int, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        CRITERIA.append(line)
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)
