import pytest

from grsham import circle_orbit, sphere_orbit, warped_orbit


@pytest.fixture(scope="session")
def sphere4():
    return sphere_orbit(4)


@pytest.fixture(scope="session")
def circle():
    return circle_orbit()


@pytest.fixture(scope="session")
def warped22():
    return warped_orbit(2, 2)


@pytest.fixture(scope="session")
def warped33():
    return warped_orbit(3, 3)


@pytest.fixture(scope="session")
def test_orbits(sphere4, circle, warped22):
    return [sphere4, circle, warped22]
