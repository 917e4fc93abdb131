import numpy as np
import pytest

from ahlfors_green import geometry as geo
from ahlfors_green.green import GreenAssembly, default_base_point
from ahlfors_green.harmonic import harmonic_frame

Q = 0.5


@pytest.fixture(scope="session")
def disc128():
    return geo.discretize(geo.disc(), 128)


@pytest.fixture(scope="session")
def ann128():
    return geo.discretize(geo.annulus(Q), 128)


@pytest.fixture(scope="session")
def ann256():
    return geo.discretize(geo.annulus(Q), 256)


@pytest.fixture(scope="session")
def three256():
    return geo.discretize(geo.two_hole_disc(), 256)


@pytest.fixture(scope="session")
def ann_frame(ann256):
    return harmonic_frame(ann256)


@pytest.fixture(scope="session")
def three_frame(three256):
    return harmonic_frame(three256)


@pytest.fixture(scope="session")
def ann_asm(ann256, ann_frame):
    """Annulus assembly at w = 0.75 with the Ahlfors base point 0.72."""
    return GreenAssembly(ann256, 0.75, frame=ann_frame, a=0.72)


@pytest.fixture(scope="session")
def three_asm(three256, three_frame):
    return GreenAssembly(three256, -0.1 + 0.6j, frame=three_frame,
                         a=default_base_point(three256))


@pytest.fixture(scope="session")
def disc_asm(disc128):
    return GreenAssembly(disc128, 0.3, a=0.0)


def polar_probes(r, count=8, phase=0.3):
    return r * np.exp(1j * (phase + 2 * np.pi * np.arange(count) / count))
