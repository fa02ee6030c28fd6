import math

import pytest

from contact_hj.extgrid import Torus
from contact_hj.hamiltonians import catalog_get


@pytest.fixture
def torus128():
    return Torus(2.0 * math.pi, 128)


@pytest.fixture
def torus64():
    return Torus(2.0 * math.pi, 64)


@pytest.fixture
def ham():
    """Catalog lookup by name, default period."""
    return catalog_get
