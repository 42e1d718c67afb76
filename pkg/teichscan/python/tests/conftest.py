import pytest

from teichscan.surface import build_flat_torus, build_slit_tori, build_square_tiled


@pytest.fixture
def unit_torus():
    return build_flat_torus(1.0, 1.0)


@pytest.fixture
def slit_tori():
    return build_slit_tori(0.1)


@pytest.fixture
def l_shape():
    # Squares 0 and 1 side by side, square 2 on top of square 0
    return build_square_tiled([1, 0, 2], [2, 1, 0])
