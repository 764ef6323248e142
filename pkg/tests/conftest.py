import pytest

from deeprnmt.autodiff import set_precision


@pytest.fixture(autouse=True)
def double_precision():
    set_precision(64)
    yield
    set_precision(64)
