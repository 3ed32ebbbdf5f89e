import pytest

from qrepeater.acceptance import ALL


@pytest.mark.parametrize("criterion", ALL, ids=lambda f: f.__name__)
def test_criterion(criterion):
    result = criterion()
    print(result.line())
    assert result.passed, result.line()
