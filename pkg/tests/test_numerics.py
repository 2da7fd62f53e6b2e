import math

import pytest

from phiqkd.numerics import BracketError, bisect, golden_section_max


def test_bisect_sqrt2():
    assert bisect(lambda x: x * x - 2, 0, 2) == pytest.approx(math.sqrt(2), abs=1e-12)


def test_bisect_requires_sign_change():
    with pytest.raises(BracketError):
        bisect(lambda x: x * x + 1, -1, 1)


def test_golden_interior_and_boundary():
    x, fx = golden_section_max(lambda x: -(x - 0.3) ** 2, 0, 1, xtol=1e-9)
    assert x == pytest.approx(0.3, abs=1e-7)
    x, _ = golden_section_max(lambda x: x, 0, 1)
    assert x == 1
    x, _ = golden_section_max(lambda x: -x, 0, 1)
    assert x == 0
