import numpy as np
import pytest

from siqm.grid import Grid, GridFunction, derivative, trapezoid


def test_grid_spacing():
    g = Grid.from_spacing(-1.0, 1.0, 0.01)
    assert g.n == 201
    assert g.dx == pytest.approx(0.01)
    assert g.x[-1] == pytest.approx(1.0)


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        Grid(1.0, 0.0, 10)
    with pytest.raises(ValueError):
        Grid(0.0, 1.0, 2)


def test_gridfunction_rejects_nonuniform_and_nonfinite():
    with pytest.raises(ValueError):
        GridFunction.from_samples([0.0, 0.1, 0.3, 0.4], [1, 2, 3, 4])
    with pytest.raises(ValueError):
        GridFunction.on(Grid(0, 1, 4), [1, np.nan, 2, 3])


def test_trapezoid_and_derivative():
    g = Grid(0.0, np.pi, 2001)
    assert trapezoid(np.sin(g.x), g.dx) == pytest.approx(2.0, abs=1e-6)
    d = derivative(np.sin(g.x), g.dx)
    np.testing.assert_allclose(d, np.cos(g.x), atol=1e-10)


def test_derivative_fourth_order():
    errs = []
    for n in (201, 401):
        g = Grid(0.0, 2.0, n)
        errs.append(np.max(np.abs(derivative(np.exp(g.x), g.dx) - np.exp(g.x))))
    assert errs[0] / errs[1] > 12
