import math

import numpy as np
import pytest

from sandtable.analytic import (P, THETA_SWITCH, error_report, exact_rolling, exact_standing,
                                exclusion_mask, l_theta)
from sandtable.errors import GridMismatchError, PreconditionError, SingularityError
from sandtable.grid import Grid, ScalarField
from sandtable.geometry import Rectangle


@pytest.mark.parametrize("x,expected", [
    ((0.25, 0.7), 0.7), ((0.5, 0.3), 0.3), ((1.0, 1.0), math.sqrt(1.25)),
])
def test_exact_standing(x, expected):
    assert exact_standing(x) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("theta,expected", [
    (0.0, 0.5), (math.pi / 2, 1.0), (THETA_SWITCH, 0.5 * math.sqrt(5)),
])
def test_l_theta(theta, expected):
    assert l_theta(theta) == pytest.approx(expected, abs=1e-12)


def test_l_theta_branches_agree_at_switch():
    below = l_theta(THETA_SWITCH - 1e-12)
    above = l_theta(THETA_SWITCH + 1e-12)
    assert below == pytest.approx(above, abs=1e-9)


def test_l_theta_domain():
    with pytest.raises(PreconditionError):
        l_theta(-0.1)
    with pytest.raises(PreconditionError):
        l_theta(2.0)


def test_exact_rolling():
    assert exact_rolling((0.25, 0.5)) == pytest.approx(0.5)
    assert exact_rolling((0.75, 0.0)) == pytest.approx(0.375)
    right = exact_rolling((0.5 + 1e-9, 0.5))
    assert right == pytest.approx(0.75, abs=1e-6)
    assert right - exact_rolling((0.5, 0.5)) == pytest.approx(0.25, abs=1e-6)
    with pytest.raises(SingularityError):
        exact_rolling(P)


def test_exact_rolling_vectorised():
    pts = np.array([[0.25, 0.5], [0.75, 0.0], [0.9, 0.9]])
    out = exact_rolling(pts)
    assert out.shape == (3,)
    assert out[:2] == pytest.approx([0.5, 0.375])


def test_exclusion_mask():
    g = Grid.nodes(Rectangle(0, 0, 1, 1), 1 / 20)
    m = exclusion_mask(g, 0.05)
    assert m[g.index_of(0.5, 0.0)] and not m[g.index_of(0.5, 0.05)]
    mb = exclusion_mask(g, 0.05, band=0.06)
    assert mb[g.index_of(0.5, 0.9)] and not mb[g.index_of(0.6, 0.9)]


def test_error_report_zero_and_shift():
    dom = Rectangle(0, 0, 1, 1)
    g = Grid.cells(dom, 1 / 16)
    pts, _ = g.sample_points(dom)
    ex = exclusion_mask(g, 0.05)
    vals = np.zeros(g.shape)
    vals[~ex] = exact_rolling(pts[~ex.ravel()])  # excluded samples never enter the norms
    field = ScalarField(g, vals)
    rep = error_report(field, exact_rolling, ex, dom)
    assert rep.l1 == rep.l2 == rep.linf == 0.0
    shifted = ScalarField(g, field.values + 0.01)
    rep = error_report(shifted, exact_rolling, ex, dom)
    assert rep.linf == pytest.approx(0.01)
    assert set(rep.as_row()) == {"l1", "l2", "linf", "rel_l1", "rel_l2", "rel_linf"}


def test_error_report_errors():
    dom = Rectangle(0, 0, 1, 1)
    g = Grid.cells(dom, 0.25)
    f = ScalarField(g, np.zeros(g.shape))
    with pytest.raises(PreconditionError):
        error_report(f, exact_standing, np.ones(g.shape, dtype=bool), dom)
    with pytest.raises(GridMismatchError):
        error_report(f, ScalarField(Grid.cells(dom, 0.5), np.zeros((2, 2))), None, dom)
