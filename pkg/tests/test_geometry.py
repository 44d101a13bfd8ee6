import math

import numpy as np
import pytest

from sandtable.errors import DegenerateRayError, DomainError
from sandtable.geometry import (ENDPOINT, RIDGE, CircularArc, Disk, Rectangle, Segment,
                                boundary_arcs, curvature_at, dist_gamma_field,
                                extended_ridge_mask, label_name, project_gamma,
                                region_decomposition, transport_ray, validate_gamma)
from sandtable.grid import Grid


def test_projection_left_half(square):
    pr = project_gamma((0.25, 0.5), *square)
    assert pr.distance == pytest.approx(0.5)
    assert pr.regular and pr.points[0].kind == "interior"
    assert pr.points[0].y == pytest.approx((0.25, 0.0))


def test_projection_on_gamma(square):
    pr = project_gamma((0.3, 0.0), *square)
    assert pr.distance == 0.0
    assert pr.points[0].y == pytest.approx((0.3, 0.0))


def test_projection_onto_endpoint(square):
    pr = project_gamma((0.75, 0.5), *square)
    assert pr.distance == pytest.approx(math.sqrt(0.0625 + 0.25), abs=1e-12)
    assert pr.regular
    assert pr.points[0].y == pytest.approx((0.5, 0.0))
    assert pr.points[0].kind in ("A", "B")


def test_projection_outside_table(square):
    with pytest.raises(DomainError):
        project_gamma((1.5, 0.5), *square)


def test_distance_field_examples(square, disk):
    dom = Rectangle(0, 0, 1, 1)
    d = dist_gamma_field(Grid.nodes(dom, 0.25), dom, boundary_arcs(dom))
    assert d.at(0.5, 0.5) == pytest.approx(0.5)
    g = Grid.nodes(square[0], 1 / 16)
    d = dist_gamma_field(g, *square)
    for y in g.ys:
        assert d.at(0.25, y) == pytest.approx(y, abs=1e-14)
    gd = Grid.nodes(disk[0], 0.25)
    assert dist_gamma_field(gd, *disk).at(0.25, 0.0) == pytest.approx(0.75)


def test_distance_field_zero_on_gamma_and_lipschitz(square):
    g = Grid.nodes(square[0], 1 / 32)
    d = dist_gamma_field(g, *square).values
    i_end = g.index_of(0.5, 0.0)[0]
    assert np.all(d[: i_end + 1, 0] == 0.0)
    assert np.all(np.abs(np.diff(d, axis=0)) <= g.h + 1e-12)
    assert np.all(np.abs(np.diff(d, axis=1)) <= g.h + 1e-12)


def test_transport_ray_left(square):
    r = transport_ray((0.25, 0.3), *square)
    assert r.y == pytest.approx((0.25, 0.0))
    assert r.dir == pytest.approx((0.0, 1.0))
    assert r.l == pytest.approx(1.0, abs=1e-10)
    assert r.m == pytest.approx((0.25, 1.0), abs=1e-10)
    assert r.tau == pytest.approx(0.7, abs=1e-10)


def test_transport_ray_along_bottom(square):
    r = transport_ray((0.75, 0.0), *square)
    assert r.y == pytest.approx((0.5, 0.0))
    assert r.l == pytest.approx(0.5, abs=1e-10)
    assert r.m == pytest.approx((1.0, 0.0), abs=1e-10)
    assert r.tau == pytest.approx(0.25, abs=1e-10)


def test_transport_ray_disk(disk):
    r = transport_ray((0.5, 0.0), *disk)
    assert r.l == pytest.approx(1.0, abs=1e-10)
    assert r.m == pytest.approx((0.0, 0.0), abs=1e-9)
    assert r.tau == pytest.approx(0.5, abs=1e-10)


def test_transport_ray_degenerate(square):
    with pytest.raises(DegenerateRayError):
        transport_ray((0.2, 0.0), *square)


def test_ridge_examples(square):
    h = 1 / 64
    g = Grid.nodes(square[0], h)
    ridge = extended_ridge_mask(g, *square).values
    assert ridge[g.index_of(0.25, 1.0)]          # ray end on the north wall
    assert not ridge[g.index_of(0.25, 0.5)]
    dom = Rectangle(0, 0, 1, 1)
    g2 = Grid.nodes(dom, 0.1)
    assert extended_ridge_mask(g2, dom, boundary_arcs(dom)).values[g2.index_of(0.3, 0.3)]


def test_region_labels(square):
    g = Grid.nodes(square[0], 1 / 16)
    lab = region_decomposition(g, *square).values
    assert label_name(lab[g.index_of(0.25, 0.5)]) == "Omega_1^*"
    assert label_name(lab[g.index_of(0.75, 0.5)]) == "Omega_1^B"
    assert label_name(lab[g.index_of(0.25, 0.0)]) == "Omega_1^*"
    assert label_name(RIDGE) == "ridge"


def test_curvature(square):
    dom, gamma = square
    assert curvature_at((0.3, 0.0), gamma, dom) == 0.0
    assert curvature_at((0.5, 0.0), gamma, dom) is ENDPOINT
    big = Disk(0.0, 0.0, 2.0)
    assert curvature_at((0.0, 2.0), boundary_arcs(big), big) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        curvature_at((0.7, 0.0), gamma, dom)


def test_validate_gamma_rejects_off_boundary():
    dom = Rectangle(0, 0, 1, 1)
    with pytest.raises(DomainError):
        validate_gamma(dom, [Segment((0.0, 0.0), (0.5, 0.2))])
    with pytest.raises(DomainError):
        validate_gamma(Disk(0, 0, 1), [CircularArc(0, 0, 2.0)])
