import math

import numpy as np
import pytest

from sandtable import backend
from sandtable.analytic import exact_rolling
from sandtable.equilibrium import (MultiplierInput, cone_height, mass_identity,
                                   minimal_standing_layer, multiplier, offset_integral,
                                   offset_radius, transport_density_at, transport_density_field,
                                   weak_residual)
from sandtable.errors import (DomainError, EmptySupportError, PreconditionError,
                              SingularityError)
from sandtable.geometry import Disk, boundary_arcs, dist_gamma_field
from sandtable.grid import Grid, ScalarField
from sandtable.sources import Bump, BumpSource, ConstantSource


def test_cone_height(square):
    dom, gamma = square
    assert cone_height((0.25, 0.5), (0.25, 0.5), dom, gamma) == pytest.approx(0.5)
    assert cone_height((0.25, 0.5), (0.25, 0.2), dom, gamma) == pytest.approx(0.2)
    assert cone_height((0.25, 0.5), (0.9, 0.9), dom, gamma) == 0.0


def test_standing_layer_constant_source_is_distance(square, unit):
    g = Grid.nodes(square[0], 1 / 32)
    u = minimal_standing_layer(g, unit, *square)
    d = dist_gamma_field(g, *square)
    assert np.allclose(u.values, d.values, atol=1e-12)


def test_standing_layer_bumps(square):
    dom, gamma = square
    g = Grid.nodes(dom, 1 / 32)
    b1, b2 = Bump((0.25, 0.6), 0.05), Bump((0.75, 0.6), 0.05)
    u = minimal_standing_layer(g, BumpSource([b1, b2]), dom, gamma).values
    pts = g.points()
    supp = np.concatenate([p for p in (pts[b1.in_support(pts)], pts[b2.in_support(pts)])])
    dz = dist_gamma_field(g, dom, gamma).values.ravel()
    inside = (b1.in_support(pts) | b2.in_support(pts))
    brute = np.max(np.maximum(0.0, dz[inside][None, :] - np.hypot(
        pts[:, None, 0] - supp[None, :, 0], pts[:, None, 1] - supp[None, :, 1])), axis=1)
    assert np.allclose(u.ravel(), brute, atol=1e-12)
    u1 = minimal_standing_layer(g, BumpSource([b1]), dom, gamma).values
    assert np.all(u1 <= u + 1e-15)


def test_standing_layer_empty_support(square):
    g = Grid.nodes(square[0], 0.25)
    with pytest.raises(EmptySupportError):
        minimal_standing_layer(g, ConstantSource(0.0), *square)


def test_backends_agree_on_standing_layer(square):
    g = Grid.nodes(square[0], 1 / 16)
    f = BumpSource([Bump((0.6, 0.5), 0.2)])
    a = minimal_standing_layer(g, f, *square, kernels=backend.get("python"))
    b = minimal_standing_layer(g, f, *square, kernels=backend.get("cython"))
    assert np.array_equal(a.values, b.values)


@pytest.mark.parametrize("mi,t,expected", [
    (MultiplierInput(0.3, "interior", 0.0, 0.5), 0.0, 1.0),
    (MultiplierInput(0.25, "A", 0.0, 0.25), 0.25, 2.0),
    (MultiplierInput(0.5, "interior", 1.0, 0.5), 0.25, 0.5),
])
def test_multiplier_examples(mi, t, expected):
    assert multiplier(mi, t) == expected


def test_multiplier_errors():
    with pytest.raises(PreconditionError):
        multiplier(MultiplierInput(0.25, "A", 0.0, 0.25), 0.3)
    with pytest.raises(SingularityError):
        multiplier(MultiplierInput(0.0, "B", 0.0, 0.25), 0.1)
    with pytest.raises(PreconditionError):
        MultiplierInput(0.8, "interior", 1.0, 0.5)


def test_transport_density_points(square, disk, unit):
    assert transport_density_at((0.25, 0.5), unit, *square) == pytest.approx(0.5, abs=1e-12)
    assert transport_density_at((0.75, 0.0), unit, *square) == pytest.approx(0.375, abs=1e-12)
    assert transport_density_at((0.5, 0.0), unit, *disk) == pytest.approx(0.25, abs=1e-12)
    with pytest.raises(SingularityError):
        transport_density_at((0.5, 0.0), unit, *square)
    with pytest.raises(DomainError):
        transport_density_at((1.2, 0.5), unit, *square)


def test_transport_density_zero_source(square):
    g = Grid.nodes(square[0], 1 / 16)
    v = transport_density_field(g, ConstantSource(0.0), *square)
    assert np.all(np.nan_to_num(v.values) == 0.0)


def test_transport_density_jump_across_pq(square, unit):
    h = 1 / 64
    g = Grid.nodes(square[0], h)
    v = transport_density_field(g, unit, *square)
    assert v.at(0.5 - h, 0.5) == pytest.approx(0.5, abs=1e-9)
    right = exact_rolling((0.5 + h, 0.5))
    assert v.at(0.5 + h, 0.5) == pytest.approx(right, abs=1e-9)
    assert right - 0.5 == pytest.approx(0.25, abs=0.02)
    assert math.isnan(v.at(0.5, 0.0))


def test_transport_density_threads_identical(square, unit):
    g = Grid.cells(square[0], 1 / 32)
    a = transport_density_field(g, unit, *square, workers=1)
    b = transport_density_field(g, unit, *square, workers=3)
    assert np.array_equal(a.values, b.values)


def test_mass_identity_disk(disk, unit):
    g = Grid.cells(disk[0], 1 / 64)
    v = transport_density_field(g, unit, *disk)
    d = dist_gamma_field(g, *disk)
    m = mass_identity(v, unit, d, disk[0])
    assert m.integral_v == pytest.approx(math.pi / 3, rel=2e-3)
    assert m.residual < 2e-3


def test_mass_identity_zero_source(square):
    g = Grid.cells(square[0], 1 / 16)
    f = ConstantSource(0.0)
    v = transport_density_field(g, f, *square)
    d = dist_gamma_field(g, *square)
    with pytest.raises(PreconditionError):
        mass_identity(v, f, d, square[0])


def test_weak_residual_trivial_cases(square, unit):
    dom, gamma = square
    g = Grid.cells(dom, 1 / 32)
    v = transport_density_field(g, unit, dom, gamma)
    d = dist_gamma_field(g, dom, gamma)
    assert weak_residual(d, v, unit, Bump((0.5, 0.5), 0.1, amplitude=0.0), dom, gamma) == 0.0
    zero_v = ScalarField(g, np.zeros(g.shape))
    r = weak_residual(d, zero_v, ConstantSource(0.0), Bump((0.5, 0.5), 0.1), dom, gamma)
    assert r == 0.0


def test_weak_residual_small(square, unit):
    dom, gamma = square
    g = Grid.cells(dom, 1 / 64)
    v = transport_density_field(g, unit, dom, gamma)
    d = dist_gamma_field(g, dom, gamma)
    for phi in (Bump((0.25, 0.5), 0.15), Bump((0.8, 0.3), 0.1)):
        assert abs(weak_residual(d, v, unit, phi, dom, gamma)) < 1e-3
        assert abs(weak_residual(d, v, unit, phi, dom, gamma, du="central")) < 1e-3


def test_offset_integral_area(square, disk):
    dom, gamma = square
    one = lambda p: np.ones(p.shape[:-1])  # noqa: E731
    assert offset_integral(one, 0.01, dom, gamma, 1 / 128) == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(PreconditionError):
        offset_integral(one, 2 * offset_radius(dom, gamma), dom, gamma, 1 / 64)
    with pytest.raises(PreconditionError):
        offset_integral(one, 0.01, *disk, 1 / 64)


def test_standing_layer_is_distance_where_matter_rolls(square):
    # the cone apexes sit on lattice nodes, so agreement holds up to the sampling gap
    dom, gamma = square
    h = 1 / 32
    g = Grid.nodes(dom, h)
    f = BumpSource([Bump((0.3, 0.6), 0.15), Bump((0.75, 0.4), 0.1)])
    u = minimal_standing_layer(g, f, dom, gamma).values
    v = transport_density_field(g, f, dom, gamma).values
    d = dist_gamma_field(g, dom, gamma).values
    rolling = np.nan_to_num(v) > 1e-8 * f.max_value * dom.diam
    assert rolling.sum() > 20
    assert np.all(np.abs(u - d)[rolling] <= math.sqrt(2) * h)
    assert np.all(u <= d + 1e-12)
