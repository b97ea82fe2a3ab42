import math
from dataclasses import replace

import numpy as np
import pytest

from errors import DomainError, NumericError
from halfplane import (IDENTITY, GeodesicDiskGrid, GroupElement, HaarQuadratureSpec, HalfPlaneGrid,
                       PointH, VerticalRegion, affine_embed, batch_compose, batch_inverse,
                       canonicalize, cayley, compose, element_entries, geodesic_frame,
                       haar_integrate, hyperbolic_barycenter, hyperbolic_distance,
                       hyperbolic_integrate, inverse, mobius_apply, mobius_array, nak_assemble,
                       nak_entries, nak_factor, plane_integrate, rotation)

S = GroupElement(0.0, -1.0, 1.0, 0.0)


def same_projective(entries, m, tol=1e-10):
    row = np.asarray(entries, dtype=float)
    return np.allclose(row, [m.a, m.b, m.c, m.d], atol=tol) or \
        np.allclose(-row, [m.a, m.b, m.c, m.d], atol=tol)


# ─── group elements ───────────────────────────────────────────────────────────
def test_mobius_examples():
    assert mobius_apply(IDENTITY, PointH(2, 3)).z == pytest.approx(2 + 3j)
    assert mobius_apply(affine_embed(2, 5), PointH(0, 1)).z == pytest.approx(5 + 2j)
    assert mobius_apply(S, PointH(0, 2)).z == pytest.approx(0.5j)
    assert mobius_apply(affine_embed(3, -1), PointH(0, 1)).z == pytest.approx(-1 + 3j)


def test_compose_inverse_and_sign_quotient():
    m = affine_embed(4.0, 2.0)
    assert compose(IDENTITY, m) == m
    inv = inverse(affine_embed(3.0, 2.0))
    assert (inv.a, inv.b) == pytest.approx((1 / math.sqrt(3), -2 / math.sqrt(3)))
    assert canonicalize(GroupElement(-1.0, 0.0, 0.0, -1.0)) == IDENTITY
    assert compose(S, S).isclose(IDENTITY)
    assert compose(m, inverse(m)).isclose(IDENTITY)


def test_affine_embed_entries():
    assert affine_embed(1.0, 0.0) == IDENTITY
    m = affine_embed(4.0, 2.0)
    assert (m.a, m.b, m.c, m.d) == pytest.approx((2.0, 1.0, 0.0, 0.5))
    with pytest.raises(DomainError):
        affine_embed(0.0, 1.0)


def test_rotation_fixes_i_and_has_period_pi():
    assert rotation(0.0) == IDENTITY
    assert mobius_apply(rotation(0.7), PointH(0, 1)).z == pytest.approx(1j)
    assert rotation(math.pi).isclose(IDENTITY)


@pytest.mark.parametrize("m, expected", [
    (IDENTITY, (1.0, 0.0, 0.0)),
    (rotation(0.3), (1.0, 0.0, 0.3)),
    (affine_embed(2.0, 1.0), (2.0, 1.0, 0.0)),
])
def test_nak_factor_examples(m, expected):
    coords = nak_factor(m)
    assert (coords.scale, coords.shift, coords.angle) == pytest.approx(expected, abs=1e-12)


def test_nak_factor_reassembles():
    rng = np.random.default_rng(7)
    for _ in range(20):
        a, b, c = rng.normal(size=3)
        d = (1.0 + b * c) / a
        m = GroupElement(a, b, c, d)
        assert nak_assemble(nak_factor(m)).isclose(m, tol=1e-9)


def test_invalid_elements_and_points():
    with pytest.raises(DomainError):
        GroupElement(1.0, 0.0, 0.0, -1.0)
    with pytest.raises(DomainError):
        GroupElement(float("nan"), 0.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        PointH(0.0, 0.0)


def random_elements(rng, count):
    return [compose(affine_embed(math.exp(rng.uniform(-2, 2)), rng.uniform(-3, 3)),
                    rotation(rng.uniform(0, math.pi))) for _ in range(count)]


def test_mobius_action_is_a_homomorphism():
    rng = np.random.default_rng(21)
    z = rng.uniform(-4, 4, 50) + 1j * np.exp(rng.uniform(-3, 3, 50))
    for m1, m2 in zip(random_elements(rng, 10), random_elements(rng, 10)):
        assert mobius_array(m1, mobius_array(m2, z)) == pytest.approx(
            mobius_array(compose(m1, m2), z), rel=1e-11)


def test_mobius_imaginary_part_and_jacobian():
    rng = np.random.default_rng(22)
    z = rng.uniform(-4, 4, 50) + 1j * np.exp(rng.uniform(-2, 2, 50))
    h = 1e-6
    for m in random_elements(rng, 10):
        moved = mobius_array(m, z)
        denom = np.abs(m.c * z + m.d) ** 2
        assert moved.imag == pytest.approx(z.imag / denom, rel=1e-12)
        # |dw/dz|^2 / Im(w)^2 = 1 / Im(z)^2: da db / a^2 is preserved
        slope = (mobius_array(m, z + h) - mobius_array(m, z - h)) / (2 * h)
        assert np.abs(slope) ** 2 / moved.imag ** 2 == pytest.approx(1.0 / z.imag ** 2, rel=1e-6)


# ─── batched entries ──────────────────────────────────────────────────────────
def test_batch_helpers_match_scalar_group_law():
    left = [rotation(0.2), affine_embed(2.0, -1.0), S]
    right = [affine_embed(0.5, 3.0), rotation(1.1)]
    product = batch_compose(element_entries(left), element_entries(right))
    assert product.shape == (6, 4)
    for k, (p, q) in enumerate((p, q) for p in left for q in right):
        assert same_projective(product[k], compose(p, q))
    for row, m in zip(batch_inverse(element_entries(left)), left):
        assert same_projective(row, inverse(m))


def test_nak_entries_match_assembled_elements():
    a = np.array([0.5, 2.0, 3.0])
    b = np.array([-1.0, 0.0, 4.0])
    th = np.array([0.0, 0.4, 2.5])
    for row, args in zip(nak_entries(a, b, th), zip(a, b, th)):
        m = compose(affine_embed(args[0], args[1]), rotation(args[2]))
        assert same_projective(row, m)


# ─── geometry ─────────────────────────────────────────────────────────────────
def test_distance_and_cayley():
    assert hyperbolic_distance(1j, 2j) == pytest.approx(math.log(2.0))
    assert complex(cayley(1j)) == pytest.approx(0.0)
    m = rotation(0.9) @ affine_embed(3.0, 1.0)
    z, w = 0.3 + 1.2j, -2.0 + 0.5j
    moved = [mobius_apply(m, PointH.from_complex(p)).z for p in (z, w)]
    assert hyperbolic_distance(*moved) == pytest.approx(hyperbolic_distance(z, w))


def test_barycenter_of_symmetric_pair():
    c = hyperbolic_barycenter([1j * math.e, 1j / math.e])
    assert c == pytest.approx(1j)
    assert hyperbolic_barycenter([2 + 3j]) == pytest.approx(2 + 3j)
    with pytest.raises(DomainError):
        hyperbolic_barycenter([])


def test_geodesic_frame_places_endpoints():
    z1, z2 = -1.0 + 0.5j, 2.0 + 3.0j
    g, dist = geodesic_frame(z1, z2)
    assert dist == pytest.approx(hyperbolic_distance(z1, z2))
    assert mobius_apply(g, PointH(0.0, math.exp(-dist / 2))).z == pytest.approx(z1)
    assert mobius_apply(g, PointH(0.0, math.exp(dist / 2))).z == pytest.approx(z2)


# ─── quadrature ───────────────────────────────────────────────────────────────
SMOOTH_SPEC = HaarQuadratureSpec(a_min=math.exp(-14.0), a_max=math.exp(4.0), n_a=181,
                                 half_width=8.0, n_b=161, shift_map="uniform", n_theta=4)


def smooth_density(a, b, th):
    # integrates to 1: int a^2 e^-a da/a^2 = 1, gaussian in b, cos 2 theta averages out
    return a ** 2 * np.exp(-a) * np.exp(-b ** 2) / math.sqrt(math.pi) * (1.0 + np.cos(2 * th))


def test_haar_integrate_zero_and_smooth_density():
    assert haar_integrate(lambda a, b, th: np.zeros_like(a), SMOOTH_SPEC, vectorized=True) == 0.0
    total = haar_integrate(smooth_density, SMOOTH_SPEC, vectorized=True)
    assert total == pytest.approx(1.0, abs=1e-5)


def test_haar_integrate_elementwise_matches_vectorized():
    spec = HaarQuadratureSpec(a_min=math.exp(-6.0), a_max=math.exp(3.0), n_a=19,
                              half_width=4.0, n_b=17, shift_map="uniform", n_theta=2)

    def per_element(m):
        c = nak_factor(m)
        return float(smooth_density(c.scale, c.shift, c.angle))

    assert haar_integrate(per_element, spec) == pytest.approx(
        haar_integrate(smooth_density, spec, vectorized=True), rel=1e-9)


def test_haar_integrate_reports_offending_node():
    spec = HaarQuadratureSpec(n_a=5, n_b=5, n_theta=2)
    with pytest.raises(NumericError) as info:
        haar_integrate(lambda a, b, th: np.where(a > 1.0, np.inf, 0.0), spec, vectorized=True)
    assert info.value.context["node"][0] > 1.0


def test_haar_integrate_indicator_box():
    # nodes sit half a step from every box edge, so the sums are midpoint rules
    spec = HaarQuadratureSpec(a_min=math.exp(-1.005), a_max=math.exp(1.005), n_a=202,
                              half_width=1.005, n_b=202, shift_map="uniform", n_theta=4)

    def box(a, b, th):
        return ((a >= 1.0) & (a <= math.e) & (b >= 0.0) & (b <= 1.0)).astype(float)

    assert haar_integrate(box, spec, vectorized=True) == pytest.approx(1 - 1 / math.e, abs=1e-5)


@pytest.mark.parametrize("g", [affine_embed(2.0, 0.5), compose(affine_embed(1.5, 0.3), rotation(0.25))])
def test_haar_integral_is_left_invariant(g):
    def bump(z):
        return z.imag ** 2 * np.exp(-z.imag - z.real ** 2) / math.sqrt(math.pi)

    plain = haar_integrate(lambda a, b, th: bump(b + 1j * a), SMOOTH_SPEC, vectorized=True)
    moved = haar_integrate(lambda a, b, th: bump(mobius_array(g, b + 1j * a)), SMOOTH_SPEC,
                           vectorized=True)
    assert plain == pytest.approx(1.0, abs=1e-5)
    assert moved == pytest.approx(plain, abs=1e-4)


def test_haar_integrate_shift_grid_doubling():
    doubled = replace(SMOOTH_SPEC, n_b=2 * SMOOTH_SPEC.n_b - 1)
    assert abs(haar_integrate(smooth_density, doubled, vectorized=True)
               - haar_integrate(smooth_density, SMOOTH_SPEC, vectorized=True)) < 1e-6


def test_plane_integrate_gaussian_profile():
    grid = HalfPlaneGrid(a_min=math.exp(-14.0), a_max=math.exp(4.0), n_a=181,
                         half_width=8.0, n_b=161, shift_map="uniform")
    value = plane_integrate(lambda z: z.imag ** 2 * np.exp(-z.imag - z.real ** 2), grid)
    assert value == pytest.approx(math.sqrt(math.pi), rel=1e-5)


@pytest.mark.parametrize("ceiling", [2.0, 10.0, 100.0])
def test_hyperbolic_integrate_box(ceiling):
    region = VerticalRegion(-0.5, 0.5, 1.0, ceiling)
    assert hyperbolic_integrate(lambda z: np.ones(z.shape), region) == pytest.approx(1 - 1 / ceiling)
    assert hyperbolic_integrate(lambda z: np.zeros(z.shape), region) == 0.0


def test_vertical_region_rejects_nonpositive_floor():
    region = VerticalRegion(-0.5, 0.5, lambda x: x, 10.0)
    with pytest.raises(DomainError):
        hyperbolic_integrate(lambda z: np.ones(z.shape), region)


# ─── geodesic disk grid ───────────────────────────────────────────────────────
def test_disk_grid_area_and_radial_profile():
    grid = GeodesicDiskGrid()
    z, w, r = grid.disk_nodes()
    R = grid.radius
    assert np.sum(w) == pytest.approx(2 * math.pi * (math.cosh(R) - 1), rel=1e-7)
    profile = np.cosh(hyperbolic_distance(z, 1j) / 2) ** -6
    assert np.sum(profile * w) == pytest.approx(2 * math.pi * (1 - math.cosh(R / 2) ** -4), rel=1e-7)
    assert hyperbolic_distance(z, 1j) == pytest.approx(r, abs=1e-9)


def test_disk_grid_rings_keep_arc_spacing():
    grid = GeodesicDiskGrid(radius=3.0, panels=3, nodes=2, arc_step=0.5)
    _, _, r = grid.disk_nodes()
    for radius in np.unique(r):
        count = int(np.sum(r == radius))
        assert count >= grid.min_angles
        assert 2 * math.pi * math.sinh(radius) / count <= grid.arc_step + 1e-12
    finer = grid.refined()
    assert (finer.panels, finer.arc_step) == (6, 0.25)
    with pytest.raises(DomainError):
        GeodesicDiskGrid(radius=0.0)
    with pytest.raises(DomainError):
        GeodesicDiskGrid(min_angles=1)
