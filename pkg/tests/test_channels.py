"""Spherical and planar channel model tests.

The oracles here recompute entries with scalar math straight from the
free-space formula sqrt(1/(4 pi d^2)) exp(-j 2 pi d / lambda) rather than
reusing the vectorized library paths.
"""

import cmath
import math

import numpy as np
import pytest
from scipy.spatial.distance import cdist

from omnibeam.channels import (
    AreaDescriptor,
    area_equivalent_channel,
    bs_ios_channel,
    far_area,
    far_field_link,
    far_field_user_channel,
    mirror_area,
    near_area,
    near_field_user_channel,
    pairwise_distances,
    spherical_entries,
    steering_vector_upa,
)
from omnibeam.geometry import (
    FieldRegion,
    Point3,
    SceneLayout,
    Side,
    element_positions,
    half_wavelength_array,
    mirror_point,
    rayleigh_distance,
    unit_direction,
)

LAM = 299792458.0 / 26e9


def entry_oracle(d, lam):
    return math.sqrt(1.0 / (4.0 * math.pi * d * d)) * cmath.exp(-2j * math.pi * d / lam)


def test_pairwise_distances_against_cdist():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((7, 3))
    b = rng.standard_normal((5, 3))
    assert np.allclose(pairwise_distances(a, b), cdist(a, b), atol=1e-12)


def test_spherical_entries_formula():
    rng = np.random.default_rng(4)
    d = rng.uniform(0.05, 3.0, size=(3, 4))
    h = spherical_entries(d, LAM)
    for i in range(3):
        for j in range(4):
            assert h[i, j] == pytest.approx(entry_oracle(d[i, j], LAM), rel=1e-12)


def test_spherical_entries_validation():
    with pytest.raises(ValueError):
        spherical_entries(np.array([[1.0, 0.0]]), LAM)
    with pytest.raises(ValueError):
        spherical_entries(np.array([[1.0]]), 0.0)


def test_bs_ios_channel_spot_entry():
    ios = half_wavelength_array(8, 8, LAM)
    bs = half_wavelength_array(8, 1, LAM, origin=Point3(0.0, 0.02, 0.0))
    h = bs_ios_channel(SceneLayout(bs, ios, ()), LAM)
    assert h.shape == (64, 8)
    d = np.linalg.norm(element_positions(ios)[10] - element_positions(bs)[3])
    assert h[10, 3] == pytest.approx(entry_oracle(d, LAM), rel=1e-12)


def test_near_field_user_channel_entries():
    ios = half_wavelength_array(4, 4, LAM)
    user = half_wavelength_array(2, 1, LAM, origin=Point3(0.05, -0.2, 0.01))
    h = near_field_user_channel(user, ios, LAM)
    assert h.shape == (2, 16)
    up = element_positions(user)
    sp = element_positions(ios)
    d = np.linalg.norm(up[1] - sp[7])
    assert h[1, 7] == pytest.approx(entry_oracle(d, LAM), rel=1e-12)


def test_steering_vector_broadside_and_magnitude():
    s = steering_vector_upa(0.0, 0.0, (4, 2), (LAM / 2, LAM / 2), LAM)
    assert np.allclose(s, np.ones(8))
    rng = np.random.default_rng(6)
    for _ in range(50):
        s = steering_vector_upa(rng.uniform(-1.2, 1.2), rng.uniform(-1.5, 1.5),
                                (8, 8), (LAM / 2, LAM / 2), LAM)
        assert np.allclose(np.abs(s), 1.0)
        # centred indexing: phases sum to zero, so the product is unity
        assert np.prod(s) == pytest.approx(1.0, abs=1e-9)


def test_steering_matches_element_positions():
    """The planar vector is exp(-j 2 pi pos.u / lambda) for centred layouts.

    This is the alignment that lets planar rows mix with spherical rows in
    one synthesis stack without direction-dependent global phases.
    """
    arr = half_wavelength_array(5, 3, LAM)
    pos = element_positions(arr)
    rng = np.random.default_rng(8)
    for _ in range(25):
        theta = rng.uniform(-1.3, 1.3)
        psi = rng.uniform(-math.pi, math.pi)
        u = unit_direction(theta, psi)
        direct = np.exp(-2j * np.pi * (pos @ u) / LAM)
        s = steering_vector_upa(theta, psi, (5, 3), (LAM / 2, LAM / 2), LAM)
        assert np.allclose(s, direct, atol=1e-10)


def test_steering_validation():
    with pytest.raises(ValueError):
        steering_vector_upa(0.0, 0.0, (0, 1), (0.1, 0.1), LAM)
    with pytest.raises(ValueError):
        steering_vector_upa(0.0, 0.0, (2, 2), (0.1, 0.1), 0.0)


def test_far_field_link_geometry():
    surf = half_wavelength_array(8, 8, LAM)
    user_angles, surf_angles, dist = far_field_link(Point3(0.0, 2.0, 0.0), surf)
    assert dist == pytest.approx(2.0)
    assert user_angles == (pytest.approx(0.0), pytest.approx(0.0))
    # seen from the user the surface sits in the -y direction
    assert surf_angles[0] == pytest.approx(0.0)
    assert abs(surf_angles[1]) == pytest.approx(math.pi)
    with pytest.raises(ValueError):
        far_field_link(Point3(0.0, 0.0, 0.0), surf)


def test_far_field_channel_is_rank_one():
    surf = half_wavelength_array(8, 8, LAM)
    user = half_wavelength_array(2, 1, LAM, origin=Point3(0.4, 1.9, 0.1))
    ua, sa, dist = far_field_link(Point3(0.4, 1.9, 0.1), surf)
    h = far_field_user_channel(ua, sa, dist, user, surf, LAM)
    assert h.shape == (2, 64)
    assert np.linalg.matrix_rank(h) == 1
    assert np.allclose(np.abs(h), 1.0 / math.sqrt(4 * math.pi) / dist)


def test_planar_model_approaches_spherical():
    """Far beyond the Rayleigh distance the two constructions agree.

    The planar model drops the centre-to-centre propagation phase, so the
    comparison restores it before differencing.
    """
    surf = half_wavelength_array(8, 8, LAM)
    boundary = rayleigh_distance(surf.diagonal, LAM)
    center = Point3.from_array(60.0 * boundary * unit_direction(0.1, 0.5))
    user = half_wavelength_array(2, 1, LAM, origin=center)
    exact = near_field_user_channel(user, surf, LAM)
    ua, sa, dist = far_field_link(center, surf)
    planar = far_field_user_channel(ua, sa, dist, user, surf, LAM)
    planar = planar * cmath.exp(-2j * math.pi * dist / LAM)
    phase_err = np.abs(np.angle(exact / planar))
    mag_err = np.abs(np.abs(exact) / np.abs(planar) - 1.0)
    assert phase_err.max() < 0.01
    assert mag_err.max() < 0.005


def test_area_descriptor_validation():
    with pytest.raises(ValueError):
        near_area(0, Point3(0.0, 0.5, 0.0))
    with pytest.raises(ValueError):
        far_area(1, 0.0, 0.3, -1.0)
    with pytest.raises(ValueError):  # side label contradicting the half-space
        AreaDescriptor(1, Side.REFRACTIVE, FieldRegion.FAR,
                       theta=0.0, psi=0.3, distance=1.0)
    with pytest.raises(ValueError):  # far area missing its direction
        AreaDescriptor(1, Side.REFLECTIVE, FieldRegion.FAR, distance=1.0)
    with pytest.raises(ValueError):  # near area missing its point
        AreaDescriptor(1, Side.REFLECTIVE, FieldRegion.NEAR)
    a = far_area(2, 0.1, -0.4, 2.0)
    assert a.side is Side.REFLECTIVE
    b = near_area(3, Point3(0.1, -0.2, 0.0))
    assert b.side is Side.REFRACTIVE and b.region is FieldRegion.NEAR


def test_area_position():
    a = far_area(1, 0.0, 0.0, 2.0)
    assert np.allclose(a.position.as_array(), [0.0, 2.0, 0.0])
    p = Point3(0.1, 0.3, -0.2)
    assert near_area(1, p).position == p


def test_mirror_area_roundtrip():
    n = near_area(4, Point3(0.2, 0.3, 0.1))
    m = mirror_area(n)
    assert m.point == mirror_point(n.point) and m.index == 4
    assert mirror_area(m, index=9).index == 9
    f = far_area(1, 0.2, 0.7, 1.5)
    fm = mirror_area(f)
    assert fm.side is Side.REFRACTIVE
    assert math.sin(fm.psi) == pytest.approx(math.sin(f.psi))
    assert math.cos(fm.psi) == pytest.approx(-math.cos(f.psi))


def test_area_channel_near_branch():
    surf = half_wavelength_array(8, 8, LAM)
    pt = Point3(0.03, 0.11, -0.02)
    row = area_equivalent_channel(near_area(1, pt), surf, LAM)
    d = np.linalg.norm(element_positions(surf) - pt.as_array(), axis=1)
    for l in (0, 17, 63):
        assert row[l] == pytest.approx(entry_oracle(d[l], LAM), rel=1e-12)


def test_area_channel_branches_agree_in_overlap():
    # a far-field area evaluated as its concrete point: the planar branch
    # keeps the reference-distance phase so the rows line up directly
    surf = half_wavelength_array(8, 8, LAM)
    boundary = rayleigh_distance(surf.diagonal, LAM)
    fa = far_area(1, 0.05, -0.3, 55.0 * boundary)
    row_far = area_equivalent_channel(fa, surf, LAM)
    row_near = area_equivalent_channel(near_area(1, fa.position), surf, LAM)
    assert np.allclose(row_far, row_near, rtol=0.02, atol=0.0)


def test_mirror_twin_rows_identical():
    """Mirror-image areas have the same surface channel row.

    Element distances depend on y only through y^2 for near points, and a
    mirrored arrival direction keeps sin(psi); this degeneracy is why
    codeword synthesis must run on a single side of a mirrored grid.
    """
    surf = half_wavelength_array(8, 8, LAM)
    rng = np.random.default_rng(12)
    for _ in range(20):
        pt = Point3(rng.uniform(-0.3, 0.3), rng.uniform(0.05, 0.5),
                    rng.uniform(-0.3, 0.3))
        a = near_area(1, pt)
        assert np.array_equal(area_equivalent_channel(a, surf, LAM),
                              area_equivalent_channel(mirror_area(a), surf, LAM))
    for _ in range(20):
        fa = far_area(1, rng.uniform(-0.5, 0.5), rng.uniform(-1.2, 1.2), 2.0)
        assert np.allclose(area_equivalent_channel(fa, surf, LAM),
                           area_equivalent_channel(mirror_area(fa), surf, LAM),
                           rtol=1e-12)
