import pytest

from orbitlab import linalg
from orbitlab.mapspace import FloorMapSeed, build_translate_space
from orbitlab.morphisms import (
    check_equivariance,
    check_inverse_equivariance,
    check_inverse_identities,
    compose_morphisms,
    identity_morphism,
    matrix_morphism,
    odometer_translation_system,
    orbit_morphism,
)
from orbitlab.odometer import OdometerSpace
from orbitlab.shears import bounded_distance_constant, realize_bilipschitz

SHEAR = [[1, 1], [0, 1]]
ROTATION = [[0, -1], [1, 0]]


@pytest.fixture(scope="module")
def odometer_points():
    space = OdometerSpace((3, 3), 4)
    return space, [space.zero(), space.point_from_values((5, 77)), space.point_from_values((40, 2))]


@pytest.fixture(scope="module")
def shear_orbit():
    f = realize_bilipschitz([["1", "0.5"], ["0", "1"]])
    cert = bounded_distance_constant(f, f.target, 50)
    space = build_translate_space(FloorMapSeed(f), 6, 4, offset_radius=0)
    return orbit_morphism(space, radius=2, constant=cert.exact_constant)


class TestMatrixMorphism:
    def test_equivariance(self, odometer_points):
        space, points = odometer_points
        eta = matrix_morphism(SHEAR, space, points)
        assert check_equivariance(eta, 3).passed

    def test_inverse_identities_exact(self, odometer_points):
        space, points = odometer_points
        eta = matrix_morphism(SHEAR, space, points)
        result = check_inverse_identities(eta, eta.inverse(), 3)
        assert result.passed

    def test_inverse_equivariance(self, odometer_points):
        space, points = odometer_points
        eta = matrix_morphism(ROTATION, space, points)
        assert check_inverse_equivariance(eta, 3).passed

    def test_mismatched_inverse_fails(self, odometer_points):
        # pairing the shear with the rotation's inverse must produce witnesses
        space, points = odometer_points
        eta = matrix_morphism(SHEAR, space, points)
        other = matrix_morphism(ROTATION, space, points)
        result = check_inverse_identities(eta, other.inverse(), 3)
        assert not result.passed
        assert result.witnesses


class TestOrbitMorphism:
    def test_equivariance(self, shear_orbit):
        assert check_equivariance(shear_orbit, 2).passed

    def test_inverse_identities(self, shear_orbit):
        result = check_inverse_identities(shear_orbit, shear_orbit.inverse(), 2)
        assert result.passed
        assert result.checked > 0

    def test_inverse_equivariance(self, shear_orbit):
        assert check_inverse_equivariance(shear_orbit, 2).passed

    def test_composition_with_inverse_is_trivial(self, shear_orbit):
        roundtrip = compose_morphisms(shear_orbit.inverse(), shear_orbit)
        gens = roundtrip.cocycle.source_gens
        for x in roundtrip.source.points:
            for g in gens.ball(2):
                assert roundtrip.evaluate(g, x) == g


class TestComposition:
    def test_identity_is_neutral(self, odometer_points):
        space, points = odometer_points
        eta = matrix_morphism(SHEAR, space, points)
        ident = identity_morphism(odometer_translation_system(space, points))
        ident.source.key = eta.source.key
        ident.target.key = eta.source.key
        composed = compose_morphisms(eta, ident)
        gens = composed.cocycle.source_gens
        for g in gens.ball(2):
            for x in points:
                assert composed.evaluate(g, x) == eta.evaluate(g, x)

    def test_constant_cocycles_compose_to_product(self, odometer_points):
        space, points = odometer_points
        eta = matrix_morphism(ROTATION, space, points)
        theta = matrix_morphism(SHEAR, space, points)
        composed = compose_morphisms(eta, theta)
        product = linalg.mat_mul(linalg.as_matrix(ROTATION), linalg.as_matrix(SHEAR))
        gens = composed.cocycle.source_gens
        group = gens.group
        for g in gens.ball(2):
            expected = group.element(int(v) for v in linalg.mat_vec(product, g.coords))
            for x in points:
                assert composed.evaluate(g, x) == expected

    def test_seed_composition_for_distinct_slices(self):
        fa = realize_bilipschitz([["1", "0.5"], ["0", "1"]])
        fb = realize_bilipschitz([["1", "0"], ["0.25", "1"]])
        eta = _orbit_of(fb)
        theta = _orbit_of(fa)
        composed = compose_morphisms(eta, theta)
        assert composed.kind == "composed-seed"
        expected = linalg.mat_mul(fb.target, fa.target)
        assert composed.meta["space"].seed.floor_map.target == expected

    def test_unrelated_systems_rejected(self, odometer_points, shear_orbit):
        space, points = odometer_points
        eta = matrix_morphism(SHEAR, space, points)
        with pytest.raises(ValueError, match="compose"):
            compose_morphisms(eta, shear_orbit)


def _orbit_of(floor_map):
    cert = bounded_distance_constant(floor_map, floor_map.target, 25)
    space = build_translate_space(FloorMapSeed(floor_map), 2, 2, offset_radius=0)
    return orbit_morphism(space, radius=2, constant=cert.exact_constant)
