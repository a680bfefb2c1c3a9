import numpy as np
import pytest
from numpy.testing import assert_allclose

from schubert.exceptions import DegenerateFlagsError, PatchMissError, PreconditionError
from schubert.models.schubert_types import Bracket, SchubertInstance, SchubertProblem
from schubert.services.combinatorics import codimension, point_bracket
from schubert.services.geometry import (
    build_patch,
    check_general_position,
    check_incidence,
    embed_point,
    flag_through_plane,
    flags_in_general_position,
    incidence_residuals,
    max_incidence_residual,
    normalize_instance,
    opposite_flag,
    pad_instances,
    patch_coordinates,
    plane_distance,
    random_instance,
    standard_flag,
)


def test_standard_and_opposite_flags():
    assert np.array_equal(standard_flag(3), np.eye(3))
    assert np.array_equal(opposite_flag(3)[:, 0], [0, 0, 1])
    assert flags_in_general_position(standard_flag(5), opposite_flag(5))
    assert not flags_in_general_position(standard_flag(5), standard_flag(5))


def test_random_instance_sorts_conditions(rng):
    problem = SchubertProblem.from_brackets(3, 6, [(3, 5, 6)] * 7 + [(2, 5, 6)])
    instance = random_instance(problem, rng)
    assert [codimension(b) for b in instance.brackets] == [2] + [1] * 7
    assert all(f.shape == (6, 6) for f in instance.flags)


class TestIncidence:
    def test_fitted_flags_are_satisfied(self, rng):
        plane = rng.complex_normal((4, 2))
        bracket = Bracket((2, 4), 4)
        pairs = [(bracket, flag_through_plane(bracket, plane, rng)) for _ in range(4)]
        instance = SchubertInstance(2, 4, pairs)
        assert check_incidence(plane, instance)
        assert max_incidence_residual(plane, instance) < 1e-12

    def test_generic_plane_fails(self, four_lines_instance, rng):
        plane = rng.complex_normal((4, 2))
        residuals = incidence_residuals(plane, four_lines_instance)
        assert len(residuals) == 4
        assert not check_incidence(plane, four_lines_instance)

    def test_rank_deficient_plane(self, four_lines_instance):
        plane = np.zeros((4, 2), dtype=complex)
        plane[0, 0] = plane[0, 1] = 1.0
        assert max_incidence_residual(plane, four_lines_instance) == float("inf")

    def test_invariant_under_change_of_basis(self, rng):
        plane = rng.complex_normal((6, 3))
        brackets = [Bracket((3, 5, 6), 6), Bracket((2, 5, 6), 6), Bracket((1, 4, 6), 6)]
        instance = SchubertInstance(3, 6, [(b, flag_through_plane(b, plane, rng)) for b in brackets])
        assert check_incidence(plane @ rng.complex_normal((3, 3)), instance)
        # an upper triangular U keeps every span F_j, so the flag is the same
        moved = instance.with_flags([f @ np.triu(rng.complex_normal((6, 6))) for f in instance.flags])
        assert check_incidence(plane, moved)
        generic = rng.complex_normal((6, 3))
        assert not check_incidence(generic, instance)
        assert not check_incidence(generic @ rng.complex_normal((3, 3)), moved)

    def test_perturbed_solution_fails(self, rng):
        plane = rng.complex_normal((4, 2))
        bracket = Bracket((2, 4), 4)
        instance = SchubertInstance(2, 4, [(bracket, flag_through_plane(bracket, plane, rng)) for _ in range(4)])
        moved = plane.copy()
        moved[0, 0] += 1e-2
        assert not check_incidence(moved, instance)


class TestNormalization:
    def test_first_two_flags_become_standard_and_opposite(self, four_lines_instance):
        normalized, g = normalize_instance(four_lines_instance)
        assert np.array_equal(normalized.flags[0], standard_flag(4))
        assert np.array_equal(normalized.flags[1], opposite_flag(4))
        moved_first = g @ four_lines_instance.flags[0]
        moved_second = g @ four_lines_instance.flags[1]
        # g F1 is upper triangular, g F2 is the opposite flag times an upper triangular matrix
        assert_allclose(np.tril(moved_first, -1), 0.0, atol=1e-9)
        assert_allclose(np.tril(moved_second[::-1, :], -1), 0.0, atol=1e-9)

    def test_solutions_move_with_g(self, rng):
        plane = rng.complex_normal((4, 2))
        bracket = Bracket((2, 4), 4)
        instance = SchubertInstance(2, 4, [(bracket, flag_through_plane(bracket, plane, rng)) for _ in range(4)])
        normalized, g = normalize_instance(instance)
        assert check_incidence(g @ plane, normalized)

    def test_degenerate_pair_is_rejected(self, rng):
        flag = rng.complex_normal((4, 4))
        instance = SchubertInstance(2, 4, [(Bracket((2, 4), 4), flag)] * 4)
        with pytest.raises(DegenerateFlagsError) as e:
            normalize_instance(instance)
        assert e.value.conditions == (0, 1)
        with pytest.raises(DegenerateFlagsError):
            check_general_position(instance)

    def test_padding(self, rng):
        problem = SchubertProblem(2, 4, (point_bracket(2, 4),))
        instance = random_instance(problem, rng)
        first, second = pad_instances([instance, instance], rng)
        assert len(first.pairs) == 2
        assert np.array_equal(first.flags[1], second.flags[1])
        assert pad_instances([first], rng)[0] is first


class TestPatches:
    def test_dimensions(self):
        assert build_patch(Bracket((3, 5, 6), 6), Bracket((3, 5, 6), 6)).dimension == 7
        assert build_patch(Bracket((2, 4), 4), Bracket((2, 4), 4)).dimension == 2
        assert build_patch(Bracket((3, 5, 7, 8), 8), Bracket((3, 5, 7, 8), 8)).dimension == 10
        assert build_patch(Bracket((1, 2), 4), Bracket((3, 4), 4)).dimension == 0
        with pytest.raises(PreconditionError):
            build_patch(Bracket((1, 2), 4), Bracket((1, 2), 4))

    def test_patch_points_satisfy_the_absorbed_conditions(self, rng):
        a, b = Bracket((3, 5, 6), 6), Bracket((3, 5, 6), 6)
        patch = build_patch(a, b)
        instance = SchubertInstance(3, 6, [(a, standard_flag(6)), (b, opposite_flag(6))])
        for _ in range(5):
            plane = embed_point(patch, rng.complex_normal(patch.dimension))
            assert check_incidence(plane, instance)

    def test_coordinates_invert_embedding(self, rng):
        patch = build_patch(Bracket((2, 4, 6), 6), Bracket((3, 5, 6), 6))
        x = rng.complex_normal(patch.dimension)
        plane = embed_point(patch, x) @ rng.complex_normal((3, 3))
        assert_allclose(patch_coordinates(patch, plane), x, atol=1e-9)

    def test_plane_off_the_patch(self, rng):
        patch = build_patch(Bracket((2, 4), 4), Bracket((2, 4), 4))
        with pytest.raises(PatchMissError):
            patch_coordinates(patch, rng.complex_normal((4, 2)))


def test_plane_distance(rng):
    plane = rng.complex_normal((5, 2))
    assert plane_distance(plane, plane @ rng.complex_normal((2, 2))) < 1e-10
    assert plane_distance(plane, rng.complex_normal((5, 2))) > 1e-3


def test_plane_distance_resolves_identical_spans(rng):
    for _ in range(200):
        plane = rng.complex_normal((4, 2))
        assert plane_distance(plane, plane) < 1e-12
        assert plane_distance(plane, plane @ rng.complex_normal((2, 2))) < 1e-12


def test_plane_distance_of_orthogonal_spans():
    first = np.eye(4)[:, :2]
    second = np.eye(4)[:, 2:]
    assert abs(plane_distance(first, second) - 1.0) < 1e-14
    tilted = np.array([[1.0, 0.0], [0.0, 1.0], [1e-5, 0.0], [0.0, 0.0]])
    assert abs(plane_distance(first, tilted) - 1e-5) < 1e-12
