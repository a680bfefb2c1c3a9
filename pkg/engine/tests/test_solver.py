import numpy as np
import pytest

from schubert.exceptions import DegenerateFlagsError, PreconditionError, ShapeMismatchError
from schubert.models.schubert_types import SchubertInstance, SchubertProblem
from schubert.services.combinatorics import point_bracket
from schubert.services.geometry import check_incidence, plane_distance, random_instance
from schubert.services.linalg import RandomSource
from schubert.services.solver import (
    SchubertSolver,
    SolveOptions,
    dedup_planes,
    solve_schubert_problem,
    solve_simple_schubert,
    solve_via_known_instance,
)


def assert_distinct(planes):
    for i in range(len(planes)):
        for j in range(i + 1, len(planes)):
            assert plane_distance(planes[i], planes[j]) > 1e-6


class TestFourLines:
    @pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
    def test_finds_both_lines(self, four_lines, seed):
        rng = RandomSource(seed)
        instance = random_instance(four_lines, rng.substream(0))
        report = solve_schubert_problem(instance, 2, 4, rng=rng.substream(1))
        assert report.expected == 2
        assert report.count == 2
        assert not report.incomplete
        assert report.seeding == "total-degree"
        assert all(check_incidence(h, instance) for h in report.solutions)
        assert all(r < 1e-8 for r in report.residuals)
        assert_distinct(report.solutions)
        assert report.seed == rng.substream(1).seed

    def test_large_bezout_ratio_skips_total_degree(self, four_lines_instance, rng):
        # 4 total-degree paths for 2 lines is over a ratio of 1
        report = SchubertSolver(SolveOptions(total_degree_ratio=1.0), rng).solve(four_lines_instance)
        assert report.seeding in ("newton", "fitted-flags")
        assert report.count == 2

    def test_simple_entry_point(self, four_lines_instance, rng):
        report = solve_simple_schubert(four_lines_instance, rng=rng)
        assert report.count == 2
        assert "total" in report.timings

    def test_same_seed_same_solutions(self, four_lines_instance):
        first = SchubertSolver(rng=RandomSource(7)).solve(four_lines_instance)
        second = SchubertSolver(rng=RandomSource(7)).solve(four_lines_instance)
        for a, b in zip(first.solutions, second.solutions):
            assert np.array_equal(a, b)

    def test_shape_mismatch(self, four_lines_instance, rng):
        with pytest.raises(ShapeMismatchError):
            SchubertSolver(rng=rng).solve(four_lines_instance, 2, 5)


class TestConditionOrder:
    def test_unsorted_conditions_give_same_planes(self, rng):
        # sigma_2 * sigma_1^2 on Gr(2,4) has one solution
        problem = SchubertProblem.from_brackets(2, 4, [(1, 4), (2, 4), (2, 4)])
        instance = random_instance(problem, rng)
        shuffled = SchubertInstance(2, 4, [instance.pairs[1], instance.pairs[2], instance.pairs[0]])
        sorted_report = SchubertSolver(rng=RandomSource(11)).solve(instance)
        shuffled_report = SchubertSolver(rng=RandomSource(11)).solve(shuffled)
        assert sorted_report.count == shuffled_report.count == 1
        assert plane_distance(sorted_report.solutions[0], shuffled_report.solutions[0]) < 1e-6
        assert check_incidence(shuffled_report.solutions[0], shuffled)

    def test_simple_solver_rejects_trailing_codimension_two(self, rng):
        problem = SchubertProblem.from_brackets(2, 5, [(2, 5)] * 3)
        instance = random_instance(problem, rng)
        with pytest.raises(PreconditionError) as e:
            SchubertSolver(rng=rng).solve_simple(instance)
        assert e.value.index == 2


class TestEdgeCases:
    def test_empty_solution_set(self, rng):
        # sigma_2 * sigma_{1,1} vanishes on Gr(2,4)
        problem = SchubertProblem.from_brackets(2, 4, [(1, 4), (2, 3)])
        report = SchubertSolver(rng=rng).solve(random_instance(problem, rng))
        assert report.expected == 0
        assert report.solutions == []
        assert not report.incomplete

    def test_single_point_condition(self, rng):
        problem = SchubertProblem(2, 4, (point_bracket(2, 4),))
        instance = random_instance(problem, rng)
        report = SchubertSolver(rng=rng).solve(instance)
        assert report.count == 1
        assert report.seeding == "patch-point"
        assert plane_distance(report.solutions[0], instance.flags[0][:, :2]) < 1e-8

    def test_dedup_planes(self, rng):
        plane = rng.complex_normal((4, 2))
        other = rng.complex_normal((4, 2))
        kept = dedup_planes([plane, plane @ rng.complex_normal((2, 2)), other])
        assert len(kept) == 2
        assert kept[0] is plane


class TestKnownInstance:
    def test_moves_solutions_to_user_flags(self, four_lines, rng):
        user_flags = [rng.complex_normal((4, 4)) for _ in range(4)]
        report = solve_via_known_instance(four_lines, user_flags, rng=RandomSource(99))
        user = SchubertInstance(2, 4, list(zip(four_lines.conditions, user_flags)))
        assert report.count == 2
        assert all(check_incidence(h, user) for h in report.solutions)
        assert_distinct(report.solutions)

    def test_rejects_degenerate_flags(self, four_lines, rng):
        flag = rng.complex_normal((4, 4))
        with pytest.raises(DegenerateFlagsError):
            solve_via_known_instance(four_lines, [flag] * 4, rng=rng)

    def test_flag_count_mismatch(self, four_lines, rng):
        with pytest.raises(ShapeMismatchError):
            solve_via_known_instance(four_lines, [rng.complex_normal((4, 4))] * 3, rng=rng)


@pytest.mark.slow
def test_gr36_without_total_degree(gr36_problem):
    rng = RandomSource(20240611)
    instance = random_instance(gr36_problem, rng.substream(0))
    options = SolveOptions(bezout_cap=100, monodromy_loops=100)
    report = SchubertSolver(options, rng.substream(1)).solve(instance)
    assert report.expected == 42
    assert report.seeding in ("newton", "fitted-flags")
    assert report.count == 42
    assert all(check_incidence(h, instance) for h in report.solutions)


@pytest.mark.slow
def test_gr36_with_default_options(gr36_problem):
    rng = RandomSource(20240611)
    instance = random_instance(gr36_problem, rng.substream(0))
    report = SchubertSolver(rng=rng.substream(1)).solve(instance)
    # 2187 total-degree paths for 42 solutions is not worth tracking
    assert report.seeding in ("newton", "fitted-flags")
    assert report.count == 42
    assert report.timings["total"] < 600
    assert all(check_incidence(h, instance) for h in report.solutions)
