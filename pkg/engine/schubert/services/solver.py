"""
Top-level solving of Schubert problem instances.

The pipeline sorts the conditions, normalizes the first two flags, builds
the determinantal system on their Richardson patch, finds seed solutions,
completes the set by monodromy up to the Littlewood-Richardson number and
maps everything back to the caller's coordinates, verifying each plane
against the original instance.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from schubert.exceptions import PreconditionError, ShapeMismatchError
from schubert.models.schubert_types import SchubertInstance, SchubertProblem
from schubert.services.combinatorics import (
    codimension,
    condition_order,
    is_simple_problem,
    lr_number,
    sorting_advice,
    validate_problem,
)
from schubert.services.geometry import (
    CoordinatePatch,
    DEFAULT_INCIDENCE_TOL,
    build_patch,
    check_general_position,
    check_incidence,
    embed_point,
    flag_through_plane,
    max_incidence_residual,
    normalize_instance,
    pad_instances,
    plane_distance,
    random_instance,
    worst_incidence_residual,
)
from schubert.services.homotopy import (
    PathStats,
    PathTracker,
    StraightLineHomotopy,
    TrackerOptions,
    bezout_number,
    change_flags,
    dedup_solutions,
    monodromy_solve,
    newton_correct,
    total_degree_start,
    transport,
)
from schubert.services.linalg import RandomSource, solve_linear
from schubert.services.systems import DeterminantalSystem, build_system, square_up

logger = logging.getLogger(__name__)


class SolveOptions(BaseModel):
    """Knobs of the solving pipeline"""

    bezout_cap: int = Field(default=20000, ge=1)
    total_degree_ratio: float = Field(default=8.0, ge=1)
    newton_retries: int = Field(default=20, ge=0)
    newton_iterations: int = Field(default=30, ge=1)
    fitted_attempts: int = Field(default=5, ge=0)
    monodromy_loops: int = Field(default=50, ge=0)
    stall_loops: Optional[int] = Field(default=None, ge=1)
    threads: int = Field(default=1, ge=1)
    incidence_tol: float = Field(default=DEFAULT_INCIDENCE_TOL, gt=0)
    dedup_tol: float = Field(default=1e-6, gt=0)
    tracker: TrackerOptions = Field(default_factory=TrackerOptions)


@dataclass
class SolveReport:
    solutions: List[np.ndarray]
    expected: int
    residuals: List[float]
    seed: int
    timings: Dict[str, float] = field(default_factory=dict)
    path_stats: PathStats = field(default_factory=PathStats)
    seeding: str = "none"
    failures: List[int] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.solutions)

    @property
    def incomplete(self) -> bool:
        return self.count < self.expected


class _Stopwatch:
    def __init__(self):
        self.timings: Dict[str, float] = {}
        self._started = time.perf_counter()
        self._last = self._started

    def lap(self, name: str):
        now = time.perf_counter()
        self.timings[name] = self.timings.get(name, 0.0) + (now - self._last)
        self._last = now

    def finish(self) -> Dict[str, float]:
        self.timings["total"] = time.perf_counter() - self._started
        return self.timings


@dataclass
class _Prepared:
    """A sorted, padded and normalized instance with its patch system"""

    original: SchubertInstance
    order: List[int]
    normalized: SchubertInstance
    g: np.ndarray
    patch: CoordinatePatch
    system: DeterminantalSystem


class SchubertSolver:
    """
    Solves instances of Schubert problems with one random source.

    Every random choice (padding flags, mixing matrices, gammas, start
    constants, monodromy loops) is drawn from `rng`, so a fixed seed fixes
    the whole run.
    """

    def __init__(self, options: Optional[SolveOptions] = None, rng: Optional[RandomSource] = None):
        self.options = options or SolveOptions()
        self.rng = rng or RandomSource()
        self.tracker = PathTracker(self.options.tracker)

    # public entry points

    def solve(self, instance: SchubertInstance, k: Optional[int] = None, n: Optional[int] = None) -> SolveReport:
        """Solve an instance of any valid problem"""
        self._check_shape(instance, k, n)
        return self._run(instance, simple=False)

    def solve_simple(self, instance: SchubertInstance) -> SolveReport:
        """
        Solve an instance whose conditions after the first two are all of
        codimension 1; the system is then square without mixing.
        """
        problem = instance.problem
        validate_problem(problem)
        order = condition_order(problem)
        if not is_simple_problem(problem.reordered(order)):
            index = next(i for i in order[2:] if codimension(problem.conditions[i]) != 1)
            bracket = problem.conditions[index]
            raise PreconditionError(
                f"condition {index} ({bracket}) has codimension {codimension(bracket)}, expected a simple condition",
                index=index,
            )
        return self._run(instance, simple=True)

    def solve_via_known_instance(self, problem: SchubertProblem, user_flags: Sequence[np.ndarray]) -> SolveReport:
        """
        Solve a random instance of `problem`, then move its solutions to the
        caller's flags with the parameter homotopy.
        """
        validate_problem(problem)
        if len(user_flags) != len(problem.conditions):
            raise ShapeMismatchError(f"{len(problem.conditions)} conditions but {len(user_flags)} flags")
        user = SchubertInstance(problem.k, problem.n, list(zip(problem.conditions, user_flags)))
        check_general_position(user)

        watch = _Stopwatch()
        start = random_instance(problem, self.rng)
        seeded = self._run(start, simple=False)
        watch.lap("random_instance")
        if not seeded.solutions:
            logger.warning("Random instance produced no solutions to transport")
            return SolveReport([], seeded.expected, [], self.rng.seed, watch.finish(), seeded.path_stats, seeded.seeding)

        order = condition_order(problem)
        moved = change_flags(
            start.problem,
            seeded.solutions,
            start.flags,
            [user.flags[i] for i in order],
            self.rng,
            self.options.tracker,
            self.options.threads,
            self.options.incidence_tol,
        )
        watch.lap("change_flags")
        solutions = dedup_planes(moved.succeeded, self.options.dedup_tol)
        solutions = [h for h in solutions if check_incidence(h, user, self.options.incidence_tol)]
        residuals = [max_incidence_residual(h, user) for h in solutions]
        watch.lap("verify")
        report = SolveReport(
            solutions,
            seeded.expected,
            residuals,
            self.rng.seed,
            watch.finish(),
            seeded.path_stats.merge(moved.stats),
            seeded.seeding,
            moved.failures,
        )
        self._log_report(report)
        return report

    # pipeline

    def _check_shape(self, instance: SchubertInstance, k: Optional[int], n: Optional[int]):
        if (k is not None and k != instance.k) or (n is not None and n != instance.n):
            raise ShapeMismatchError(f"instance lives on Gr({instance.k},{instance.n}), not Gr({k},{n})")

    def _prepare(self, instance: SchubertInstance, simple: bool) -> _Prepared:
        order = condition_order(instance.problem)
        (padded,) = pad_instances([instance.reordered(order)], self.rng)
        normalized, g = normalize_instance(padded)
        patch = build_patch(padded.brackets[0], padded.brackets[1])
        system = build_system(normalized, patch)
        if not system.is_square:
            if simple:
                raise PreconditionError(
                    f"simple system is not square: {system.num_equations} equations in {system.num_vars} variables"
                )
            system = square_up(system, self.rng)
        return _Prepared(instance, order, normalized, g, patch, system)

    def _run(self, instance: SchubertInstance, simple: bool) -> SolveReport:
        watch = _Stopwatch()
        problem = instance.problem
        expected = lr_number(problem)
        watch.lap("count")
        logger.info(f"Solving {len(problem.conditions)} conditions on Gr({problem.k},{problem.n}); expecting {expected}")
        if expected == 0:
            return SolveReport([], 0, [], self.rng.seed, watch.finish())
        if not sorting_advice(problem):
            logger.warning("The two conditions of largest codimension are not first; sorting before solving")

        prepared = self._prepare(instance, simple)
        watch.lap("setup")

        stats = PathStats()
        verify = self._patch_verifier(prepared)
        seeds, seeding = self._seed(prepared, expected, stats, verify)
        watch.lap("seeding")

        points = dedup_solutions(seeds, self.options.dedup_tol)
        if points and len(points) < expected:
            result = monodromy_solve(
                prepared.system,
                points,
                expected,
                self.rng,
                self.tracker,
                self.options.monodromy_loops,
                self.options.dedup_tol,
                verify,
                self.options.threads,
                self.options.stall_loops,
            )
            points = result.solutions
            stats = stats.merge(result.stats)
        watch.lap("monodromy")

        solutions, residuals = self._map_back(prepared, points)
        if len(solutions) > expected:
            logger.error(f"Found {len(solutions)} distinct solutions but only {expected} are possible; keeping {expected}")
            solutions, residuals = solutions[:expected], residuals[:expected]
        watch.lap("verify")

        report = SolveReport(solutions, expected, residuals, self.rng.seed, watch.finish(), stats, seeding)
        self._log_report(report)
        return report

    def _patch_verifier(self, prepared: _Prepared) -> Callable[[np.ndarray], bool]:
        tol = self.options.incidence_tol

        def verify(x: np.ndarray) -> bool:
            return check_incidence(embed_point(prepared.patch, x), prepared.normalized, tol)

        return verify

    # seeding

    def _seed(self, prepared: _Prepared, expected: int, stats: PathStats, verify) -> Tuple[List[np.ndarray], str]:
        system = prepared.system
        if system.num_vars == 0:
            point = np.zeros(0, dtype=complex)
            return ([point] if verify(point) else []), "patch-point"

        degrees = system.equation_degrees(self.rng)
        bezout = bezout_number(degrees)
        if bezout > self.options.total_degree_ratio * expected:
            logger.info(
                f"Bezout number {bezout} is far above the {expected} expected solutions; seeding for monodromy instead"
            )
        elif bezout <= self.options.bezout_cap:
            seeds = self._seed_total_degree(system, degrees, stats, verify)
            if seeds:
                return seeds, "total-degree"
        else:
            logger.info(f"Bezout number {bezout} exceeds the cap {self.options.bezout_cap}; skipping total-degree start")

        seeds = self._seed_newton(system, verify)
        if seeds:
            return seeds, "newton"
        seeds = self._seed_fitted_flags(prepared, stats, verify)
        if seeds:
            return seeds, "fitted-flags"
        logger.warning("No seed solution found; try another seed")
        return [], "none"

    def _seed_total_degree(self, system: DeterminantalSystem, degrees, stats: PathStats, verify) -> List[np.ndarray]:
        try:
            start, starts = total_degree_start(system, self.rng, degrees)
        except PreconditionError as e:
            logger.warning(f"No total-degree start: {str(e)}")
            return []
        homotopy = StraightLineHomotopy(start, system, complex(self.rng.unit_complex()))
        logger.info(f"Tracking {len(starts)} total-degree paths")
        results = self.tracker.track_all(homotopy, starts, self.options.threads)
        stats.record(results)
        seeds = [r.endpoint for r in results if r.success and verify(r.endpoint)]
        logger.info(f"Total-degree homotopy gave {len(seeds)} verified endpoints from {len(results)} paths")
        return seeds

    def _seed_newton(self, system: DeterminantalSystem, verify) -> List[np.ndarray]:
        opts = self.options
        for attempt in range(opts.newton_retries):
            x0 = self.rng.complex_normal(system.num_vars)
            result = newton_correct(system.evaluate_with_jacobian, x0, opts.tracker.endgame_tol, opts.newton_iterations)
            if result.converged and verify(result.x):
                logger.info(f"Newton from a random start converged after {attempt + 1} attempt(s)")
                return [result.x]
        return []

    def _seed_fitted_flags(self, prepared: _Prepared, stats: PathStats, verify) -> List[np.ndarray]:
        """
        Choose a random patch point, build flags for the remaining conditions
        that it satisfies, and carry it to the real flags.
        """
        system = prepared.system
        for attempt in range(self.options.fitted_attempts):
            x0 = self.rng.complex_normal(system.num_vars)
            plane = embed_point(prepared.patch, x0)
            fitted = {c: flag_through_plane(bracket, plane, self.rng) for c, bracket in system.conditions.items()}
            results = transport(system, [x0], fitted, system.flags, self.rng, self.tracker)
            stats.record(results)
            if results[0].success and verify(results[0].endpoint):
                logger.info(f"Fitted-flag start reached the instance after {attempt + 1} attempt(s)")
                return [results[0].endpoint]
        return []

    # output

    def _map_back(self, prepared: _Prepared, points: Sequence[np.ndarray]):
        """Planes in the caller's basis that pass incidence on the original instance"""
        solutions: List[np.ndarray] = []
        residuals: List[float] = []
        for x in points:
            plane = solve_linear(prepared.g, embed_point(prepared.patch, x))
            worst = worst_incidence_residual(plane, prepared.original)
            residual = worst.value if worst is not None else 0.0
            if residual > self.options.incidence_tol:
                logger.warning(
                    f"Dropping a solution that fails condition {worst.condition} at index {worst.index} "
                    f"of the original instance (residual {residual:.2e})"
                )
                continue
            solutions.append(plane)
            residuals.append(residual)
        return solutions, residuals

    def _log_report(self, report: SolveReport):
        if report.incomplete:
            logger.warning(f"Incomplete solution set: {report.count} of {report.expected} (seed {report.seed})")
        else:
            logger.info(f"Found all {report.count} solutions in {report.timings.get('total', 0.0):.2f}s")


def dedup_planes(planes: Sequence[np.ndarray], tol: float = 1e-6) -> List[np.ndarray]:
    """Drop planes whose column span repeats an earlier one"""
    kept: List[np.ndarray] = []
    for h in planes:
        if all(plane_distance(h, other) >= tol for other in kept):
            kept.append(h)
    return kept


def solve_schubert_problem(
    instance: SchubertInstance,
    k: Optional[int] = None,
    n: Optional[int] = None,
    options: Optional[SolveOptions] = None,
    rng: Optional[RandomSource] = None,
) -> SolveReport:
    return SchubertSolver(options, rng).solve(instance, k, n)


def solve_simple_schubert(
    instance: SchubertInstance, options: Optional[SolveOptions] = None, rng: Optional[RandomSource] = None
) -> SolveReport:
    return SchubertSolver(options, rng).solve_simple(instance)


def solve_via_known_instance(
    problem: SchubertProblem,
    user_flags: Sequence[np.ndarray],
    options: Optional[SolveOptions] = None,
    rng: Optional[RandomSource] = None,
) -> SolveReport:
    return SchubertSolver(options, rng).solve_via_known_instance(problem, user_flags)
