"""
Numerical continuation for determinantal systems: Newton corrector,
adaptive predictor-corrector tracking, total-degree start systems, the
flag (parameter / cheater's) homotopy, and monodromy completion.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from schubert.exceptions import PatchMissError, PreconditionError, ShapeMismatchError, SingularMatrixError
from schubert.models.schubert_types import SchubertInstance, SchubertProblem
from schubert.services.combinatorics import condition_order, validate_problem
from schubert.services.geometry import (
    DEFAULT_INCIDENCE_TOL,
    build_patch,
    check_incidence,
    embed_point,
    normalize_instance,
    pad_instances,
    patch_coordinates,
)
from schubert.services.linalg import RandomSource, condition_number, max_abs, solve_linear
from schubert.services.systems import DeterminantalSystem, build_system, square_up

logger = logging.getLogger(__name__)

Evaluator = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]


class TrackerOptions(BaseModel):
    """Step control and tolerances of the path tracker"""

    initial_step: float = Field(default=0.05, gt=0)
    min_step: float = Field(default=1e-14, gt=0)
    max_step: float = Field(default=0.1, gt=0)
    step_shrink: float = Field(default=0.5, gt=0, lt=1)
    step_grow: float = Field(default=1.5, gt=1)
    grow_after: int = Field(default=3, ge=1)
    newton_tol: float = Field(default=1e-10, gt=0)
    endgame_tol: float = Field(default=1e-12, gt=0)
    max_newton_iterations: int = Field(default=4, ge=1)
    final_newton_iterations: int = Field(default=8, ge=1)
    max_steps: int = Field(default=10000, ge=1)
    endgame_threshold: float = Field(default=0.99, gt=0, lt=1)
    divergence_norm: float = Field(default=1e8, gt=0)
    cutoff_after: float = Field(default=0.9, gt=0, lt=1)
    cutoff_norm: float = Field(default=1e4, gt=0)
    singular_condition: float = Field(default=1e10, gt=1)
    predictor: str = Field(default="euler", pattern="^(euler|rk4)$")

    @model_validator(mode="after")
    def check_steps(self):
        if not (self.min_step < self.initial_step <= self.max_step < 1.0):
            raise ValueError("need 0 < min_step < initial_step <= max_step < 1")
        if self.cutoff_norm > self.divergence_norm:
            raise ValueError("cutoff_norm must not exceed divergence_norm")
        return self


class PathStatus(str, Enum):
    SUCCESS = "success"
    DIVERGED = "diverged"
    STEP_LIMIT = "stepLimit"
    SINGULAR = "singular"


@dataclass
class PathResult:
    status: PathStatus
    endpoint: np.ndarray
    final_residual: float
    steps: int
    t: float = 1.0

    @property
    def success(self) -> bool:
        return self.status == PathStatus.SUCCESS


@dataclass
class PathStats:
    tracked: int = 0
    success: int = 0
    diverged: int = 0
    step_limit: int = 0
    singular: int = 0

    def record(self, results: Sequence[PathResult]) -> "PathStats":
        for result in results:
            self.tracked += 1
            if result.status == PathStatus.SUCCESS:
                self.success += 1
            elif result.status == PathStatus.DIVERGED:
                self.diverged += 1
            elif result.status == PathStatus.STEP_LIMIT:
                self.step_limit += 1
            else:
                self.singular += 1
        return self

    def merge(self, other: "PathStats") -> "PathStats":
        return PathStats(
            self.tracked + other.tracked,
            self.success + other.success,
            self.diverged + other.diverged,
            self.step_limit + other.step_limit,
            self.singular + other.singular,
        )

    @property
    def failed(self) -> int:
        return self.step_limit + self.singular

    def as_dict(self) -> Dict[str, int]:
        return {
            "tracked": self.tracked,
            "success": self.success,
            "diverged": self.diverged,
            "failed": self.failed,
            "step_limit": self.step_limit,
            "singular": self.singular,
        }


# Homotopies


class Homotopy:
    """H(x, t) with H(., 1) the target. Subclasses provide both evaluations."""

    def value_and_jacobian(self, x: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def derivatives(self, x: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(H, dH/dx, dH/dt)"""
        raise NotImplementedError


class TotalDegreeStart:
    """x_e^{d_e} - c_e = 0 with unit-modulus c_e"""

    def __init__(self, degrees: Sequence[int], constants: Sequence[complex]):
        self.degrees = np.asarray(degrees, dtype=int)
        self.constants = np.asarray(constants, dtype=complex)

    def evaluate_with_jacobian(self, x) -> Tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=complex)
        value = x ** self.degrees - self.constants
        jac = np.diag(self.degrees * x ** (self.degrees - 1))
        return value, jac

    def solutions(self) -> List[np.ndarray]:
        roots = []
        for d, c in zip(self.degrees, self.constants):
            base = c ** (1.0 / d)
            roots.append([base * np.exp(2j * np.pi * j / d) for j in range(d)])
        return [np.array(combo, dtype=complex) for combo in product(*roots)]


class StraightLineHomotopy(Homotopy):
    """(1 - t) gamma start(x) + t target(x)"""

    def __init__(self, start, target, gamma: complex):
        self.start = start
        self.target = target
        self.gamma = complex(gamma)

    def value_and_jacobian(self, x, t):
        s, js = self.start.evaluate_with_jacobian(x)
        f, jf = self.target.evaluate_with_jacobian(x)
        return (1 - t) * self.gamma * s + t * f, (1 - t) * self.gamma * js + t * jf

    def derivatives(self, x, t):
        s, js = self.start.evaluate_with_jacobian(x)
        f, jf = self.target.evaluate_with_jacobian(x)
        value = (1 - t) * self.gamma * s + t * f
        return value, (1 - t) * self.gamma * js + t * jf, f - self.gamma * s


class FlagHomotopy(Homotopy):
    """
    The system with flags F_c(t) = (1 - t) gamma_c F_c^from + t F_c^to.
    Scaling a flag matrix does not change the flag, so t = 0 is the start
    instance and t = 1 the target instance.
    """

    def __init__(
        self,
        system: DeterminantalSystem,
        flags_from: Mapping[int, np.ndarray],
        flags_to: Mapping[int, np.ndarray],
        gammas: Mapping[int, complex],
    ):
        self.system = system
        self.flags_from = {c: np.asarray(f, dtype=complex) for c, f in flags_from.items()}
        self.flags_to = {c: np.asarray(f, dtype=complex) for c, f in flags_to.items()}
        self.gammas = {c: complex(g) for c, g in gammas.items()}
        self.velocity = {c: self.flags_to[c] - self.gammas[c] * self.flags_from[c] for c in self.flags_from}

    def flags_at(self, t: float) -> Dict[int, np.ndarray]:
        return {c: (1 - t) * self.gammas[c] * self.flags_from[c] + t * self.flags_to[c] for c in self.flags_from}

    def value_and_jacobian(self, x, t):
        values, jac, _ = self.system.minors(x, self.flags_at(t))
        return self.system.mixing @ values, self.system.mixing @ jac

    def derivatives(self, x, t):
        values, jac, dt = self.system.minors(x, self.flags_at(t), self.velocity)
        mixing = self.system.mixing
        return mixing @ values, mixing @ jac, mixing @ dt


# Newton and tracking


@dataclass
class NewtonResult:
    x: np.ndarray
    residual: float
    iterations: int
    converged: bool
    reason: str = ""


def newton_correct(evaluate: Evaluator, x0, tol: float, max_iterations: int) -> NewtonResult:
    """
    x <- x - J^{-1} r until ||r||_inf < tol (or the update falls below
    tol * (1 + ||x||_inf)). Fails on a singular Jacobian or growing updates.
    """
    x = np.asarray(x0, dtype=complex).copy()
    previous_step = None
    small_step = False
    for iteration in range(max_iterations + 1):
        try:
            residual, jac = evaluate(x)
        except FloatingPointError:
            return NewtonResult(x, float("inf"), iteration, False, "non-finite residual")
        norm = max_abs(residual)
        if norm < tol or small_step:
            return NewtonResult(x, norm, iteration, True)
        if iteration == max_iterations:
            return NewtonResult(x, norm, iteration, False, "iteration limit")
        try:
            step = solve_linear(jac, residual)
        except SingularMatrixError:
            return NewtonResult(x, norm, iteration, False, "singular jacobian")
        x = x - step
        step_norm = max_abs(step)
        if previous_step is not None and step_norm > previous_step:
            return NewtonResult(x, norm, iteration + 1, False, "diverging")
        previous_step = step_norm
        small_step = step_norm <= tol * (1.0 + max_abs(x))
    return NewtonResult(x, float("inf"), max_iterations, False, "iteration limit")


class PathTracker:
    """
    Adaptive predictor-corrector tracking from t = 0 to t = 1.

    Paths whose norm passes cutoff_norm after t = cutoff_after are heading to
    a solution at infinity and are stopped there as diverged.
    """

    def __init__(self, options: Optional[TrackerOptions] = None):
        self.options = options or TrackerOptions()

    def _tangent(self, homotopy: Homotopy, x, t) -> np.ndarray:
        _, jac, dt = homotopy.derivatives(x, t)
        return -solve_linear(jac, dt)

    def _predict(self, homotopy: Homotopy, x, t, h) -> np.ndarray:
        if self.options.predictor == "rk4":
            k1 = self._tangent(homotopy, x, t)
            k2 = self._tangent(homotopy, x + 0.5 * h * k1, t + 0.5 * h)
            k3 = self._tangent(homotopy, x + 0.5 * h * k2, t + 0.5 * h)
            k4 = self._tangent(homotopy, x + h * k3, t + h)
            return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        return x + h * self._tangent(homotopy, x, t)

    def track(self, homotopy: Homotopy, x_start) -> PathResult:
        opts = self.options
        x = np.asarray(x_start, dtype=complex).copy()
        if x.size == 0:
            value, _ = homotopy.value_and_jacobian(x, 1.0)
            return PathResult(PathStatus.SUCCESS, x, max_abs(value), 0)
        t = 0.0
        h = opts.initial_step
        successes = 0
        steps = 0
        while t < 1.0:
            if steps >= opts.max_steps:
                return PathResult(PathStatus.STEP_LIMIT, x, float("inf"), steps, t)
            steps += 1
            h = min(h, 1.0 - t)
            t_next = 1.0 if 1.0 - (t + h) < 1e-15 else t + h
            tol = opts.endgame_tol if t_next > opts.endgame_threshold else opts.newton_tol
            accepted = None
            try:
                predicted = self._predict(homotopy, x, t, t_next - t)
                corrected = newton_correct(
                    lambda y: homotopy.value_and_jacobian(y, t_next), predicted, tol, opts.max_newton_iterations
                )
                if corrected.converged:
                    accepted = corrected.x
            except (SingularMatrixError, FloatingPointError):
                accepted = None
            if accepted is not None:
                t, x = t_next, accepted
                norm = max_abs(x)
                if norm > opts.divergence_norm or (t > opts.cutoff_after and norm > opts.cutoff_norm):
                    return PathResult(PathStatus.DIVERGED, x, float("inf"), steps, t)
                successes += 1
                if successes >= opts.grow_after:
                    h = min(h * opts.step_grow, opts.max_step)
                    successes = 0
            else:
                successes = 0
                h *= opts.step_shrink
                if h < opts.min_step:
                    status = PathStatus.DIVERGED if max_abs(x) > opts.cutoff_norm else PathStatus.SINGULAR
                    return PathResult(status, x, float("inf"), steps, t)
        return self._finish(homotopy, x, steps)

    def _finish(self, homotopy: Homotopy, x, steps: int) -> PathResult:
        opts = self.options
        refined = newton_correct(
            lambda y: homotopy.value_and_jacobian(y, 1.0), x, opts.endgame_tol, opts.final_newton_iterations
        )
        if refined.converged or refined.reason == "iteration limit":
            x = refined.x
        try:
            value, jac = homotopy.value_and_jacobian(x, 1.0)
        except FloatingPointError:
            return PathResult(PathStatus.SINGULAR, x, float("inf"), steps)
        residual = max_abs(value)
        if max_abs(x) > opts.divergence_norm:
            return PathResult(PathStatus.DIVERGED, x, residual, steps)
        if residual >= opts.newton_tol or condition_number(jac) > opts.singular_condition:
            return PathResult(PathStatus.SINGULAR, x, residual, steps)
        return PathResult(PathStatus.SUCCESS, x, residual, steps)

    def track_all(self, homotopy: Homotopy, starts: Sequence[np.ndarray], threads: int = 1) -> List[PathResult]:
        """Independent paths over one shared homotopy; results in input order"""
        if threads <= 1 or len(starts) <= 1:
            return [self.track(homotopy, x) for x in starts]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda x: self.track(homotopy, x), starts))


# Start systems and solution sets


def total_degree_start(
    target: DeterminantalSystem, rng: RandomSource, degrees: Optional[Sequence[int]] = None
) -> Tuple[TotalDegreeStart, List[np.ndarray]]:
    if not target.is_square:
        raise PreconditionError(
            f"total-degree start needs a square system, got {target.num_equations} x {target.num_vars}"
        )
    degrees = list(degrees) if degrees is not None else target.equation_degrees(rng)
    for e, d in enumerate(degrees):
        if d <= 0:
            raise PreconditionError(f"equation {e} is constant along a generic line (degree 0)")
    constants = rng.unit_complex(len(degrees))
    start = TotalDegreeStart(degrees, constants)
    return start, start.solutions()


def bezout_number(degrees: Sequence[int]) -> int:
    return int(np.prod(degrees)) if len(degrees) else 1


def dedup_solutions(solutions: Sequence[np.ndarray], tol: float = 1e-6) -> List[np.ndarray]:
    """One representative per cluster under relative sup-norm distance; first occurrence kept"""
    kept: List[np.ndarray] = []
    for x in solutions:
        x = np.asarray(x, dtype=complex)
        duplicate = False
        for y in kept:
            scale = max(1.0, max_abs(x), max_abs(y))
            if max_abs(x - y) / scale < tol:
                duplicate = True
                break
        if not duplicate:
            kept.append(x)
    return kept


def random_gammas(keys, rng: RandomSource) -> Dict[int, complex]:
    return {c: complex(rng.unit_complex()) for c in keys}


def transport(
    system: DeterminantalSystem,
    points: Sequence[np.ndarray],
    flags_from: Mapping[int, np.ndarray],
    flags_to: Mapping[int, np.ndarray],
    rng: RandomSource,
    tracker: PathTracker,
    threads: int = 1,
) -> List[PathResult]:
    """Carry patch points from one set of flags to another along a flag homotopy"""
    homotopy = FlagHomotopy(system, flags_from, flags_to, random_gammas(flags_from.keys(), rng))
    return tracker.track_all(homotopy, points, threads)


@dataclass
class MonodromyResult:
    solutions: List[np.ndarray]
    complete: bool
    loops: int
    stats: PathStats = field(default_factory=PathStats)


def monodromy_solve(
    system: DeterminantalSystem,
    seeds: Sequence[np.ndarray],
    target_count: int,
    rng: RandomSource,
    tracker: Optional[PathTracker] = None,
    loops: int = 50,
    dedup_tol: float = 1e-6,
    verify: Optional[Callable[[np.ndarray], bool]] = None,
    threads: int = 1,
    stall_loops: Optional[int] = None,
) -> MonodromyResult:
    """
    Grow a solution set by loops base -> random flags -> base. Each loop
    permutes the solutions of the base instance; new endpoints are kept
    after verification and deduplication. With stall_loops set, gives up
    after that many consecutive loops without a new solution.
    """
    if not seeds:
        raise PreconditionError("monodromy needs at least one seed solution")
    tracker = tracker or PathTracker()
    solutions = dedup_solutions(seeds, dedup_tol)
    stats = PathStats()
    if len(solutions) >= target_count:
        return MonodromyResult(solutions, True, 0, stats)
    base = system.flags
    stalled = 0
    for loop in range(1, loops + 1):
        auxiliary = {c: rng.complex_normal(f.shape) for c, f in base.items()}
        outward = transport(system, solutions, base, auxiliary, rng, tracker, threads)
        stats.record(outward)
        middle = [r.endpoint for r in outward if r.success]
        back = transport(system, middle, auxiliary, base, rng, tracker, threads)
        stats.record(back)
        found = 0
        for result in back:
            if not result.success:
                continue
            if verify is not None and not verify(result.endpoint):
                continue
            before = len(solutions)
            solutions = dedup_solutions(solutions + [result.endpoint], dedup_tol)
            found += len(solutions) - before
        logger.info(f"Monodromy loop {loop}: {found} new, {len(solutions)}/{target_count} solutions")
        if len(solutions) >= target_count:
            return MonodromyResult(solutions, True, loop, stats)
        stalled = 0 if found else stalled + 1
        if stall_loops is not None and stalled >= stall_loops:
            logger.warning(f"Monodromy stalled for {stalled} loops at {len(solutions)}/{target_count} solutions")
            return MonodromyResult(solutions, False, loop, stats)
    logger.warning(f"Monodromy budget of {loops} loops exhausted with {len(solutions)}/{target_count} solutions")
    return MonodromyResult(solutions, False, loops, stats)


# Moving solutions between instances


@dataclass
class ChangeFlagsResult:
    solutions: List[Optional[np.ndarray]]
    results: List[Optional[PathResult]]
    failures: List[int]
    stats: PathStats

    @property
    def succeeded(self) -> List[np.ndarray]:
        return [h for h in self.solutions if h is not None]


def change_flags(
    problem: SchubertProblem,
    solutions: Sequence[np.ndarray],
    flags_from: Sequence[np.ndarray],
    flags_to: Sequence[np.ndarray],
    rng: RandomSource,
    options: Optional[TrackerOptions] = None,
    threads: int = 1,
    incidence_tol: float = DEFAULT_INCIDENCE_TOL,
) -> ChangeFlagsResult:
    """
    Parameter homotopy: solutions of (problem, flags_from) become solutions
    of (problem, flags_to). Output order matches the input; a failed path
    leaves None in its slot and its index in `failures`.
    """
    validate_problem(problem)
    if len(flags_from) != len(problem.conditions) or len(flags_to) != len(problem.conditions):
        raise ShapeMismatchError(
            f"{len(problem.conditions)} conditions but {len(flags_from)} source and {len(flags_to)} target flags"
        )
    order = condition_order(problem)
    source = SchubertInstance(problem.k, problem.n, [(problem.conditions[i], flags_from[i]) for i in order])
    target = SchubertInstance(problem.k, problem.n, [(problem.conditions[i], flags_to[i]) for i in order])
    source, target = pad_instances([source, target], rng)
    normalized_from, g_from = normalize_instance(source)
    normalized_to, g_to = normalize_instance(target)
    patch = build_patch(source.brackets[0], source.brackets[1])
    system = build_system(normalized_from, patch)
    if not system.is_square:
        system = square_up(system, rng)

    starts: List[Tuple[int, np.ndarray]] = []
    failures: List[int] = []
    for index, h in enumerate(solutions):
        try:
            starts.append((index, patch_coordinates(patch, g_from @ np.asarray(h, dtype=complex))))
        except (PatchMissError, ShapeMismatchError) as e:
            logger.warning(f"Solution {index} cannot be expressed in the patch: {str(e)}")
            failures.append(index)

    tracker = PathTracker(options)
    flags_to_map = {c: normalized_to.flags[c] for c in system.flags}
    results = transport(system, [x for _, x in starts], system.flags, flags_to_map, rng, tracker, threads)
    stats = PathStats().record(results)

    moved: List[Optional[np.ndarray]] = [None] * len(solutions)
    path_results: List[Optional[PathResult]] = [None] * len(solutions)
    for (index, _), result in zip(starts, results):
        path_results[index] = result
        if not result.success:
            failures.append(index)
            continue
        plane = solve_linear(g_to, embed_point(patch, result.endpoint))
        if not check_incidence(plane, target, incidence_tol):
            logger.warning(f"Solution {index} tracked but fails incidence on the target instance")
            failures.append(index)
            continue
        moved[index] = plane
    failures.sort()
    logger.info(f"Moved {len(solutions) - len(failures)}/{len(solutions)} solutions to the new flags")
    return ChangeFlagsResult(moved, path_results, failures, stats)
