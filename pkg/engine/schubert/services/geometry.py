"""
Flags, instances, incidence checks and Richardson coordinate patches on
the Grassmannian Gr(k, n).

A flag is an invertible n x n matrix whose first i columns span F_i. A
k-plane H is an n x k matrix whose column span is H. Row and column
indices of patches are 1-based to match bracket entries.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from schubert.exceptions import DegenerateFlagsError, PatchMissError, PreconditionError, ShapeMismatchError
from schubert.models.schubert_types import Bracket, SchubertInstance, SchubertProblem
from schubert.services.combinatorics import condition_order, richardson_dimension, trivial_bracket, validate_problem
from schubert.services.linalg import (
    RandomSource,
    as_matrix,
    numerical_rank,
    orthonormal_columns,
    random_flag,
    singular_values,
    solve_linear,
)

logger = logging.getLogger(__name__)

DEFAULT_INCIDENCE_TOL = 1e-8
GENERAL_POSITION_TOL = 1e-8
PATCH_TOL = 1e-6


def standard_flag(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex)


def opposite_flag(n: int) -> np.ndarray:
    """Columns e_n, e_{n-1}, ..., e_1"""
    return np.eye(n, dtype=complex)[:, ::-1].copy()


def random_instance(problem: SchubertProblem, rng: RandomSource) -> SchubertInstance:
    """
    Pair every condition with an independent random flag. Conditions are
    stored by decreasing codimension, the order the solver works in.
    """
    validate_problem(problem)
    order = condition_order(problem)
    pairs = [(problem.conditions[i], random_flag(problem.n, rng)) for i in order]
    logger.info(f"Generated random instance with {len(pairs)} flags on Gr({problem.k},{problem.n})")
    return SchubertInstance(problem.k, problem.n, pairs)


def pad_instances(instances: Sequence[SchubertInstance], rng: RandomSource) -> List[SchubertInstance]:
    """
    Append trivial conditions until every instance has two, so the first two
    can always become a coordinate patch. All instances share the padding
    flags, which therefore stay fixed along any homotopy between them.
    """
    if not instances:
        return []
    k, n = instances[0].k, instances[0].n
    missing = max(0, 2 - len(instances[0].pairs))
    if missing == 0:
        return list(instances)
    padding = [(trivial_bracket(k, n), random_flag(n, rng)) for _ in range(missing)]
    logger.debug(f"Padding {len(instances)} instance(s) with {missing} trivial condition(s)")
    return [SchubertInstance(k, n, list(instance.pairs) + padding) for instance in instances]


# Incidence


@dataclass(frozen=True)
class IncidenceResidual:
    """
    Relative singular value s_{r+1}/s_1 of [orth(H) | orth(F_{a_i})] with
    r = k + a_i - i; zero exactly when dim(H cap F_{a_i}) >= i.
    """

    condition: int
    index: int
    value: float
    rank: int
    expected_rank: int


def _check_plane(h, n: int, k: int) -> np.ndarray:
    plane = as_matrix(h)
    if plane.shape != (n, k):
        raise ShapeMismatchError(f"k-plane has shape {plane.shape}, expected ({n}, {k})")
    return plane


def incidence_residuals(
    h, instance: SchubertInstance, tol: float = DEFAULT_INCIDENCE_TOL
) -> List[IncidenceResidual]:
    """One residual per condition and nontrivial index i (a_i < n-k+i)"""
    k, n = instance.k, instance.n
    plane = _check_plane(h, n, k)
    full_rank = numerical_rank(plane) == k
    basis = orthonormal_columns(plane)
    residuals = []
    for c, (bracket, flag) in enumerate(instance.pairs):
        for i, a in enumerate(bracket.entries, start=1):
            if a >= n - k + i:
                continue
            expected = k + a - i
            if not full_rank:
                residuals.append(IncidenceResidual(c, i, float("inf"), -1, expected))
                continue
            stacked = np.hstack([basis, orthonormal_columns(flag[:, :a])])
            s = singular_values(stacked)
            value = float(s[expected] / s[0]) if s[0] > 0 else float("inf")
            rank = int(np.count_nonzero(s > tol * s[0]))
            residuals.append(IncidenceResidual(c, i, value, rank, expected))
    return residuals


def worst_incidence_residual(h, instance: SchubertInstance) -> Optional[IncidenceResidual]:
    """The residual of the most violated (condition, index); None when every condition is trivial"""
    return max(incidence_residuals(h, instance), key=lambda r: r.value, default=None)


def max_incidence_residual(h, instance: SchubertInstance) -> float:
    worst = worst_incidence_residual(h, instance)
    return worst.value if worst is not None else 0.0


def check_incidence(h, instance: SchubertInstance, tol: float = DEFAULT_INCIDENCE_TOL) -> bool:
    """True iff dim(H cap F_{a_i}) >= i for every condition (a, F) and every i"""
    return all(r.value <= tol for r in incidence_residuals(h, instance, tol))


# General position and normalization


def flags_in_general_position(f, g, tol: float = GENERAL_POSITION_TOL) -> bool:
    """F_i and G_{n-i} meet only in 0 for every i"""
    f = as_matrix(f)
    g = as_matrix(g)
    n = f.shape[0]
    for i in range(1, n):
        stacked = np.hstack([orthonormal_columns(f[:, :i]), orthonormal_columns(g[:, : n - i])])
        s = singular_values(stacked)
        if s[-1] <= tol * s[0]:
            return False
    return True


def check_general_position(instance: SchubertInstance, tol: float = GENERAL_POSITION_TOL) -> None:
    """Raise DegenerateFlagsError naming the first pair of flags that are not in general position"""
    flags = instance.flags
    for i in range(len(flags)):
        for j in range(i + 1, len(flags)):
            if not flags_in_general_position(flags[i], flags[j], tol):
                raise DegenerateFlagsError(
                    f"flags of conditions {i} and {j} are not in general position", conditions=(i, j)
                )


def normalize_instance(
    instance: SchubertInstance, tol: float = GENERAL_POSITION_TOL
) -> Tuple[SchubertInstance, np.ndarray]:
    """
    Find g in GL_n moving the first flag to the standard flag and the
    second to the opposite flag; return (g . instance, g).

    Column i of g^{-1} spans F1_i cap F2_{n+1-i}. The first two flags of the
    result are exactly the identity and the anti-diagonal permutation.
    """
    if len(instance.pairs) < 2:
        raise PreconditionError("normalization needs at least two conditions")
    n = instance.n
    first, second = instance.flags[0], instance.flags[1]
    basis = np.zeros((n, n), dtype=complex)
    for i in range(1, n + 1):
        block = np.hstack([first[:, :i], -second[:, : n + 1 - i]])
        _, s, vh = np.linalg.svd(block)
        # n x (n+1): one-dimensional kernel in general position
        if s[-1] <= tol * s[0]:
            raise DegenerateFlagsError(
                f"flags 0 and 1 meet in too large a subspace at level {i}", conditions=(0, 1)
            )
        kernel = vh[-1].conj()
        vector = first[:, :i] @ kernel[:i]
        norm = np.linalg.norm(vector)
        if norm <= tol:
            raise DegenerateFlagsError(f"flags 0 and 1 are degenerate at level {i}", conditions=(0, 1))
        basis[:, i - 1] = vector / norm
    s = singular_values(basis)
    if s[-1] <= tol * s[0]:
        raise DegenerateFlagsError("flags 0 and 1 are not in general position", conditions=(0, 1))
    g = solve_linear(basis, np.eye(n, dtype=complex))
    flags = [standard_flag(n), opposite_flag(n)] + [g @ flag for flag in instance.flags[2:]]
    return instance.with_flags(flags), g


# Coordinate patches


@dataclass(frozen=True)
class CoordinatePatch:
    """
    Echelon chart of the Richardson variety X_a(standard) cap X_b(opposite).

    Column i has a 1 in row a_i and free entries in rows gamma_i <= r < a_i,
    where gamma_i = n + 1 - b_{k+1-i}; every other entry is zero.
    """

    k: int
    n: int
    pivots: Bracket
    opposite: Bracket
    lower: Tuple[int, ...]
    free_positions: Tuple[Tuple[int, int], ...]

    @property
    def dimension(self) -> int:
        return len(self.free_positions)

    @property
    def free_rows(self) -> np.ndarray:
        return np.array([r - 1 for r, _ in self.free_positions], dtype=int)

    @property
    def free_cols(self) -> np.ndarray:
        return np.array([c - 1 for _, c in self.free_positions], dtype=int)

    def base_matrix(self) -> np.ndarray:
        base = np.zeros((self.n, self.k), dtype=complex)
        for i, a in enumerate(self.pivots.entries):
            base[a - 1, i] = 1.0
        return base


def build_patch(a: Bracket, b: Bracket) -> CoordinatePatch:
    dimension = richardson_dimension(a, b)
    if dimension is None:
        raise PreconditionError(f"brackets {a} and {b} have an empty Richardson variety")
    k, n = a.k, a.n
    lower = tuple(n + 1 - b.entries[k - i] for i in range(1, k + 1))
    free = tuple(
        (r, i)
        for i in range(1, k + 1)
        for r in range(lower[i - 1], a.entries[i - 1])
    )
    assert len(free) == dimension, f"patch for {a},{b} has {len(free)} coordinates, expected {dimension}"
    return CoordinatePatch(k, n, a, b, lower, free)


def embed_point(patch: CoordinatePatch, x) -> np.ndarray:
    """The n x k matrix of the patch at coordinates x"""
    x = np.asarray(x, dtype=complex).ravel()
    if x.shape[0] != patch.dimension:
        raise ShapeMismatchError(f"patch has {patch.dimension} coordinates, got {x.shape[0]}")
    h = patch.base_matrix()
    if patch.dimension:
        h[patch.free_rows, patch.free_cols] = x
    return h


def patch_coordinates(patch: CoordinatePatch, h, tol: float = PATCH_TOL) -> np.ndarray:
    """
    Coordinates of the k-plane h in the patch. Column i is the unique (up to
    scale) vector of h supported on rows gamma_i..a_i, scaled to 1 in row a_i.
    """
    plane = _check_plane(h, patch.n, patch.k)
    basis = orthonormal_columns(plane)
    columns = np.zeros((patch.n, patch.k), dtype=complex)
    for i in range(patch.k):
        low, pivot = patch.lower[i], patch.pivots.entries[i]
        outside = [r for r in range(patch.n) if r < low - 1 or r > pivot - 1]
        if outside:
            _, s, vh = np.linalg.svd(basis[outside, :])
            s = np.concatenate([s, np.zeros(patch.k - s.shape[0])])
            if s[-1] > tol:
                raise PatchMissError(f"plane is off the Richardson variety (column {i + 1}, residual {s[-1]:.2e})")
            if patch.k > 1 and s[-2] <= tol:
                raise PatchMissError(f"column {i + 1} of the plane is not determined by the patch")
            combination = vh[-1].conj()
        else:
            combination = np.ones(patch.k, dtype=complex) if patch.k == 1 else None
            if combination is None:
                raise PatchMissError(f"column {i + 1} of the patch is unconstrained")
        vector = basis @ combination
        if abs(vector[pivot - 1]) <= tol:
            raise PatchMissError(f"plane has no pivot in row {pivot} (column {i + 1})")
        columns[:, i] = vector / vector[pivot - 1]
    return columns[patch.free_rows, patch.free_cols] if patch.dimension else np.zeros(0, dtype=complex)


def flag_through_plane(bracket: Bracket, h, rng: RandomSource) -> np.ndarray:
    """
    A random flag F with H in X_a F: a basis w_1..w_k of H sits in columns
    a_1..a_k, so F_{a_i} contains w_1..w_i.
    """
    plane = as_matrix(h)
    n, k = plane.shape
    flag = rng.complex_normal((n, n))
    basis = plane @ rng.complex_normal((k, k))
    for i, a in enumerate(bracket.entries):
        flag[:, a - 1] = basis[:, i]
    return flag


def plane_distance(h1, h2) -> float:
    """Sine of the largest principal angle between two column spans"""
    q1 = orthonormal_columns(h1)
    q2 = orthonormal_columns(h2)
    # residual of q2 after projecting onto span(q1); no 1 - cos^2 cancellation
    s = singular_values(q2 - q1 @ (q1.conj().T @ q2))
    return float(min(1.0, s[0])) if s.size else 0.0
