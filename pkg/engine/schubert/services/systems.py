"""
Determinantal polynomial systems in patch coordinates.

A normalized instance has its first two flags standard and opposite; those
two conditions are absorbed by the coordinate patch. Every remaining
condition (a, F) with a nontrivial index i becomes the vanishing of all
minors of size k + a_i - i + 1 of the n x (k + a_i) matrix [H(x) | F_{a_i}].
Each patch coordinate occupies exactly one entry of H(x), so the partial
derivative of a minor is a cofactor of its submatrix.
"""

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from schubert.exceptions import PreconditionError, ShapeMismatchError
from schubert.models.schubert_types import Bracket, SchubertInstance
from schubert.services.combinatorics import codimension
from schubert.services.geometry import CoordinatePatch, embed_point, opposite_flag, standard_flag
from schubert.services.linalg import RandomSource, det_and_adjugate

logger = logging.getLogger(__name__)

DEGREE_TOL = 1e-8


@dataclass(frozen=True)
class MinorBlock:
    """All minors of one rank condition rank[H | F_{a_i}] <= k + a_i - i"""

    condition: int
    index: int
    flag_columns: int
    size: int
    rows: np.ndarray
    cols: np.ndarray

    @property
    def count(self) -> int:
        return self.rows.shape[0]


@dataclass
class _SizeGroup:
    ids: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    pos_r: np.ndarray
    pos_c: np.ndarray
    mask: np.ndarray


def _minor_block(condition: int, index: int, k: int, n: int, flag_columns: int) -> MinorBlock:
    size = k + flag_columns - index + 1
    row_sets = list(combinations(range(n), size))
    col_sets = list(combinations(range(k + flag_columns), size))
    rows = np.array([r for r in row_sets for _ in col_sets], dtype=int).reshape(-1, size)
    cols = np.array([c for _ in row_sets for c in col_sets], dtype=int).reshape(-1, size)
    return MinorBlock(condition, index, flag_columns, size, rows, cols)


class DeterminantalSystem:
    """
    Equations = mixing @ (scaled minors). Before squaring up, mixing is the
    identity; afterwards each condition contributes codimension-many random
    combinations of its own minors.
    """

    def __init__(
        self,
        patch: CoordinatePatch,
        conditions: Mapping[int, Bracket],
        flags: Mapping[int, np.ndarray],
        blocks: Sequence[MinorBlock],
        scales: Optional[np.ndarray] = None,
        mixing: Optional[np.ndarray] = None,
        equation_conditions: Optional[Sequence[int]] = None,
    ):
        self.patch = patch
        self.k, self.n = patch.k, patch.n
        self.conditions = dict(conditions)
        self.flags = {c: np.asarray(f, dtype=complex) for c, f in flags.items()}
        self.blocks = list(blocks)
        self.minor_conditions = np.array(
            [block.condition for block in self.blocks for _ in range(block.count)], dtype=int
        )
        self.minor_indices = np.array([block.index for block in self.blocks for _ in range(block.count)], dtype=int)
        self._layout()
        self.scales = self._flag_scales(self.flags) if scales is None else np.asarray(scales, dtype=float)
        if mixing is None:
            mixing = np.eye(self.num_minors, dtype=complex)
            equation_conditions = self.minor_conditions.tolist()
        self.mixing = np.asarray(mixing, dtype=complex)
        self.equation_conditions = list(equation_conditions)

    # layout

    def _layout(self):
        """Offsets of each block's flag columns inside the assembled matrix [H | F... ]"""
        k = self.k
        offsets = []
        width = k
        for block in self.blocks:
            offsets.append(width)
            width += block.flag_columns
        self._offsets = offsets
        self._width = width

        free_rows = self.patch.free_rows
        free_cols = self.patch.free_cols
        by_size: Dict[int, List[Tuple[int, np.ndarray, np.ndarray]]] = {}
        start = 0
        for block, offset in zip(self.blocks, offsets):
            # shift flag columns (>= k) of each minor to the block's segment
            cols = np.where(block.cols >= k, block.cols - k + offset, block.cols)
            ids = np.arange(start, start + block.count)
            by_size.setdefault(block.size, []).append((ids, block.rows, cols))
            start += block.count

        self._groups: List[_SizeGroup] = []
        for size, parts in sorted(by_size.items()):
            ids = np.concatenate([p[0] for p in parts])
            rows = np.concatenate([p[1] for p in parts])
            cols = np.concatenate([p[2] for p in parts])
            g = rows.shape[0]
            nvars = free_rows.shape[0]
            pos_r = np.full((g, nvars), -1, dtype=int)
            pos_c = np.full((g, nvars), -1, dtype=int)
            for j in range(nvars):
                hit_r = rows == free_rows[j]
                hit_c = cols == free_cols[j]
                pos_r[:, j] = np.where(hit_r.any(axis=1), hit_r.argmax(axis=1), -1)
                pos_c[:, j] = np.where(hit_c.any(axis=1), hit_c.argmax(axis=1), -1)
            mask = (pos_r >= 0) & (pos_c >= 0)
            self._groups.append(
                _SizeGroup(ids, rows, cols, np.maximum(pos_r, 0), np.maximum(pos_c, 0), mask)
            )

    def _flag_scales(self, flags: Mapping[int, np.ndarray]) -> np.ndarray:
        """1 / product of the norms of the flag columns used by each minor"""
        scales = np.ones(self.num_minors)
        start = 0
        for block in self.blocks:
            norms = np.linalg.norm(flags[block.condition][:, : block.flag_columns], axis=0)
            for g in range(block.count):
                used = block.cols[g][block.cols[g] >= self.k] - self.k
                product = float(np.prod(norms[used])) if used.size else 1.0
                scales[start + g] = 1.0 / product if product > 0 else 1.0
            start += block.count
        return scales

    # shape

    @property
    def num_vars(self) -> int:
        return self.patch.dimension

    @property
    def num_minors(self) -> int:
        return int(sum(block.count for block in self.blocks))

    @property
    def num_equations(self) -> int:
        return self.mixing.shape[0]

    @property
    def is_square(self) -> bool:
        return self.num_equations == self.num_vars

    # evaluation

    def _assemble(self, h: np.ndarray, flags: Mapping[int, np.ndarray]) -> np.ndarray:
        parts = [h] + [flags[block.condition][:, : block.flag_columns] for block in self.blocks]
        return np.hstack(parts)

    def _check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex).ravel()
        if x.shape[0] != self.num_vars:
            raise ShapeMismatchError(f"system has {self.num_vars} variables, got a point with {x.shape[0]}")
        return x

    def minors(
        self,
        x,
        flags: Optional[Mapping[int, np.ndarray]] = None,
        flag_velocity: Optional[Mapping[int, np.ndarray]] = None,
        jacobian: bool = True,
    ) -> Tuple[np.ndarray, Optional[np.ndarray], Optional[np.ndarray]]:
        """
        Scaled minors at x, their x-Jacobian and, when flag_velocity is
        given, their derivative along the flag motion dF/dt.
        """
        x = self._check_point(x)
        flags = self.flags if flags is None else flags
        big = self._assemble(embed_point(self.patch, x), flags)
        values = np.zeros(self.num_minors, dtype=complex)
        jac = np.zeros((self.num_minors, self.num_vars), dtype=complex) if jacobian else None
        dt = None
        dbig = None
        if flag_velocity is not None:
            dt = np.zeros(self.num_minors, dtype=complex)
            dbig = self._assemble(np.zeros((self.n, self.k), dtype=complex), flag_velocity)
        for group in self._groups:
            subs = big[group.rows[:, :, None], group.cols[:, None, :]]
            dets, adj = det_and_adjugate(subs)
            values[group.ids] = dets
            if jac is not None and self.num_vars:
                g_index = np.arange(group.rows.shape[0])[:, None]
                # d det / d A[p, q] = cofactor(p, q) = adj[q, p]
                entries = adj[g_index, group.pos_c, group.pos_r]
                jac[group.ids] = np.where(group.mask, entries, 0.0)
            if dbig is not None:
                dsubs = dbig[group.rows[:, :, None], group.cols[:, None, :]]
                dt[group.ids] = np.einsum("gij,gji->g", adj, dsubs)
        values *= self.scales
        if jac is not None:
            jac *= self.scales[:, None]
        if dt is not None:
            dt *= self.scales
        if not np.all(np.isfinite(values)):
            raise FloatingPointError("non-finite determinantal residual")
        return values, jac, dt

    def evaluate(self, x, flags: Optional[Mapping[int, np.ndarray]] = None) -> np.ndarray:
        values, _, _ = self.minors(x, flags, jacobian=False)
        return self.mixing @ values

    def jacobian(self, x, flags: Optional[Mapping[int, np.ndarray]] = None) -> np.ndarray:
        _, jac, _ = self.minors(x, flags)
        return self.mixing @ jac

    def evaluate_with_jacobian(self, x, flags: Optional[Mapping[int, np.ndarray]] = None):
        values, jac, _ = self.minors(x, flags)
        return self.mixing @ values, self.mixing @ jac

    def with_flags(self, flags: Mapping[int, np.ndarray]) -> "DeterminantalSystem":
        """Same equations (scales and mixing kept) for other flags"""
        return DeterminantalSystem(
            self.patch, self.conditions, flags, self.blocks, self.scales, self.mixing, self.equation_conditions
        )

    def equation_degrees(self, rng: RandomSource) -> List[int]:
        """
        Total degree of each equation, read off the restriction to a random
        complex line x = p + s v sampled at the (k+1)-th roots of unity.
        Minors are multilinear in the columns of H, so degrees are <= k.
        """
        if self.num_equations == 0:
            return []
        samples = self.k + 1
        p = rng.complex_normal(self.num_vars)
        v = rng.complex_normal(self.num_vars)
        nodes = np.exp(2j * np.pi * np.arange(samples) / samples)
        values = np.array([self.evaluate(p + s * v) for s in nodes])
        coefficients = np.fft.fft(values, axis=0) / samples
        degrees = []
        for e in range(self.num_equations):
            magnitudes = np.abs(coefficients[:, e])
            top = magnitudes.max()
            if top == 0.0:
                degrees.append(0)
                continue
            nonzero = np.nonzero(magnitudes > DEGREE_TOL * top)[0]
            degrees.append(int(nonzero.max()))
        return degrees

    def provenance(self) -> List[Tuple[int, int]]:
        """(condition, i) of every raw minor"""
        return list(zip(self.minor_conditions.tolist(), self.minor_indices.tolist()))


def is_normalized(instance: SchubertInstance) -> bool:
    if len(instance.pairs) < 2:
        return False
    n = instance.n
    return np.array_equal(instance.flags[0], standard_flag(n)) and np.array_equal(instance.flags[1], opposite_flag(n))


def build_system(instance: SchubertInstance, patch: CoordinatePatch) -> DeterminantalSystem:
    """Conditions 3..s of a normalized instance as minor equations on the patch"""
    if not is_normalized(instance):
        raise PreconditionError("build_system needs a normalized instance (standard and opposite first flags)")
    if instance.brackets[0] != patch.pivots or instance.brackets[1] != patch.opposite:
        raise PreconditionError("patch does not belong to the first two conditions of the instance")
    k, n = instance.k, instance.n
    blocks: List[MinorBlock] = []
    conditions: Dict[int, Bracket] = {}
    flags: Dict[int, np.ndarray] = {}
    for c in range(2, len(instance.pairs)):
        bracket, flag = instance.pairs[c]
        conditions[c] = bracket
        flags[c] = flag
        for i, a in enumerate(bracket.entries, start=1):
            if a >= n - k + i:
                continue
            blocks.append(_minor_block(c, i, k, n, a))
    system = DeterminantalSystem(patch, conditions, flags, blocks)
    logger.info(
        f"Built determinantal system: {system.num_minors} minors in {system.num_vars} variables "
        f"from {len(conditions)} conditions"
    )
    return system


def square_up(system: DeterminantalSystem, rng: RandomSource) -> DeterminantalSystem:
    """
    Replace the minors of each condition by codimension-many random complex
    combinations of them. Conditions that already contribute exactly their
    codimension in minors keep them unchanged.
    """
    if system.num_minors < system.num_vars:
        raise PreconditionError(
            f"under-determined system: {system.num_minors} equations in {system.num_vars} variables"
        )
    if system.num_minors == system.num_vars:
        return system
    rows = []
    equation_conditions = []
    for c in sorted(system.conditions):
        members = np.nonzero(system.minor_conditions == c)[0]
        d = codimension(system.conditions[c])
        if members.size == 0 or d == 0:
            continue
        if members.size == d:
            combination = np.eye(d, dtype=complex)
        else:
            combination = rng.complex_normal((d, members.size))
        block = np.zeros((d, system.num_minors), dtype=complex)
        block[:, members] = combination
        rows.append(block)
        equation_conditions.extend([c] * d)
    mixing = np.vstack(rows) if rows else np.zeros((0, system.num_minors), dtype=complex)
    squared = DeterminantalSystem(
        system.patch, system.conditions, system.flags, system.blocks, system.scales, mixing, equation_conditions
    )
    logger.info(f"Squared up {system.num_minors} minors to {squared.num_equations} equations")
    return squared
