"""
Dense complex linear algebra and seeded randomness used by the numerical
services. Everything is double precision.
"""

import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg as sla

from schubert.exceptions import ShapeMismatchError, SingularMatrixError

logger = logging.getLogger(__name__)

DEFAULT_RANK_TOL = 1e-7
MAX_SOLVE_CONDITION = 1e13
FLAG_CONDITION_LIMIT = 1e6
FLAG_ATTEMPTS = 100


class RandomSource:
    """
    Seeded complex random numbers.

    Backed by numpy's PCG64 generator; substreams are derived from the
    entropy pair (seed, index) through SeedSequence, so the same seed gives
    the same numbers on every platform.
    """

    def __init__(self, seed: Optional[int] = None):
        if seed is None:
            seed = int(np.random.SeedSequence().entropy % (2**63))
        self.seed = int(seed)
        self._generator = np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed)))

    def substream(self, index: int) -> "RandomSource":
        child = RandomSource.__new__(RandomSource)
        child.seed = self.seed
        child._generator = np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, int(index)])))
        return child

    def complex_normal(self, shape: Union[int, Tuple[int, ...]]) -> np.ndarray:
        """Independent standard complex Gaussians (unit variance)"""
        real = self._generator.standard_normal(shape)
        imag = self._generator.standard_normal(shape)
        return (real + 1j * imag) / np.sqrt(2.0)

    def unit_complex(self, size: Optional[int] = None):
        """Uniform points on the unit circle"""
        angles = self._generator.uniform(0.0, 2.0 * np.pi, size)
        return np.exp(1j * angles)

    def integers(self, low: int, high: int) -> int:
        return int(self._generator.integers(low, high))


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ShapeMismatchError(f"expected a matrix, got an array of shape {a.shape}")
    return a


def determinant(m) -> complex:
    """Determinant via LU with partial pivoting"""
    a = as_matrix(m)
    rows, cols = a.shape
    if rows != cols:
        raise ShapeMismatchError(f"determinant of a non-square {rows}x{cols} matrix")
    if rows == 0:
        return 1.0 + 0.0j
    lu, piv = sla.lu_factor(a, check_finite=True)
    swaps = int(np.count_nonzero(piv != np.arange(rows)))
    sign = -1.0 if swaps % 2 else 1.0
    return complex(sign * np.prod(np.diag(lu)))


def singular_values(m) -> np.ndarray:
    a = as_matrix(m)
    if a.size == 0:
        return np.zeros(0)
    return np.linalg.svd(a, compute_uv=False)


def numerical_rank(m, tol: float = DEFAULT_RANK_TOL) -> int:
    """Number of singular values above tol times the largest one"""
    if tol <= 0:
        raise ValueError("rank tolerance must be positive")
    s = singular_values(m)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def condition_number(m) -> float:
    s = singular_values(m)
    if s.size == 0:
        return 1.0
    if s[-1] == 0.0:
        return float("inf")
    return float(s[0] / s[-1])


def solve_linear(a, b, max_condition: float = MAX_SOLVE_CONDITION) -> np.ndarray:
    """
    Solve a x = b through the singular value decomposition of a.

    Square systems get the exact solution, tall ones the least-squares
    solution. Raises SingularMatrixError when a is rank deficient or its
    condition number exceeds max_condition.
    """
    a = as_matrix(a)
    b_arr = np.asarray(b, dtype=complex)
    vector = b_arr.ndim == 1
    rhs = b_arr.reshape(-1, 1) if vector else b_arr
    rows, cols = a.shape
    if rhs.shape[0] != rows:
        raise ShapeMismatchError(f"right-hand side has {rhs.shape[0]} rows, matrix has {rows}")
    if rows < cols:
        raise ShapeMismatchError(f"underdetermined {rows}x{cols} system")
    if not np.all(np.isfinite(a)) or not np.all(np.isfinite(rhs)):
        raise SingularMatrixError("non-finite entries in linear system")
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    if s[-1] == 0.0 or s[0] / s[-1] > max_condition:
        condition = float("inf") if s[-1] == 0.0 else float(s[0] / s[-1])
        raise SingularMatrixError(f"matrix condition number {condition:.3g} too large", condition)
    x = vh.conj().T @ ((u.conj().T @ rhs) / s[:, None])
    return x.ravel() if vector else x


def det_and_adjugate(stack: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Determinants and adjugates of a stack of square matrices (shape (g, m, m)).

    Uses A = U S V^H, so adj(A) = det(U) det(V^H) V adj(S) U^H with
    adj(S) = diag(prod_{j != i} s_j). This stays accurate when A is singular,
    which is exactly where the determinantal equations vanish.
    """
    stack = np.asarray(stack, dtype=complex)
    g, m, _ = stack.shape
    if m == 0:
        return np.ones(g, dtype=complex), np.zeros((g, 0, 0), dtype=complex)
    u, s, vh = np.linalg.svd(stack)
    phase = np.linalg.det(u) * np.linalg.det(vh)
    dets = phase * np.prod(s, axis=1)
    if m == 1:
        adj_s = np.ones((g, 1))
    else:
        # products of all singular values but one, without dividing
        left = np.cumprod(np.concatenate([np.ones((g, 1)), s[:, :-1]], axis=1), axis=1)
        right = np.cumprod(np.concatenate([np.ones((g, 1)), s[:, :0:-1]], axis=1), axis=1)[:, ::-1]
        adj_s = left * right
    v = np.conj(np.swapaxes(vh, 1, 2))
    uh = np.conj(np.swapaxes(u, 1, 2))
    adj = phase[:, None, None] * (v * adj_s[:, None, :]) @ uh
    return dets, adj


def random_flag(n: int, rng: RandomSource, condition_limit: float = FLAG_CONDITION_LIMIT) -> np.ndarray:
    """Random complex Gaussian n x n matrix with condition number below the limit"""
    if n < 2:
        raise ValueError(f"flags need n >= 2, got {n}")
    for attempt in range(FLAG_ATTEMPTS):
        flag = rng.complex_normal((n, n))
        if condition_number(flag) < condition_limit:
            return flag
        logger.debug(f"Regenerating random flag (attempt {attempt + 1})")
    raise SingularMatrixError(f"could not draw a well-conditioned {n}x{n} flag in {FLAG_ATTEMPTS} tries")


def orthonormal_columns(m) -> np.ndarray:
    """Orthonormal basis of the column span (reduced QR)"""
    a = as_matrix(m)
    if a.shape[1] == 0:
        return a
    q, _ = np.linalg.qr(a)
    return q


def max_abs(values: Sequence[complex]) -> float:
    arr = np.asarray(values)
    return float(np.max(np.abs(arr))) if arr.size else 0.0
