import numpy as np
import pytest
from numpy.testing import assert_allclose

from schubert.exceptions import ShapeMismatchError, SingularMatrixError
from schubert.services.linalg import (
    RandomSource,
    condition_number,
    det_and_adjugate,
    determinant,
    numerical_rank,
    random_flag,
    solve_linear,
)


def cofactor_determinant(m):
    """Laplace expansion along the first row"""
    size = m.shape[0]
    if size == 0:
        return 1.0
    if size == 1:
        return m[0, 0]
    total = 0.0
    for j in range(size):
        minor = np.delete(np.delete(m, 0, axis=0), j, axis=1)
        total += (-1) ** j * m[0, j] * cofactor_determinant(minor)
    return total


def test_seeded_streams_repeat():
    a = RandomSource(5).complex_normal((3, 3))
    b = RandomSource(5).complex_normal((3, 3))
    assert np.array_equal(a, b)
    first = RandomSource(5).substream(1).complex_normal(4)
    second = RandomSource(5).substream(2).complex_normal(4)
    assert not np.allclose(first, second)
    assert np.array_equal(first, RandomSource(5).substream(1).complex_normal(4))


def test_unit_complex_on_circle(rng):
    values = rng.unit_complex(50)
    assert_allclose(np.abs(values), 1.0, atol=1e-14)


def test_determinant_matches_cofactor_expansion(rng):
    for size in range(1, 6):
        m = rng.complex_normal((size, size))
        assert abs(determinant(m) - cofactor_determinant(m)) < 1e-10 * max(1.0, abs(cofactor_determinant(m)))


def test_determinant_of_permutation():
    p = np.eye(4)[:, [1, 0, 3, 2]]
    assert determinant(p) == pytest.approx(1.0)
    assert determinant(np.eye(3)[:, [1, 0, 2]]) == pytest.approx(-1.0)
    with pytest.raises(ShapeMismatchError):
        determinant(np.ones((2, 3)))


def test_numerical_rank():
    assert numerical_rank(np.eye(4)) == 4
    assert numerical_rank(np.outer([1, 2, 3], [1, 1, 1])) == 1
    assert numerical_rank(np.zeros((3, 3))) == 0
    assert numerical_rank(np.diag([1.0, 1.0, 1e-9])) == 2


def test_solve_linear_square_and_tall(rng):
    a = rng.complex_normal((5, 5))
    x = rng.complex_normal(5)
    assert_allclose(solve_linear(a, a @ x), x, atol=1e-10)
    tall = rng.complex_normal((7, 3))
    y = rng.complex_normal(3)
    assert_allclose(solve_linear(tall, tall @ y), y, atol=1e-10)


def test_solve_linear_refuses_singular():
    with pytest.raises(SingularMatrixError):
        solve_linear(np.array([[1.0, 2.0], [2.0, 4.0]]), np.array([1.0, 2.0]))
    with pytest.raises(ShapeMismatchError):
        solve_linear(np.ones((2, 3)), np.ones(2))


def test_adjugate_identity(rng):
    stack = rng.complex_normal((6, 4, 4))
    dets, adj = det_and_adjugate(stack)
    for g in range(6):
        assert_allclose(dets[g], np.linalg.det(stack[g]), rtol=1e-10)
        assert_allclose(stack[g] @ adj[g], dets[g] * np.eye(4), atol=1e-10)


def test_adjugate_of_singular_matrix():
    m = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [1.0, 0.0, 1.0]], dtype=complex)
    dets, adj = det_and_adjugate(m[None])
    assert abs(dets[0]) < 1e-12
    # cofactor (0, 0) of m is det [[4, 6], [0, 1]] = 4, stored at adj[0, 0]
    assert_allclose(adj[0][0, 0], 4.0, atol=1e-10)
    assert_allclose(m @ adj[0], np.zeros((3, 3)), atol=1e-10)


def test_random_flag_is_well_conditioned(rng):
    flag = random_flag(6, rng)
    assert flag.shape == (6, 6)
    assert condition_number(flag) < 1e6
