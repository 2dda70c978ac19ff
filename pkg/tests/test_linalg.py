import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from vcfam.errors import ShapeError, SingularityError, SizingError
from vcfam.linalg import kron, solve_spd, sym_eig, sym_matrix_power, trace


def _rng(seed=0):
    return np.random.default_rng(seed)


class TestKron:
    def test_hand_computed_product(self):
        # frozen by hand: ([[1,2],[3,4]] (x) [[0,1],[1,0]])
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        b = np.array([[0.0, 1.0], [1.0, 0.0]])
        expected = np.array(
            [
                [0.0, 1.0, 0.0, 2.0],
                [1.0, 0.0, 2.0, 0.0],
                [0.0, 3.0, 0.0, 4.0],
                [3.0, 0.0, 4.0, 0.0],
            ]
        )
        assert_allclose(kron(a, b), expected)

    def test_identity_blocks(self):
        a = _rng().standard_normal((3, 2))
        out = kron(np.eye(2), a)
        assert out.shape == (6, 4)
        assert_allclose(out[:3, :2], a)
        assert_allclose(out[3:, 2:], a)
        assert_allclose(out[:3, 2:], 0)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 3))
    def test_mixed_product_property(self, seed):
        # (A (x) B)(C (x) D) == (AC) (x) (BD)
        r = _rng(seed)
        a, c = r.standard_normal((2, 3)), r.standard_normal((3, 2))
        b, d = r.standard_normal((2, 2)), r.standard_normal((2, 3))
        assert_allclose(kron(a, b) @ kron(c, d), kron(a @ c, b @ d), atol=1e-12)

    def test_refuses_huge_result(self):
        with pytest.raises(SizingError):
            kron(np.ones((20000, 1)), np.ones((20000, 1)))

    def test_rejects_non_2d(self):
        with pytest.raises(ShapeError):
            kron(np.ones(3), np.eye(2))


class TestSymEig:
    def test_two_by_two_analytic(self):
        # eigenvalues of [[2,1],[1,2]] are 3 and 1 (pen and paper)
        eig = sym_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert_allclose(eig.values, [3.0, 1.0], atol=1e-12)
        s = 1 / np.sqrt(2)
        first = eig.vectors[:, 0] * np.sign(eig.vectors[0, 0])
        assert_allclose(first, [s, s], atol=1e-12)

    def test_reconstruction_and_order(self):
        r = _rng(1)
        m = r.standard_normal((12, 12))
        a = m + m.T
        eig = sym_eig(a)
        assert np.all(np.diff(eig.values) <= 1e-12)
        recon = (eig.vectors * eig.values) @ eig.vectors.T
        assert_allclose(recon, a, atol=1e-10 * np.abs(a).max())
        assert_allclose(eig.vectors.T @ eig.vectors, np.eye(12), atol=1e-10)

    def test_rejects_asymmetric(self):
        with pytest.raises(ShapeError):
            sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_deterministic(self):
        a = _rng(2).standard_normal((8, 8))
        a = a @ a.T
        e1, e2 = sym_eig(a), sym_eig(a)
        assert np.array_equal(e1.values, e2.values)
        assert np.array_equal(e1.vectors, e2.vectors)


class TestSolveSpd:
    def test_identity_passthrough(self):
        b = _rng(3).standard_normal(5)
        assert_allclose(solve_spd(np.eye(5), b), b)

    def test_matches_general_solver(self):
        r = _rng(4)
        m = r.standard_normal((20, 20))
        a = m @ m.T + 20 * np.eye(20)
        b = r.standard_normal((20, 3))
        # oracle: LU-based general solver, a different code path than Cholesky
        assert_allclose(solve_spd(a, b), np.linalg.solve(a, b), atol=1e-10)

    def test_residual_small(self):
        r = _rng(5)
        m = r.standard_normal((30, 30))
        a = m @ m.T + np.eye(30)
        b = r.standard_normal(30)
        x = solve_spd(a, b)
        assert np.linalg.norm(a @ x - b) < 1e-8 * np.linalg.norm(b)

    def test_indefinite_raises_with_pivot(self):
        a = np.diag([1.0, -1.0, 1.0])
        with pytest.raises(SingularityError) as exc:
            solve_spd(a, np.ones(3))
        assert exc.value.pivot_index == 1

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            solve_spd(np.eye(3), np.ones(4))


class TestTrace:
    def test_values(self):
        assert trace(np.diag([1.0, 2.0, 3.5])) == 6.5

    def test_cyclic_property(self):
        r = _rng(6)
        a, b = r.standard_normal((4, 7)), r.standard_normal((7, 4))
        assert trace(a @ b) == pytest.approx(trace(b @ a), rel=1e-12)

    def test_rejects_rectangular(self):
        with pytest.raises(ShapeError):
            trace(np.ones((2, 3)))


def test_sym_matrix_power_square_root():
    r = _rng(7)
    m = r.standard_normal((6, 6))
    a = m @ m.T + np.eye(6)
    half = sym_matrix_power(a, 0.5)
    assert_allclose(half @ half, a, atol=1e-10)
    inv_half = sym_matrix_power(a, -0.5)
    assert_allclose(inv_half @ a @ inv_half, np.eye(6), atol=1e-9)
