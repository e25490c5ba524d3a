"""Exact linear algebra over QQ and GF(p)."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ainfquot.exact_linalg import (
    GF,
    QQ,
    Field,
    Matrix,
    field_from_name,
    kernel_basis,
    rank,
    row_space_coordinates,
    solve_linear,
)


def mat(field, rows):
    return Matrix.from_rows(field, [[field.coerce(x) for x in r] for r in rows])


class TestField:
    def test_gf_arithmetic(self):
        F = GF(7)
        assert F.add(3, 5) == 1
        assert F.mul(3, 5) == 1
        assert F.inv(3) == 5
        assert F.neg(2) == 5
        assert F.sub(2, 5) == 4

    def test_qq_arithmetic(self):
        F = QQ
        assert F.mul(Fraction(1, 2), 4) == 2
        assert F.inv(Fraction(3, 4)) == Fraction(4, 3)
        assert F.div(1, 3) == Fraction(1, 3)

    def test_sign_pow(self):
        F = GF(7)
        assert F.sign_pow(0) == F.one
        assert F.sign_pow(1) == F.coerce(-1)
        assert F.sign_pow(2) == F.one
        assert F.sign_pow(-3) == F.coerce(-1)

    def test_field_from_name(self):
        assert field_from_name("QQ").characteristic == 0
        assert field_from_name("GF(7)").characteristic == 7
        assert field_from_name("F5").characteristic == 5
        assert field_from_name("11").characteristic == 11

    def test_zero_inverse_rejected(self):
        with pytest.raises(ZeroDivisionError):
            GF(7).inv(0)

    @given(st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50))
    @settings(max_examples=60, deadline=None)
    def test_gf7_ring_axioms(self, a, b, c):
        F = GF(7)
        a, b, c = F.coerce(a), F.coerce(b), F.coerce(c)
        assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
        assert F.add(a, F.neg(a)) == F.zero
        if not F.is_zero(a):
            assert F.mul(a, F.inv(a)) == F.one


class TestMatrix:
    def test_matmul_oracle(self):
        F = QQ
        a = mat(F, [[1, 2], [3, 4]])
        b = mat(F, [[0, 1], [1, 0]])
        assert a.matmul(b).entries == mat(F, [[2, 1], [4, 3]]).entries

    def test_identity_is_neutral(self):
        F = GF(5)
        a = mat(F, [[1, 2, 3], [4, 0, 1]])
        i2 = Matrix.identity(F, 2)
        i3 = Matrix.identity(F, 3)
        assert i2.matmul(a).entries == a.entries
        assert a.matmul(i3).entries == a.entries

    def test_transpose_involution(self):
        F = GF(5)
        a = mat(F, [[1, 2, 3], [4, 0, 1]])
        assert a.transpose().transpose().entries == a.entries

    def test_apply_row(self):
        F = QQ
        a = mat(F, [[1, 0], [0, 2]])
        assert a.apply_row([3, 5]) == [Fraction(3), Fraction(10)]


class TestSolvers:
    def test_rank_oracle(self):
        F = QQ
        assert rank(F, mat(F, [[1, 2], [2, 4]])) == 1
        assert rank(F, mat(F, [[1, 0], [0, 1]])) == 2
        assert rank(F, mat(F, [[0, 0], [0, 0]])) == 0

    def test_rank_nullity(self):
        F = GF(7)
        m = mat(F, [[1, 2, 3, 4], [2, 4, 6, 1], [3, 6, 2, 5]])
        r = rank(F, m)
        null = len(kernel_basis(F, m))
        assert r + null == m.cols

    def test_solve_consistent(self):
        F = QQ
        m = mat(F, [[2, 1], [1, 3]])
        sol = solve_linear(F, m, [5, 10])
        assert sol is not None
        out = [
            sum(F.mul(m.entries[i][j], sol[j]) for j in range(m.cols))
            for i in range(m.rows)
        ]
        assert out == [Fraction(5), Fraction(10)]

    def test_solve_inconsistent_returns_none(self):
        F = QQ
        m = mat(F, [[1, 2], [2, 4]])
        # rhs outside the span of the rows / columns in either convention
        assert solve_linear(F, m, [1, 1]) is None

    def test_kernel_vectors_annihilate(self):
        F = GF(7)
        m = mat(F, [[1, 2, 3], [4, 5, 6]])
        for v in kernel_basis(F, m):
            # kernel basis is for the right action x -> m x
            out = [
                sum(F.mul(m.entries[i][j], v[j]) for j in range(m.cols)) % 7
                for i in range(m.rows)
            ]
            assert all(F.is_zero(x) for x in out)

    def test_row_space_coordinates(self):
        F = QQ
        basis = [[1, 0, 1], [0, 1, 1]]
        coords = row_space_coordinates(F, basis, [2, 3, 5])
        assert coords == [Fraction(2), Fraction(3)]
        assert row_space_coordinates(F, basis, [0, 0, 1]) is None

    @given(st.lists(st.lists(st.integers(-5, 5), min_size=3, max_size=3), min_size=2, max_size=4))
    @settings(max_examples=40, deadline=None)
    def test_rank_bounded(self, rows):
        F = GF(7)
        m = mat(F, rows)
        r = rank(F, m)
        assert 0 <= r <= min(m.rows, m.cols)
        assert rank(F, m.transpose()) == r
