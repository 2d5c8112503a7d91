import math

import numpy as np
import pytest

from ymhlab.quat import (I, J, K, ONE, ImQuaternion, Quaternion, bracket,
                         bracket_arr, exp_im, inner, qconj, qexp_im_arr,
                         qmul, qnorm, quat)


def as_q(u: ImQuaternion) -> Quaternion:
    return u.as_quaternion()


class TestMultiplicationTable:
    def test_ij_is_k(self):
        assert (as_q(I) * as_q(J)).isclose(as_q(K), 0)

    def test_jk_is_i(self):
        assert (as_q(J) * as_q(K)).isclose(as_q(I), 0)

    def test_ki_is_j(self):
        assert (as_q(K) * as_q(I)).isclose(as_q(J), 0)

    def test_squares_are_minus_one(self):
        for u in (I, J, K):
            assert (as_q(u) * as_q(u)).isclose(-ONE, 0)

    def test_ijk_is_minus_one(self):
        assert (as_q(I) * as_q(J) * as_q(K)).isclose(-ONE, 0)

    def test_anticommutation(self):
        assert (as_q(I) * as_q(J)).isclose(-(as_q(J) * as_q(I)), 0)

    def test_identity_element(self):
        q = Quaternion(0.3, -1.2, 2.0, 0.7)
        assert (ONE * q).isclose(q, 0)
        assert (q * ONE).isclose(q, 0)

    def test_one_plus_i_times_one_plus_j(self):
        # (1+i)(1+j) = 1 + j + i + ij = 1 + i + j + k
        got = (ONE + as_q(I)) * (ONE + as_q(J))
        assert got.isclose(Quaternion(1, 1, 1, 1), 0)


class TestNormAndConj:
    def test_norm_multiplicative(self, rng):
        for _ in range(50):
            a = Quaternion(*rng.standard_normal(4))
            b = Quaternion(*rng.standard_normal(4))
            assert (a * b).norm() == pytest.approx(a.norm() * b.norm(),
                                                   rel=1e-13)

    def test_imaginary_square_is_minus_norm2(self, rng):
        for _ in range(20):
            u = ImQuaternion(*rng.standard_normal(3))
            sq = as_q(u) * as_q(u)
            assert sq.re == pytest.approx(-u.norm2(), rel=1e-13)
            assert sq.im.norm() <= 1e-13 * max(1.0, u.norm2())

    def test_two_i_plus_three_j_squared(self):
        u = ImQuaternion(2.0, 3.0, 0.0)
        sq = as_q(u) * as_q(u)
        assert sq.re == pytest.approx(-13.0)
        assert sq.im.norm() == 0.0

    def test_conj_of_imaginary_is_negation(self):
        u = ImQuaternion(1.0, -2.0, 0.5)
        assert as_q(u).conj().isclose(as_q(-u), 0)


class TestBracketInner:
    def test_bracket_table(self):
        assert bracket(I, J) == ImQuaternion(0, 0, 2)
        assert bracket(J, I) == ImQuaternion(0, 0, -2)

    def test_bracket_antisymmetric(self, rng):
        u = ImQuaternion(*rng.standard_normal(3))
        assert bracket(u, u).norm() == 0.0

    def test_bracket_matches_product_difference(self, rng):
        u = ImQuaternion(*rng.standard_normal(3))
        v = ImQuaternion(*rng.standard_normal(3))
        direct = as_q(u) * as_q(v) - as_q(v) * as_q(u)
        assert direct.isclose(as_q(bracket(u, v)), 1e-13)
        assert direct.re == 0.0  # imaginary by construction

    def test_inner_orthonormal_frame(self):
        assert inner(I, I) == 1.0
        assert inner(I, J) == 0.0

    def test_inner_is_re_conj_product(self, rng):
        u = ImQuaternion(*rng.standard_normal(3))
        v = ImQuaternion(*rng.standard_normal(3))
        assert inner(u, v) == pytest.approx(
            (as_q(u).conj() * as_q(v)).re, rel=1e-13)


class TestExp:
    def test_exp_of_zero(self):
        assert exp_im(ImQuaternion(0, 0, 0)).isclose(ONE, 0)

    def test_quarter_turn(self):
        got = exp_im(ImQuaternion(math.pi / 2, 0, 0))
        assert got.isclose(as_q(I), 1e-15)

    def test_unit_norm(self, rng):
        for _ in range(25):
            u = ImQuaternion(*(3.0 * rng.standard_normal(3)))
            assert exp_im(u).norm() == pytest.approx(1.0, abs=1e-14)

    def test_inverse(self, rng):
        u = ImQuaternion(*rng.standard_normal(3))
        assert (exp_im(u) * exp_im(-u)).isclose(ONE, 1e-14)

    def test_series_branch_continuity(self):
        for r in (0.9e-4, 1.1e-4):
            u = ImQuaternion(r, 0, 0)
            got = exp_im(u)
            assert got.w == pytest.approx(math.cos(r), abs=1e-16)
            assert got.x == pytest.approx(math.sin(r), abs=1e-16)


class TestArrayKernels:
    def test_qmul_matches_scalar(self, rng):
        a = rng.standard_normal((40, 4))
        b = rng.standard_normal((40, 4))
        got = qmul(a, b)
        for i in range(40):
            ref = Quaternion(*a[i]) * Quaternion(*b[i])
            assert np.allclose(got[i], [ref.w, ref.x, ref.y, ref.z],
                               rtol=1e-14, atol=1e-14)

    def test_bracket_arr_imaginary(self, rng):
        u = np.concatenate([np.zeros((30, 1)), rng.standard_normal((30, 3))],
                           axis=1)
        v = np.concatenate([np.zeros((30, 1)), rng.standard_normal((30, 3))],
                           axis=1)
        br = bracket_arr(u, v)
        assert np.max(np.abs(br[:, 0])) == 0.0

    def test_qconj_and_norm(self, rng):
        a = rng.standard_normal((10, 4))
        assert np.allclose(qnorm(qmul(a, qconj(a)))[:],
                           np.sum(a * a, axis=1), rtol=1e-13)

    def test_qexp_unit(self, rng):
        v = rng.standard_normal((25, 3)) * 2.0
        e = qexp_im_arr(v)
        assert np.allclose(qnorm(e), 1.0, atol=1e-14)

    def test_quat_builder_broadcasts(self):
        q = quat(1.0, np.zeros(5), 0.0, 0.0)
        assert q.shape == (5, 4)
        assert np.all(q[:, 0] == 1.0)
