import numpy as np
import pytest

from ymhlab import forms
from ymhlab.forms import (Form, Grid, combos, constant_form, d, form_from_bytes,
                          form_norm, form_to_bytes, integrate, interp_components,
                          merge_sign, norm2_pointwise, re_part, sample_quat0,
                          sample_scalar, star, trapezoid_weights, wedge,
                          zero_form)
from ymhlab.randfields import random_trig_field


def trig_quat_form(grid, degree, seed, amp=1.0, kmax=1):
    """Random smooth imaginary-quaternion form sampled on the grid."""
    rng = np.random.default_rng(seed)
    ncomp = len(combos(grid.n, degree))
    pts = grid.points()
    vals = np.zeros((ncomp,) + grid.shape + (4,))
    for c in range(ncomp):
        f = random_trig_field(rng, grid.n, 3, amp, kmax)
        vals[c, ..., 1:] = f.value(pts).reshape(grid.shape + (3,))
    return Form(grid, degree, "quat", vals)


class TestGrid:
    def test_validation(self):
        with pytest.raises(ValueError):
            Grid((0, 0, 0), (1, 1, 1), (4, 5, 5))   # too few nodes
        with pytest.raises(ValueError):
            Grid((0, 0, 0), (1, 2, 1), (5, 5, 5))   # nonuniform spacing
        with pytest.raises(ValueError):
            Grid((0, 0), (1, 1), (5, 5))            # bad dimension

    def test_spacing_and_axes(self):
        g = Grid.cube(-1.0, 1.0, 11)
        assert g.h == pytest.approx(0.2)
        assert g.axis(0)[0] == -1.0 and g.axis(2)[-1] == 1.0

    def test_from_spacing(self):
        g = Grid.from_spacing((0.0, 0.0, 0.0, 0.0), 0.25, (5, 5, 5, 6))
        assert g.n == 4
        assert g.hi[3] == pytest.approx(1.25)


class TestExteriorDerivative:
    def test_constant_is_closed(self, grid9):
        f = constant_form(grid9, 0, [2.5])
        assert np.max(np.abs(d(f).values)) == 0.0

    def test_exact_on_linears(self, grid9):
        f = sample_scalar(grid9, lambda p: p[:, 0])
        df = d(f, "central2")
        assert np.max(np.abs(df.values[0] - 1.0)) < 1e-13
        assert np.max(np.abs(df.values[1:])) < 1e-13

    @pytest.mark.parametrize("scheme", ["central2", "central4"])
    def test_dd_zero_interior(self, grid9, scheme, rng):
        vals = rng.standard_normal((1,) + grid9.shape + (4,))
        f = Form(grid9, 0, "quat", vals)
        ddf = d(d(f, scheme), scheme)
        width = 2 if scheme == "central2" else 4
        sl = (slice(None),) + grid9.interior(width)
        assert np.max(np.abs(ddf.values[sl])) < 1e-12

    def test_top_degree_errors(self, grid9):
        f = zero_form(grid9, 3)
        with pytest.raises(ValueError, match="top-degree"):
            d(f)

    def test_analytic_falls_back(self, grid9):
        f = sample_scalar(grid9, lambda p: p[:, 1] ** 2)
        assert np.allclose(d(f, "analytic").values, d(f, "central2").values)

    def test_refinement_factor_four(self):
        phi = random_trig_field(np.random.default_rng(3), 3, 1, 1.0, 1)

        def err(nodes):
            g = Grid.cube(-1.0, 1.0, nodes)
            pts = g.points()
            f = sample_scalar(g, lambda p: phi.value(p)[:, 0])
            exact = phi.partials(pts)[:, :, 0].T.reshape((3,) + g.shape)
            return np.max(np.abs(d(f, "central2").values - exact))

        r = err(17) / err(33)
        assert 3.0 < r < 5.0


class TestWedge:
    def test_real_antisymmetry(self, grid9):
        dx = constant_form(grid9, 1, [1.0, 0.0, 0.0])
        dy = constant_form(grid9, 1, [0.0, 1.0, 0.0])
        assert np.allclose(wedge(dx, dy).values, -wedge(dy, dx).values)

    def test_su2_one_form_squares(self, grid9):
        # (i dx + j dy) ^ (i dx + j dy) = [i, j] dx^dy = 2k dx^dy
        vals = np.zeros((3,) + grid9.shape + (4,))
        vals[0, ..., 1] = 1.0
        vals[1, ..., 2] = 1.0
        a = Form(grid9, 1, "quat", vals)
        sq = wedge(a, a)
        # component (0,1) = dx^dy holds 2k
        assert np.allclose(sq.component((0, 1))[..., 3], 2.0)
        assert np.max(np.abs(sq.component((0, 2)))) == 0.0

    def test_unit(self, grid9, rng):
        f = trig_quat_form(grid9, 1, 5)
        one = constant_form(grid9, 0, [1.0])
        assert np.allclose(wedge(one, f).values, f.values)

    def test_degree_overflow(self, grid9):
        f2 = zero_form(grid9, 2)
        with pytest.raises(ValueError, match="overflow"):
            wedge(f2, f2)

    @pytest.mark.parametrize("kl", [(1, 1), (1, 2), (0, 2)])
    def test_graded_symmetry_of_re(self, grid9, kl):
        k, l = kl
        om = trig_quat_form(grid9, k, seed=k * 10 + l)
        ze = trig_quat_form(grid9, l, seed=k * 17 + l + 1)
        lhs = re_part(wedge(om, ze)).values
        rhs = (-1.0) ** (k * l) * re_part(wedge(ze, om)).values
        # pointwise algebraic identity: only float round-off
        scale = np.max(np.abs(lhs)) + 1.0
        assert np.max(np.abs(lhs - rhs)) < 5e-15 * scale


class TestStar:
    def test_volume_form(self, grid9):
        one = constant_form(grid9, 0, [1.0])
        sv = star(one)
        assert sv.degree == 3
        assert np.allclose(sv.values[0], 1.0)

    def test_cyclic_convention(self, grid9):
        dx1 = constant_form(grid9, 1, [1.0, 0.0, 0.0])
        assert np.allclose(star(dx1).component((1, 2)), 1.0)
        assert np.max(np.abs(star(dx1).component((0, 1)))) == 0.0

    @pytest.mark.parametrize("n,nodes", [(3, 9), (4, 5)])
    def test_double_star_sign(self, n, nodes, rng):
        g = Grid.cube(-1.0, 1.0, nodes, n=n)
        for k in range(n + 1):
            f = Form(g, k, "real",
                     rng.standard_normal((len(combos(n, k)),) + g.shape))
            ss = star(star(f))
            sign = (-1.0) ** (k * (n - k))
            assert np.allclose(ss.values, sign * f.values)

    def test_isometry(self, grid9):
        f = trig_quat_form(grid9, 2, seed=9)
        a = norm2_pointwise(f).values
        b = norm2_pointwise(star(f)).values
        assert np.allclose(a, b)


class TestReIntegrateNorms:
    def test_re_part_examples(self, grid9):
        vals = np.zeros((3,) + grid9.shape + (4,))
        vals[0, ..., 1] = 1.0      # i dx
        f = Form(grid9, 1, "quat", vals)
        assert np.max(np.abs(re_part(f).values)) == 0.0
        vals2 = vals.copy()
        vals2[0, ..., 0] = 1.0     # (1+i) dx
        g = Form(grid9, 1, "quat", vals2)
        assert np.allclose(re_part(g).values[0], 1.0)

    def test_norm2_orthonormal_sum(self, grid9):
        vals = np.zeros((3,) + grid9.shape + (4,))
        vals[0, ..., 1] = 1.0
        vals[1, ..., 2] = 1.0
        f = Form(grid9, 1, "quat", vals)
        assert np.allclose(norm2_pointwise(f).values[0], 2.0)

    def test_integrate_unit_box(self):
        g = Grid((0, 0, 0), (1, 1, 1), (9, 9, 9))
        assert integrate(constant_form(g, 0, [1.0])) == pytest.approx(1.0)

    def test_integrate_linear(self):
        g = Grid((0, 0, 0), (1, 1, 1), (9, 9, 9))
        f = sample_scalar(g, lambda p: p[:, 0])
        assert integrate(f) == pytest.approx(0.5, abs=1e-12)

    def test_integrate_quadratic_converges(self):
        vals = []
        for nodes in (9, 17):
            g = Grid((0, 0, 0), (1, 1, 1), (nodes,) * 3)
            f = sample_scalar(g, lambda p: p[:, 0] ** 2)
            vals.append(abs(integrate(f) - 1.0 / 3.0))
        assert 3.0 < vals[0] / vals[1] < 5.0

    def test_integrate_validates(self, grid9):
        with pytest.raises(ValueError):
            integrate(zero_form(grid9, 1))
        with pytest.raises(ValueError):
            integrate(zero_form(grid9, 0, "quat"))

    def test_weights_sum_to_volume(self, grid9):
        assert np.sum(trapezoid_weights(grid9)) == pytest.approx(8.0)


class TestDReIdentity:
    def test_d_re_wedge_identity_order(self):
        # d Re(om ^ ze) = Re(d_A om ^ ze) + (-1)^k Re(om ^ d_A ze), O(h^2)
        def gap(nodes):
            g = Grid.cube(-1.0, 1.0, nodes)
            om = trig_quat_form(g, 1, seed=31, amp=0.7)
            ze = trig_quat_form(g, 1, seed=32, amp=0.7)
            a = trig_quat_form(g, 1, seed=33, amp=0.4)

            def cov(f):
                out = forms.d(f, "central2").values + wedge(a, f).values
                out += wedge(f, a).values  # k = 1: -(-1)^k = +1
                return Form(g, f.degree + 1, "quat", out)

            lhs = forms.d(re_part(wedge(om, ze)), "central2")
            rhs = re_part(wedge(cov(om), ze)).values \
                - re_part(wedge(om, cov(ze))).values
            diff = Form(g, 3, "real", lhs.values - rhs)
            return form_norm(diff, np.inf, interior=2)

        g1, g2 = gap(11), gap(21)
        assert g1 / g2 > 3.0


class TestSerialization:
    def test_roundtrip(self, grid9, rng):
        f = trig_quat_form(grid9, 2, seed=77)
        g = form_from_bytes(form_to_bytes(f))
        assert g.grid == f.grid and g.degree == f.degree and g.kind == f.kind
        assert np.array_equal(g.values, f.values)

    def test_roundtrip_real(self, grid9, rng):
        f = Form(grid9, 0, "real", rng.standard_normal((1,) + grid9.shape))
        g = form_from_bytes(form_to_bytes(f))
        assert np.array_equal(g.values, f.values)

    def test_csv(self, tmp_path, grid9):
        f = constant_form(grid9, 1, [1.0, 2.0, 3.0])
        paths = forms.form_to_csv(f, tmp_path / "one_form")
        assert len(paths) == 3
        head = open(paths[0]).readline()
        assert head.startswith("x1,x2,x3")


class TestInterpolation:
    def test_linear_field_exact(self, grid9, rng):
        f = sample_scalar(grid9, lambda p: 1.0 + 2 * p[:, 0] - p[:, 2])
        pts = rng.uniform(-0.9, 0.9, size=(40, 3))
        got = interp_components(f, pts)[:, 0]
        want = 1.0 + 2 * pts[:, 0] - pts[:, 2]
        assert np.allclose(got, want, atol=1e-12)

    def test_quat_shape(self, grid9):
        f = trig_quat_form(grid9, 1, seed=5)
        out = interp_components(f, np.zeros((7, 3)))
        assert out.shape == (7, 3, 4)


def test_merge_sign_basics():
    assert merge_sign((0,), (1, 2)) == 1
    assert merge_sign((1,), (0, 2)) == -1
    assert merge_sign((0, 1), (0,)) == 0
