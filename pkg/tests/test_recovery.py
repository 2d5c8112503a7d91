import numpy as np
import pytest
from math import pi

from ymhlab import bps, currents, gauge, recovery
from ymhlab.forms import Grid
from ymhlab.quat import qnorm2
from ymhlab.randfields import sample_random_pair


def dipole(sep=1.0):
    return recovery.PolyCurrent(3, [
        recovery.Cell(0, 1, ((sep / 2, 0.0, 0.0),)),
        recovery.Cell(0, -1, ((-sep / 2, 0.0, 0.0),)),
    ])


class TestPolyCurrent:
    def test_mass_and_balance(self):
        P = dipole()
        assert P.mass() == 2.0
        assert P.total_multiplicity() == 0

    def test_segment_mass(self):
        P = recovery.PolyCurrent(4, [recovery.Cell(
            1, 1, ((0, 0, 0, -1.0), (0, 0, 0, 1.0)))])
        assert P.mass() == pytest.approx(2.0)

    def test_multiplicity_restricted(self):
        with pytest.raises(ValueError, match="multiplicity"):
            recovery.Cell(0, 2, ((0, 0, 0),))

    def test_dim_must_match_ambient(self):
        with pytest.raises(ValueError, match="dim"):
            recovery.PolyCurrent(3, [recovery.Cell(
                1, 1, ((0, 0, 0), (1, 0, 0)))])

    def test_io_roundtrip(self, tmp_path):
        P = recovery.PolyCurrent(
            4,
            [recovery.Cell(1, -1, ((0, 0, 0, 0), (1, 0, 0, 0)))],
            skeleton=[recovery.Cell(0, 1, ((0, 0, 0, 0),))],
            boundary=[recovery.Cell(0, 1, ((1, 0, 0, 0),))],
        )
        path = tmp_path / "current.txt"
        P.write(path)
        Q = recovery.PolyCurrent.read(path)
        assert Q.n == 4 and len(Q.cells) == 1 and len(Q.skeleton) == 1
        assert np.allclose(Q.cells[0].vert_array, P.cells[0].vert_array)
        assert Q.cells[0].mult == -1

    def test_io_rejects_bad_lines(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("ambient 3\nwidget 0 1 0 0 0\n")
        with pytest.raises(ValueError, match="unknown record"):
            recovery.PolyCurrent.read(path)


class TestDistance:
    def test_on_cell_zero(self):
        P = dipole()
        assert recovery.distance_field(P, [(0.5, 0, 0)])[0] == 0.0

    def test_point_distance(self):
        P = recovery.PolyCurrent(3, [recovery.Cell(0, 1, ((1.0, 2.0, 2.0),))])
        assert recovery.distance_field(P, [(1.0, 2.0, 0.0)])[0] == \
            pytest.approx(2.0)

    def test_segment_projection(self):
        P = recovery.PolyCurrent(4, [recovery.Cell(
            1, 1, ((0, 0, 0, 0), (1, 0, 0, 0)))])
        assert recovery.distance_field(P, [(0.5, 0.3, 0.0, 0.0)])[0] == \
            pytest.approx(0.3)

    def test_gradient_is_unit(self, rng):
        P = dipole()
        pts = rng.uniform(-2, 2, size=(50, 3))
        d, g = recovery.distance_and_gradient(P.cells, pts)
        assert np.allclose(np.linalg.norm(g, axis=1), 1.0)


class TestGaussMap:
    def test_single_charge_radial(self, rng):
        P = recovery.PolyCurrent(3, [recovery.Cell(0, 1, ((0., 0., 0.),))])
        vf = recovery.gauss_map_v(P, compensated_at_infinity=True,
                                  certify=False)
        pts = rng.uniform(-1, 1, size=(30, 3))
        unit = pts / np.linalg.norm(pts, axis=1, keepdims=True)
        assert np.allclose(vf.ev(pts), unit, atol=1e-12)

    def test_unbalanced_rejected(self):
        P = recovery.PolyCurrent(3, [recovery.Cell(0, 1, ((0., 0., 0.),))])
        with pytest.raises(ValueError, match="zero total multiplicity"):
            recovery.gauss_map_v(P, certify=False)

    def test_dipole_degrees(self):
        vf = recovery.gauss_map_v(dipole(), domain=((-2,) * 3, (2,) * 3))
        for center, want in (((0.5, 0, 0), 1), ((-0.5, 0, 0), -1),
                             ((0, 0, 0), 0)):
            surf = currents.sphere_surface(center, 0.25 if want else 1.6)
            vals = vf.ev(surf.vertices)
            deg = currents.degree(
                np.concatenate([np.zeros((len(vals), 1)), vals], axis=1),
                surf, min_modulus=0.5)
            assert deg == want

    def test_same_sign_pair_rejected(self):
        # equal charges produce a field zero at the midpoint
        P = recovery.PolyCurrent(3, [
            recovery.Cell(0, 1, ((0.5, 0.0, 0.0),)),
            recovery.Cell(0, 1, ((-0.5, 0.0, 0.0),))],
        )
        with pytest.raises(ValueError, match="singular set"):
            recovery.gauss_map_v(P, domain=((-2,) * 3, (2,) * 3),
                                 compensated_at_infinity=True)

    def test_dv_bound_audit(self):
        P = dipole()
        vf = recovery.gauss_map_v(P, domain=((-2,) * 3, (2,) * 3))
        C = recovery.audit_dv_bound(vf, P, ((-2,) * 3, (2,) * 3), rng=5)
        assert C <= 10.0

    def test_jacobian_matches_fd(self, rng):
        vf = recovery.gauss_map_v(dipole(), certify=False)
        pts = rng.uniform(-1.8, 1.8, size=(20, 3))
        pts = pts[recovery.distance_field(dipole(), pts) > 0.3]
        h = 1e-6
        jac = vf.jac(pts)
        for l in range(3):
            dp = pts.copy()
            dp[:, l] += h
            dm = pts.copy()
            dm[:, l] -= h
            fd = (vf.ev(dp) - vf.ev(dm)) / (2 * h)
            assert np.max(np.abs(fd - jac[:, l])) < 1e-7

    def test_n4_axis_parallel_only(self):
        P = recovery.PolyCurrent(4, [recovery.Cell(
            1, 1, ((0, 0, 0, -1.0), (0.5, 0, 0, 1.0)))])
        with pytest.raises(NotImplementedError, match="axis-parallel"):
            recovery.gauss_map_v(P, certify=False,
                                 compensated_at_infinity=True)


class TestCutoff:
    def test_values_and_support(self):
        c = recovery.CutoffProfile(1.0, 2.0)
        t = np.array([0.0, 1.0, 1.5, 2.0, 3.0])
        v = c.value(t)
        assert v[0] == 1.0 and v[1] == 1.0 and v[3] == 0.0 and v[4] == 0.0
        assert 0.0 < v[2] < 1.0

    def test_derivative_bound(self):
        c = recovery.CutoffProfile(0.5, 1.0)
        t = np.linspace(0, 1.5, 400)
        # quintic smoothstep: |d chi| <= 1.875/(outer - inner)
        assert np.max(np.abs(c.deriv(t))) <= 1.875 / 0.5 + 1e-12

    def test_validation(self):
        with pytest.raises(ValueError):
            recovery.CutoffProfile(1.0, 1.0)


class TestRecoveryPair:
    def setup_method(self):
        self.P1 = recovery.PolyCurrent(
            3, [recovery.Cell(0, 1, ((0.0, 0.0, 0.0),))])
        self.opt1 = recovery.RecoveryOptions(
            delta=1.2, compensated_at_infinity=True, certify=False)
        self.dom = ((-2.0,) * 3, (2.0,) * 3)

    def test_tube_matches_monopole(self, rng):
        # tube of a +1 point = the degree -1 branch monopole (fixture)
        spec = recovery.recovery_field_spec(self.P1, 0.1, self.dom, self.opt1)
        bspec = bps.bps_field_spec(bps.BpsSpec(sign=-1, epsilon=0.1))
        u = rng.normal(size=(40, 3))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        pts = u * rng.uniform(0.05, 0.25, (40, 1))
        got = spec.fields(pts)
        want = bspec.fields(pts)
        for g, w in zip(got, want):
            assert np.max(np.abs(g - w)) < 1e-12

    def test_pure_gauge_region(self, rng):
        # where psi = 0: d_A Phi is purely radial and F = -(1/4) dv ^ dv
        spec = recovery.recovery_field_spec(self.P1, 0.05, self.dom, self.opt1)
        u = rng.normal(size=(30, 3))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        pts = u * rng.uniform(0.8, 1.8, (30, 1))   # outside c*delta = 0.6
        phi, G, F = gauge._block_fields(spec, pts)
        # angular part of d_A Phi vanishes: G parallel to v
        v = phi / np.sqrt(qnorm2(phi))[:, None]
        for l in range(3):
            cross = G[:, l, 1:] - np.sum(G[:, l, 1:] * v[:, 1:],
                                         axis=1)[:, None] * v[:, 1:]
            assert np.max(np.abs(cross)) < 1e-12

    def test_modulus_bounded_by_one(self, rng):
        spec = recovery.recovery_field_spec(dipole(), 0.1, self.dom,
                                            recovery.RecoveryOptions(
                                                delta=0.45, certify=False))
        pts = rng.uniform(-2, 2, size=(500, 3))
        mod = np.sqrt(qnorm2(spec.phi(pts)))
        assert np.all(mod <= 1.0 + 1e-12)

    def test_epsilon_too_large(self):
        with pytest.raises(ValueError, match="too large"):
            recovery.recovery_field_spec(
                dipole(), 0.3, self.dom,
                recovery.RecoveryOptions(delta=0.2, certify=False))

    def test_energy_localization_trend(self):
        # the share of energy inside the monopole region {psi = 1}
        # (rho <= c delta/2) grows monotonically as eps shrinks: most
        # energy ends up where the pair is the rescaled monopole
        P = dipole()
        opt = recovery.RecoveryOptions(delta=0.45, certify=False)
        fracs = []
        for eps, nn in ((0.2, 49), (0.1, 81), (0.05, 129)):
            spec = recovery.recovery_field_spec(P, eps, self.dom, opt)
            grid = Grid.cube(-2.0, 2.0, nn)
            rep = gauge.energy_from_spec(spec, eps, grid)
            rho = recovery.distance_field(P, grid.points()).reshape(grid.shape)
            from ymhlab.forms import trapezoid_weights
            w = trapezoid_weights(grid)
            core = rho <= opt.c * opt.tube_delta(eps) / 2.0
            fracs.append(float(np.sum((w * rep.density.values[0])[core]))
                         / rep.total)
        assert fracs[0] < fracs[1] < fracs[2]
        assert fracs[2] > 0.7

    def test_z_concentration_near_charges(self):
        # int of Z over a box around each charge approaches +-4pi
        P = dipole()
        opt = recovery.RecoveryOptions(delta=0.45, certify=False)
        eps = 0.1
        spec = recovery.recovery_field_spec(P, eps, self.dom, opt)
        grid = Grid.cube(-2.0, 2.0, 129)
        z = gauge.z_form_from_spec(spec, grid)
        part = currents.cell_partition(grid, 1.0, (0.0, 0.5, 0.5))
        T = currents.cell_integrals(z, part)
        plus = T.weights[np.argmin(np.linalg.norm(
            T.points - np.array([0.5, 0, 0]), axis=1))]
        assert plus / (4 * pi) == pytest.approx(1.0, abs=0.1)

    def test_grid_pair_roundtrip(self):
        grid = Grid.cube(-2.0, 2.0, 17)
        p = recovery.recovery_pair(dipole(), 0.15, grid,
                                   recovery.RecoveryOptions(delta=0.5,
                                                            certify=False))
        assert p.spec is not None and p.scheme == "analytic"


class TestEtaCap:
    def test_profile_contract(self):
        for eta in (0.05, 0.1, 0.25):
            val, der = recovery.eta_cap_profile(eta)
            t = np.linspace(0.0, 1.2, 2000)
            v = val(t)
            assert np.all(v[t <= 1 - eta] == 1.0)
            hi = t >= 1 - eta * eta
            assert np.allclose(v[hi], 1.0 / t[hi])
            assert np.max(v) <= 1 + 2 * eta * eta + 1e-12
            bridge = (t > 1 - eta) & (t < 1 - eta * eta)
            assert np.all(np.abs(der(t)[bridge]) <= 2 * eta + 1e-12)
            assert np.all(np.diff(v[t <= 1 - eta * eta]) >= -1e-15)

    def test_eta_range(self):
        with pytest.raises(ValueError, match="eta"):
            recovery.eta_cap_profile(0.4)

    def test_identity_when_small(self, grid9):
        p = sample_random_pair(grid9, seed=5, squash_phi=0.85)
        q = recovery.eta_cap(p, 0.1)
        assert np.allclose(q.phi.values, p.phi.values)

    def test_unit_modulus_fixed(self, grid9):
        from ymhlab.forms import Form, zero_form
        vals = np.zeros((1,) + grid9.shape + (4,))
        vals[0, ..., 1] = 1.0
        p = gauge.Pair(Form(grid9, 0, "quat", vals),
                       zero_form(grid9, 1, "quat"), 1.0)
        q = recovery.eta_cap(p, 0.1)
        assert np.allclose(np.sqrt(qnorm2(q.phi.values[0])), 1.0)

    def test_inflation_bound(self, grid9):
        eta = 0.1
        for seed in range(10):
            p = sample_random_pair(grid9, seed=seed, squash_phi=1.0,
                                   epsilon=0.6)
            q = recovery.eta_cap(p, eta)
            e0 = gauge.energy(p, keep_density=False).total
            e1 = gauge.energy(q, keep_density=False).total
            assert e1 <= (1 + 3 * eta) * e0 + 1e-12

    def test_deficit_scaling_with_cap(self):
        # int (1-|Phi~|)^2 / eps^2 stays bounded along the ladder
        P = dipole()
        vals = []
        for eps, nn in ((0.2, 65), (0.1, 97)):
            opt = recovery.RecoveryOptions(delta=0.45, certify=False,
                                           eta=0.25)
            spec = recovery.recovery_field_spec(
                P, eps, ((-2.0,) * 3, (2.0,) * 3), opt)
            grid = Grid.cube(-2.0, 2.0, nn)
            vals.append(gauge.modulus_deficit_sq_from_spec(spec, grid)
                        / eps**2)
        assert vals[1] <= vals[0] * 1.5
        assert vals[1] <= 40.0 * P.mass()
