"""Pairs (Phi, A), covariant calculus, energies, and concentration forms.

A ``Pair`` couples a Higgs section Phi (imaginary-quaternion 0-form)
with a connection A (imaginary-quaternion 1-form) on one grid, at scale
epsilon.  Pairs built from closed-form fields carry a ``FieldSpec`` of
point evaluators (values and exact first derivatives), which enables
round-off-accurate identities and slab-streamed integration on grids
too large to hold intermediate forms.

Conventions: d_A Phi = d Phi + [A, Phi], F_A = dA + A ^ A,
Z = 2 Re(d_A conj(Phi) ^ F_A), beta = Re(conj(Phi) F_A), and the normal
U(1) curvature omega with |Phi| omega = 2 beta - (1/2)|Phi|^{-2}
Re(conj(Phi) d_A Phi ^ d_A Phi) on {Phi != 0}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb
from typing import Callable

import numpy as np

from . import forms
from .forms import Form, Grid, combos, comp_index, integrate, norm2_pointwise, \
    re_part, star, trapezoid_weights, wedge, zero_form
from .quat import qconj, qdot, qmul, qnorm2

__all__ = [
    "FieldSpec",
    "Pair",
    "EnergyReport",
    "pair_from_spec",
    "cov_deriv",
    "curvature",
    "energy",
    "z_form",
    "beta_form",
    "omega_form",
    "omega_at",
    "gauge_transform",
    "pure_gauge_pair",
    "el_residual",
    "cap_modulus",
    "theta_pairing",
    "cov_d",
    "codiff",
    "bracket_form",
    "point_fields",
    "sphere_flux",
    "modulus_deficit_sq",
]

# nodes per streamed block when evaluating analytic pairs on big grids
_BLOCK_NODES = 200_000
# grids above this size stream through the FieldSpec instead of building forms
_STREAM_THRESHOLD = 2_000_000

PHI_MIN_DEFAULT = 1e-8


@dataclass(frozen=True)
class FieldSpec:
    """Closed-form evaluators for a pair and its exact first derivatives.

    All callables take points of shape (N, n).  ``phi`` returns (N, 4),
    ``dphi`` (N, n, 4) partials, ``a`` (N, n, 4) one-form components,
    ``da2`` (N, C(n,2), 4) components of the exterior derivative dA in
    increasing multi-index order.
    """

    n: int
    phi: Callable[[np.ndarray], np.ndarray]
    dphi: Callable[[np.ndarray], np.ndarray]
    a: Callable[[np.ndarray], np.ndarray]
    da2: Callable[[np.ndarray], np.ndarray]
    # optional fused evaluator (phi, dphi, a, da2) sharing intermediate work
    fields: Callable[[np.ndarray], tuple] | None = None

    def eval_all(self, pts: np.ndarray) -> tuple:
        if self.fields is not None:
            return self.fields(pts)
        return self.phi(pts), self.dphi(pts), self.a(pts), self.da2(pts)


@dataclass
class Pair:
    """Higgs section and connection on a shared grid, at scale epsilon."""

    phi: Form
    a: Form
    epsilon: float
    spec: FieldSpec | None = field(default=None, repr=False)
    scheme: str = "central2"

    def __post_init__(self):
        if self.phi.grid != self.a.grid:
            raise ValueError("phi and a must share one grid")
        if self.phi.degree != 0 or self.a.degree != 1:
            raise ValueError("pair needs a 0-form phi and a 1-form a")
        if self.phi.kind != "quat" or self.a.kind != "quat":
            raise ValueError("pair fields must be quaternion-valued")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    @property
    def grid(self) -> Grid:
        return self.phi.grid


@dataclass
class EnergyReport:
    """Energy split: dirichlet = (1/eps) int |d_A Phi|^2, yangmills = eps int |F|^2."""

    epsilon: float
    dirichlet: float
    yangmills: float
    total: float
    density: Form | None = field(default=None, repr=False)

    def to_json(self) -> str:
        grid = self.density.grid if self.density is not None else None
        rec = {
            "epsilon": self.epsilon,
            "dirichlet": self.dirichlet,
            "yangmills": self.yangmills,
            "total": self.total,
        }
        if grid is not None:
            rec["grid"] = {"n": grid.n, "lo": grid.lo, "hi": grid.hi,
                           "nodes": grid.shape}
        return json.dumps(rec, sort_keys=True)


def pair_from_spec(spec: FieldSpec, grid: Grid, epsilon: float) -> Pair:
    """Sample a FieldSpec onto a grid, attaching exact derivative callbacks."""
    if spec.n != grid.n:
        raise ValueError("spec dimension does not match grid")

    def dphi_form() -> Form:
        raw = spec.dphi(grid.points()).reshape(grid.shape + (grid.n, 4))
        vals = np.ascontiguousarray(np.moveaxis(raw, -2, 0))
        return Form(grid, 1, "quat", vals)

    def da2_form() -> Form:
        ncomp = comb(grid.n, 2)
        raw = spec.da2(grid.points()).reshape(grid.shape + (ncomp, 4))
        vals = np.ascontiguousarray(np.moveaxis(raw, -2, 0))
        return Form(grid, 2, "quat", vals)

    phi = forms.sample_quat0(grid, spec.phi, deriv=dphi_form)
    a = forms.sample_quat1(grid, spec.a, deriv=da2_form)
    return Pair(phi, a, epsilon, spec=spec, scheme="analytic")


# ---------------------------------------------------------------------------
# covariant calculus on grid forms
# ---------------------------------------------------------------------------

def bracket_form(a: Form, phi: Form) -> Form:
    """[A, Phi] componentwise for a 1-form A and 0-form Phi."""
    out = zero_form(a.grid, 1, "quat")
    p = phi.values[0]
    for l in range(a.grid.n):
        out.values[l] = qmul(a.values[l], p) - qmul(p, a.values[l])
    return out


def cov_deriv(p: Pair, scheme: str | None = None) -> Form:
    """d_A Phi = d Phi + [A, Phi]."""
    sch = scheme or p.scheme
    df = forms.d(p.phi, sch)
    br = bracket_form(p.a, p.phi)
    return Form(p.grid, 1, "quat", df.values + br.values)


def curvature(p: Pair, scheme: str | None = None) -> Form:
    """F_A = dA + A ^ A."""
    sch = scheme or p.scheme
    da = forms.d(p.a, sch)
    aa = wedge(p.a, p.a)
    return Form(p.grid, 2, "quat", da.values + aa.values)


def cov_d(omega: Form, a: Form, scheme: str = "central2") -> Form:
    """d_A omega = d omega + A ^ omega - (-1)^k omega ^ A on su(2)-valued forms."""
    out = forms.d(omega, scheme)
    term = wedge(a, omega).values
    if omega.degree % 2 == 0:
        term = term - wedge(omega, a).values
    else:
        term = term + wedge(omega, a).values
    return Form(omega.grid, omega.degree + 1, "quat", out.values + term)


def codiff(omega: Form, a: Form, scheme: str = "central2") -> Form:
    """Covariant codifferential d_A^* = (-1)^{n(k+1)+1} star d_A star."""
    n, k = omega.grid.n, omega.degree
    sign = -1.0 if (n * (k + 1) + 1) % 2 else 1.0
    out = star(cov_d(star(omega), a, scheme))
    return Form(omega.grid, k - 1, omega.kind, sign * out.values)


# ---------------------------------------------------------------------------
# streamed evaluation through a FieldSpec
# ---------------------------------------------------------------------------

def _slab_ranges(grid: Grid):
    per_slab = int(np.prod(grid.shape[1:]))
    rows = max(1, _BLOCK_NODES // per_slab)
    for i0 in range(0, grid.shape[0], rows):
        yield i0, min(grid.shape[0], i0 + rows)


def _block_fields(spec: FieldSpec, pts: np.ndarray):
    """phi (N,4), covariant derivative G (N,n,4), curvature F (N,C2,4)."""
    phi, dphi, av, da2 = spec.eval_all(pts)
    ph = phi[:, None, :]
    G = dphi + qmul(av, ph) - qmul(ph, av)
    F = da2.copy()
    for ci, (l, m) in enumerate(combos(spec.n, 2)):
        F[:, ci, :] += qmul(av[:, l], av[:, m]) - qmul(av[:, m], av[:, l])
    return phi, G, F


def _z_from_fields(n: int, G: np.ndarray, F: np.ndarray) -> np.ndarray:
    """Components of Z = 2 Re(conj(d_A Phi) ^ F) from point fields."""
    idx2 = comp_index(n, 2)
    out = np.zeros((G.shape[0], comb(n, 3)))
    for ci, K in enumerate(combos(n, 3)):
        for pos in range(3):
            l = K[pos]
            I = K[:pos] + K[pos + 1:]
            s = -1.0 if pos % 2 else 1.0
            # Re(conj(u) v) is the Euclidean 4-dot
            out[:, ci] += 2.0 * s * qdot(G[:, l], F[:, idx2[I]])
    return out


def energy_from_spec(spec: FieldSpec, epsilon: float, grid: Grid,
                     keep_density: bool = True) -> EnergyReport:
    """Streamed trapezoid energy of an analytic pair on any grid.

    Evaluates slab by slab and never materializes intermediate forms,
    so the quadrature grid can be much finer than the pair's own grid.
    Single-threaded reductions keep results bit-reproducible.
    """
    eps = epsilon
    w = trapezoid_weights(grid)
    dens = np.empty(grid.shape) if keep_density else None
    tail = grid.shape[1:]
    dir_sum = 0.0
    ym_sum = 0.0
    for i0, i1 in _slab_ranges(grid):
        pts = grid.slab_points(i0, i1)
        _, G, F = _block_fields(spec, pts)
        dd = np.sum(qnorm2(G), axis=-1).reshape((i1 - i0,) + tail) / eps
        yd = np.sum(qnorm2(F), axis=-1).reshape((i1 - i0,) + tail) * eps
        ws = w[i0:i1]
        dir_sum += float(np.sum(ws * dd))
        ym_sum += float(np.sum(ws * yd))
        if keep_density:
            dens[i0:i1] = dd + yd
    density = Form(grid, 0, "real", dens[None]) if keep_density else None
    return EnergyReport(eps, dir_sum, ym_sum, dir_sum + ym_sum, density)


def z_form_from_spec(spec: FieldSpec, grid: Grid) -> Form:
    """Streamed Z = 2 Re(d_A conj(Phi) ^ F_A) on any quadrature grid."""
    n = grid.n
    ncomp = comb(n, 3)
    vals = np.empty((ncomp,) + grid.shape)
    tail = grid.shape[1:]
    for i0, i1 in _slab_ranges(grid):
        pts = grid.slab_points(i0, i1)
        _, G, F = _block_fields(spec, pts)
        z = _z_from_fields(n, G, F)
        for ci in range(ncomp):
            vals[ci, i0:i1] = z[:, ci].reshape((i1 - i0,) + tail)
    return Form(grid, 3, "real", vals)


def energy(p: Pair, keep_density: bool = True) -> EnergyReport:
    """epsilon-Yang-Mills-Higgs energy with trapezoid quadrature."""
    eps = p.epsilon
    if p.spec is not None and p.grid.num_nodes > _STREAM_THRESHOLD:
        return energy_from_spec(p.spec, eps, p.grid, keep_density)
    w = trapezoid_weights(p.grid)
    cov = cov_deriv(p)
    fa = curvature(p)
    dd = norm2_pointwise(cov).values[0] / eps
    yd = norm2_pointwise(fa).values[0] * eps
    dens = Form(p.grid, 0, "real", (dd + yd)[None])
    dirichlet = float(np.sum(w * dd))
    yangmills = float(np.sum(w * yd))
    return EnergyReport(eps, dirichlet, yangmills, dirichlet + yangmills,
                        dens if keep_density else None)


def z_form(p: Pair) -> Form:
    """Real 3-form Z = 2 Re(d_A conj(Phi) ^ F_A)."""
    if p.spec is not None and p.grid.num_nodes > _STREAM_THRESHOLD:
        return z_form_from_spec(p.spec, p.grid)
    cov = cov_deriv(p)
    fa = curvature(p)
    conj_cov = Form(p.grid, 1, "quat", qconj(cov.values))
    zq = wedge(conj_cov, fa)
    return Form(p.grid, 3, "real", 2.0 * zq.values[..., 0])


def beta_form(p: Pair) -> Form:
    """Real 2-form beta = Re(conj(Phi) F_A)."""
    fa = curvature(p)
    phi = p.phi.values[0]
    vals = np.stack([qdot(phi, fa.values[ci]) for ci in range(fa.ncomp)])
    return Form(p.grid, 2, "real", vals)


def omega_form(p: Pair, phi_min: float = PHI_MIN_DEFAULT) -> Form:
    """Curvature 2-form of the normal U(1) bundle over {|Phi| >= phi_min}.

    Raises where the section vanishes: the form only exists on {Phi != 0}.
    """
    mod = np.sqrt(qnorm2(p.phi.values[0]))
    bad = mod < phi_min
    if np.any(bad):
        locs = np.argwhere(bad)
        raise ValueError(
            f"omega undefined at {len(locs)} nodes with |Phi| < {phi_min:g} "
            f"(first at index {tuple(locs[0])})")
    beta = beta_form(p)
    cov = cov_deriv(p)
    ww = wedge(cov, cov)
    phi = p.phi.values[0]
    vals = np.empty_like(beta.values)
    for ci in range(ww.ncomp):
        re_pww = qdot(phi, ww.values[ci])
        vals[ci] = (2.0 * beta.values[ci] - 0.5 * re_pww / mod ** 2) / mod
    return Form(p.grid, 2, "real", vals)


# ---------------------------------------------------------------------------
# gauge transformations
# ---------------------------------------------------------------------------

def gauge_transform(p: Pair, sigma: Form, dsigma: Form | None = None) -> Pair:
    """Phi -> sigma Phi sigma^{-1}, A -> -(d sigma) sigma^{-1} + sigma A sigma^{-1}.

    ``sigma`` must be a unit-quaternion 0-form; for unit sigma the inverse
    is the conjugate.  If ``dsigma`` is omitted it is computed with the
    pair's derivative scheme.
    """
    if sigma.degree != 0 or sigma.kind != "quat":
        raise ValueError("sigma must be a quaternion 0-form")
    mod = np.sqrt(qnorm2(sigma.values[0]))
    if np.max(np.abs(mod - 1.0)) > 1e-9:
        raise ValueError("sigma must be unit-quaternion valued")
    exact_dsigma = dsigma is not None or sigma.deriv is not None
    if dsigma is None:
        dsigma = sigma.deriv() if sigma.deriv is not None \
            else forms.d(sigma, p.scheme)
        exact_dsigma = sigma.deriv is not None
    s = sigma.values[0]
    sbar = qconj(s)
    phi_new = qmul(qmul(s, p.phi.values[0]), sbar)
    a_new = np.empty_like(p.a.values)
    for l in range(p.grid.n):
        a_new[l] = -qmul(dsigma.values[l], sbar) \
            + qmul(qmul(s, p.a.values[l]), sbar)

    analytic = (p.phi.deriv is not None and p.a.deriv is not None
                and exact_dsigma)

    grid = p.grid
    phi_form = Form(grid, 0, "quat", phi_new[None])
    a_form = Form(grid, 1, "quat", a_new)

    if analytic:
        dphi_old = p.phi.deriv()
        da2_old = p.a.deriv()
        ds = dsigma

        def dphi_new_form(_cache={}) -> Form:
            if "v" not in _cache:
                vals = np.empty_like(dphi_old.values)
                ph = p.phi.values[0]
                for l in range(grid.n):
                    dsl = ds.values[l]
                    vals[l] = (qmul(qmul(dsl, ph), sbar)
                               + qmul(qmul(s, dphi_old.values[l]), sbar)
                               + qmul(qmul(s, ph), qconj(dsl)))
                _cache["v"] = Form(grid, 1, "quat", vals)
            return _cache["v"]

        def da2_new_form(_cache={}) -> Form:
            if "v" not in _cache:
                # exact via gauge covariance: dA' = sigma F sigma^{-1} - A'^A'
                f_old = da2_old.values + wedge(p.a, p.a).values
                aa_new = wedge(a_form, a_form).values
                vals = np.empty_like(f_old)
                for ci in range(vals.shape[0]):
                    vals[ci] = qmul(qmul(s, f_old[ci]), sbar) - aa_new[ci]
                _cache["v"] = Form(grid, 2, "quat", vals)
            return _cache["v"]

        phi_form.deriv = dphi_new_form
        a_form.deriv = da2_new_form
        return Pair(phi_form, a_form, p.epsilon, scheme="analytic")

    return Pair(phi_form, a_form, p.epsilon, scheme=p.scheme)


def pure_gauge_pair(phi_unit: Form, alpha: Form, epsilon: float = 1.0) -> Pair:
    """Pair with A = (1/2) Phi^{-1} dPhi + Phi alpha for a unit section Phi.

    Guarantees d_A Phi = 0 and F_A = -(1/4) dPhi ^ dPhi + Phi d(alpha),
    exactly in analytic mode.
    """
    if phi_unit.degree != 0 or phi_unit.kind != "quat":
        raise ValueError("phi_unit must be a quaternion 0-form")
    if alpha.degree != 1 or alpha.kind != "real":
        raise ValueError("alpha must be a real 1-form")
    mod2 = qnorm2(phi_unit.values[0])
    if np.max(np.abs(mod2 - 1.0)) > 1e-9 or \
            np.max(np.abs(phi_unit.values[0][..., 0])) > 1e-12:
        raise ValueError("phi_unit must be unit imaginary-quaternion valued")
    grid = phi_unit.grid
    analytic = phi_unit.deriv is not None
    dphi = phi_unit.deriv() if analytic else forms.d(phi_unit, "central2")
    ph = phi_unit.values[0]
    a_vals = np.empty((grid.n,) + grid.shape + (4,))
    for l in range(grid.n):
        a_vals[l] = -0.5 * qmul(ph, dphi.values[l]) \
            + ph * alpha.values[l][..., None]
    a_form = Form(grid, 1, "quat", a_vals)

    if analytic:
        dalpha = alpha.deriv() if alpha.deriv is not None \
            else forms.d(alpha, "central2")

        def da2_form(_cache={}) -> Form:
            if "v" not in _cache:
                idx2 = comp_index(grid.n, 2)
                vals = np.empty((comb(grid.n, 2),) + grid.shape + (4,))
                for (l, m), ci in idx2.items():
                    vals[ci] = (-0.5 * (qmul(dphi.values[l], dphi.values[m])
                                        - qmul(dphi.values[m], dphi.values[l]))
                                + dphi.values[l] * alpha.values[m][..., None]
                                - dphi.values[m] * alpha.values[l][..., None]
                                + ph * dalpha.values[ci][..., None])
                _cache["v"] = Form(grid, 2, "quat", vals)
            return _cache["v"]

        a_form.deriv = da2_form
        return Pair(phi_unit, a_form, epsilon, scheme="analytic")
    return Pair(phi_unit, a_form, epsilon, scheme="central2")


# ---------------------------------------------------------------------------
# residuals, capping, pairings
# ---------------------------------------------------------------------------

def el_residual(p: Pair, scheme: str = "central2",
                interior: int = 2) -> tuple[float, float]:
    """Interior L2 norms of the Euler-Lagrange residuals.

    Returns (|d_A^* d_A Phi|, |eps^2 d_A^* F_A + [Phi, d_A Phi]|).
    """
    cov = cov_deriv(p, scheme)
    fa = curvature(p, scheme)
    r1 = codiff(cov, p.a, scheme)
    dstar_f = codiff(fa, p.a, scheme)
    ph = p.phi.values[0]
    br = np.empty_like(cov.values)
    for l in range(p.grid.n):
        br[l] = qmul(ph, cov.values[l]) - qmul(cov.values[l], ph)
    r2 = Form(p.grid, 1, "quat", p.epsilon ** 2 * dstar_f.values + br)
    return (forms.form_norm(r1, 2, interior=interior),
            forms.form_norm(r2, 2, interior=interior))


def cap_modulus(p: Pair) -> Pair:
    """Replace Phi by Phi/|Phi| where |Phi| > 1; never increases the energy."""
    ph = p.phi.values[0]
    mod = np.sqrt(qnorm2(ph))
    factor = 1.0 / np.maximum(mod, 1.0)
    phi_new = Form(p.grid, 0, "quat", (ph * factor[..., None])[None])
    return Pair(phi_new, p.a.copy(), p.epsilon,
                scheme="central2" if p.scheme == "analytic" else p.scheme)


def theta_pairing(p: Pair, theta: Form) -> tuple[float, float, float]:
    """Pair Z with a calibration (n-3)-form Theta.

    Returns (int Z ^ Theta, (2/eps) int |d_A Phi|^2, L2 monopole residual
    |star(d_A Phi) - eps F_A ^ Theta|).  The first two agree when the
    residual vanishes.
    """
    if theta.degree != p.grid.n - 3 or theta.kind != "real":
        raise ValueError("theta must be a real (n-3)-form")
    z = z_form(p)
    z_theta = integrate(wedge(z, theta)) if theta.degree > 0 else \
        integrate(Form(p.grid, p.grid.n, "real",
                       z.values * theta.values[0][None]))
    cov = cov_deriv(p)
    dir2 = 2.0 / p.epsilon * integrate(norm2_pointwise(cov))
    resid = Form(p.grid, p.grid.n - 1, "quat",
                 star(cov).values - p.epsilon * wedge(curvature(p), theta).values)
    return z_theta, dir2, forms.form_norm(resid, 2)


def modulus_deficit_sq_from_spec(spec: FieldSpec, grid: Grid) -> float:
    """Streamed int (1 - |Phi|)^2 on any quadrature grid."""
    w = trapezoid_weights(grid)
    total = 0.0
    tail = grid.shape[1:]
    for i0, i1 in _slab_ranges(grid):
        pts = grid.slab_points(i0, i1)
        mod = np.sqrt(qnorm2(spec.phi(pts))).reshape((i1 - i0,) + tail)
        total += float(np.sum(w[i0:i1] * (1.0 - mod) ** 2))
    return total


def modulus_deficit_sq(p: Pair) -> float:
    """int (1 - |Phi|)^2, streamed for analytic pairs on large grids."""
    if p.spec is not None and p.grid.num_nodes > _STREAM_THRESHOLD:
        return modulus_deficit_sq_from_spec(p.spec, p.grid)
    w = trapezoid_weights(p.grid)
    mod = np.sqrt(qnorm2(p.phi.values[0]))
    return float(np.sum(w * (1.0 - mod) ** 2))


# ---------------------------------------------------------------------------
# point evaluation (off-grid quadratures: spheres, faces, boundaries)
# ---------------------------------------------------------------------------

def point_fields(p: Pair, pts: np.ndarray,
                 _cache: dict | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(phi, d_A Phi, F_A) at arbitrary points.

    Uses the FieldSpec when present; otherwise multilinear interpolation
    of the grid forms (O(h^2) accurate).
    """
    if p.spec is not None:
        return _block_fields(p.spec, pts)
    cache = _cache if _cache is not None else {}
    if "cov" not in cache:
        cache["cov"] = cov_deriv(p)
        cache["curv"] = curvature(p)
    phi = forms.interp_components(p.phi, pts)[:, 0]
    G = forms.interp_components(cache["cov"], pts)
    F = forms.interp_components(cache["curv"], pts)
    return phi, G, F


def omega_at(p: Pair, pts: np.ndarray, phi_min: float = 0.75,
             _cache: dict | None = None) -> np.ndarray:
    """omega components at points; requires |Phi| >= phi_min there."""
    phi, G, F = point_fields(p, pts, _cache)
    mod = np.sqrt(qnorm2(phi))
    if np.min(mod) < phi_min:
        raise ValueError(f"|Phi| < {phi_min} on evaluation points "
                         f"(min {np.min(mod):.3g})")
    n = p.grid.n
    out = np.empty((pts.shape[0], comb(n, 2)))
    for ci, (l, m) in enumerate(combos(n, 2)):
        beta = qdot(phi, F[:, ci])
        ww = qmul(G[:, l], G[:, m]) - qmul(G[:, m], G[:, l])
        re_pww = qdot(phi, ww)
        out[:, ci] = (2.0 * beta - 0.5 * re_pww / mod ** 2) / mod
    return out


def sphere_flux(p: Pair, center, radius: float, field: str = "omega",
                n_theta: int = 96, n_phi: int = 192,
                phi_min: float = 0.75) -> float:
    """Flux of a real 2-form field ("omega" or "beta") through a sphere.

    Midpoint rule in the polar angle, periodic trapezoid in azimuth;
    only meaningful on 3-dimensional grids.
    """
    if p.grid.n != 3:
        raise ValueError("sphere_flux needs a 3-dimensional pair")
    c = np.asarray(center, dtype=float)
    th = (np.arange(n_theta) + 0.5) * np.pi / n_theta
    phv = np.arange(n_phi) * 2.0 * np.pi / n_phi
    TH, PH = np.meshgrid(th, phv, indexing="ij")
    st, ct = np.sin(TH), np.cos(TH)
    cp, sp = np.cos(PH), np.sin(PH)
    pts = np.stack([c[0] + radius * st * cp,
                    c[1] + radius * st * sp,
                    c[2] + radius * ct], axis=-1).reshape(-1, 3)
    # tangent vectors d/dtheta, d/dphi
    e_th = np.stack([radius * ct * cp, radius * ct * sp,
                     -radius * st], axis=-1).reshape(-1, 3)
    e_ph = np.stack([-radius * st * sp, radius * st * cp,
                     np.zeros_like(st)], axis=-1).reshape(-1, 3)
    if field == "omega":
        comps = omega_at(p, pts, phi_min=phi_min)
    elif field == "beta":
        phi, _, F = point_fields(p, pts)
        comps = np.stack([qdot(phi, F[:, ci]) for ci in range(3)], axis=-1)
    else:
        raise ValueError(f"unknown field {field!r}")
    # 2-form on tangent pair: sum_{i<j} w_ij (u_i v_j - u_j v_i)
    flux_dens = np.zeros(pts.shape[0])
    for ci, (i, j) in enumerate(combos(3, 2)):
        flux_dens += comps[:, ci] * (e_th[:, i] * e_ph[:, j]
                                     - e_th[:, j] * e_ph[:, i])
    dth = np.pi / n_theta
    dph = 2.0 * np.pi / n_phi
    return float(np.sum(flux_dens) * dth * dph)
