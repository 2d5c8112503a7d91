"""Energy minimization with Dirichlet boundary data (discrete Plateau solver).

Minimizes the discrete epsilon-Yang-Mills-Higgs energy over the free
node values of (Phi, A), holding Phi and the tangential components of A
fixed on the box boundary (the normal component stays free, which is
exactly the gauge slack the gluing lemma exploits).  The gradient is the
exact derivative of the discrete energy; descent uses a two-point
Barzilai-Borwein step safeguarded by Armijo backtracking, so the energy
trace is monotone by construction.

Also provides the covariant-harmonic section solve (CG on the normal
equations), boundary normal gauging, boundary data sampled from
recovery pairs, and extraction of the limiting current from a family of
minimizers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi
from typing import Callable

import numpy as np

from . import currents, forms, gauge, recovery
from .forms import Form, Grid, deriv_matrix, trapezoid_weights
from .quat import cross3

__all__ = [
    "BoundaryData",
    "MinimizeOptions",
    "MinimizeResult",
    "discrete_energy",
    "energy_and_gradient",
    "gradient_fd_error",
    "minimize",
    "harmonic_section",
    "normal_gauge",
    "boundary_data_from_spec",
    "boundary_data_from_recovery",
    "extract_plateau",
    "pair_from_state",
    "state_from_pair",
]


@dataclass
class BoundaryData:
    """Constrained values and masks for the Dirichlet problem.

    Phi is pinned at every boundary node; only tangential A components
    are pinned on their faces (the normal component is free).
    """

    grid: Grid
    phi_bc: np.ndarray     # (*shape, 3)
    a_bc: np.ndarray       # (n, *shape, 3)
    phi_fixed: np.ndarray  # (*shape,) bool
    a_fixed: np.ndarray    # (n, *shape) bool

    @classmethod
    def empty(cls, grid: Grid) -> "BoundaryData":
        """Zero boundary data (constant vacuum section)."""
        phi_bc = np.zeros(grid.shape + (3,))
        a_bc = np.zeros((grid.n,) + grid.shape + (3,))
        phi_fixed, a_fixed = _boundary_masks(grid)
        return cls(grid, phi_bc, a_bc, phi_fixed, a_fixed)


def _boundary_masks(grid: Grid):
    n = grid.n
    phi_fixed = np.zeros(grid.shape, dtype=bool)
    for a in range(n):
        sl = [slice(None)] * n
        for k in (0, grid.shape[a] - 1):
            sl[a] = k
            phi_fixed[tuple(sl)] = True
    a_fixed = np.zeros((n,) + grid.shape, dtype=bool)
    for comp in range(n):
        for a in range(n):
            if a == comp:
                continue  # normal component stays free on its face
            sl = [slice(None)] * n
            for k in (0, grid.shape[a] - 1):
                sl[a] = k
                a_fixed[(comp,) + tuple(sl)] = True
    return phi_fixed, a_fixed


@dataclass
class MinimizeOptions:
    """Descent controls; tolerances must be positive."""

    max_iter: int = 2000
    grad_tol: float = 1e-5
    step0: float = 1e-2
    step_rule: str = "bb"          # "bb" or "fixed" (both backtracked)
    armijo: float = 1e-4
    max_backtracks: int = 40
    seed: int | None = None
    noise_amp: float = 0.0
    init: gauge.Pair | None = None

    def __post_init__(self):
        if self.grad_tol <= 0 or self.step0 <= 0:
            raise ValueError("tolerances must be positive")
        if self.step_rule not in ("bb", "fixed"):
            raise ValueError("step_rule must be 'bb' or 'fixed'")


@dataclass
class MinimizeResult:
    pair: gauge.Pair
    report: gauge.EnergyReport
    trace: list            # rows (iter, energy, gradnorm, step)
    converged: bool


# ---------------------------------------------------------------------------
# discrete energy and its exact gradient on raw state arrays
#
# Link/plaquette collocation: covariant derivatives live on grid edges
# (forward difference plus edge-averaged bracket) and curvatures on
# plaquette centers.  Unlike central differences, this discretization
# has no checkerboard null modes, so descent cannot unwind a monopole
# through the even/odd sublattices.
# ---------------------------------------------------------------------------

def _apply(M: np.ndarray, arr: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(M, np.moveaxis(arr, axis, 0), axes=(1, 0))
    return np.moveaxis(out, 0, axis)


def _diff_link(arr, axis, h):
    sl_m = [slice(None)] * arr.ndim
    sl_p = [slice(None)] * arr.ndim
    sl_m[axis] = slice(None, -1)
    sl_p[axis] = slice(1, None)
    return (arr[tuple(sl_p)] - arr[tuple(sl_m)]) / h


def _avg_link(arr, axis):
    sl_m = [slice(None)] * arr.ndim
    sl_p = [slice(None)] * arr.ndim
    sl_m[axis] = slice(None, -1)
    sl_p[axis] = slice(1, None)
    return 0.5 * (arr[tuple(sl_p)] + arr[tuple(sl_m)])


def _diff_link_T(arr, axis, h, out_shape):
    """Adjoint of _diff_link: scatter link values back to nodes."""
    out = np.zeros(out_shape)
    sl_m = [slice(None)] * len(out_shape)
    sl_p = [slice(None)] * len(out_shape)
    sl_m[axis] = slice(None, -1)
    sl_p[axis] = slice(1, None)
    out[tuple(sl_p)] += arr / h
    out[tuple(sl_m)] -= arr / h
    return out


def _avg_link_T(arr, axis, out_shape):
    out = np.zeros(out_shape)
    sl_m = [slice(None)] * len(out_shape)
    sl_p = [slice(None)] * len(out_shape)
    sl_m[axis] = slice(None, -1)
    sl_p[axis] = slice(1, None)
    out[tuple(sl_p)] += 0.5 * arr
    out[tuple(sl_m)] += 0.5 * arr
    return out


@dataclass
class _Quad:
    """Quadrature weights on links and plaquettes (trapezoid transverse)."""

    link: dict      # axis -> weight array over link lattice
    plaq: dict      # (l, m) -> weight array over plaquette lattice


def _quad_weights(grid: Grid) -> _Quad:
    n = grid.n
    h = grid.h

    def axis_w(m, reduced):
        if reduced:
            return np.full(m - 1, h)
        w = np.full(m, h)
        w[0] = w[-1] = h / 2.0
        return w

    link = {}
    for l in range(n):
        w = None
        for b in range(n):
            wb = axis_w(grid.shape[b], b == l)
            w = wb if w is None else np.multiply.outer(w, wb)
        link[l] = w
    plaq = {}
    for l in range(n):
        for m in range(l + 1, n):
            w = None
            for b in range(n):
                wb = axis_w(grid.shape[b], b in (l, m))
                w = wb if w is None else np.multiply.outer(w, wb)
            plaq[(l, m)] = w
    return _Quad(link, plaq)


def _cov_links(phi, a, grid: Grid):
    """G_l on l-links: forward difference + bracket of edge averages."""
    h = grid.h
    out = {}
    for l in range(grid.n):
        abar = _avg_link(a[l], l)
        pbar = _avg_link(phi, l)
        out[l] = _diff_link(phi, l, h) + 2.0 * cross3(abar, pbar)
    return out


def _curv_plaq(a, grid: Grid):
    """F_lm at plaquette centers from edge differences and corner averages."""
    h = grid.h
    out = {}
    for l in range(grid.n):
        for m in range(l + 1, grid.n):
            dl_am = _avg_link(_diff_link(a[m], l, h), m)
            dm_al = _avg_link(_diff_link(a[l], m, h), l)
            al_c = _avg_link(_avg_link(a[l], l), m)
            am_c = _avg_link(_avg_link(a[m], m), l)
            out[(l, m)] = dl_am - dm_al + 2.0 * cross3(al_c, am_c)
    return out


def discrete_energy(phi, a, epsilon, grid):
    q = _quad_weights(grid)
    G = _cov_links(phi, a, grid)
    F = _curv_plaq(a, grid)
    e = sum(float(np.sum(q.link[l][..., None] * g * g))
            for l, g in G.items()) / epsilon
    e += epsilon * sum(float(np.sum(q.plaq[lm][..., None] * f * f))
                       for lm, f in F.items())
    return e


def energy_and_gradient(phi, a, epsilon, grid):
    """Energy plus its exact gradient in (Phi, A).

    Adjoints of the link difference/average operators scatter the
    residuals back to nodes; brackets use <R,[U,X]> = <[R,U],X> with
    [u, v] = 2 u x v on imaginary values.
    """
    n = grid.n
    h = grid.h
    q = _quad_weights(grid)
    G = _cov_links(phi, a, grid)
    F = _curv_plaq(a, grid)
    energy = sum(float(np.sum(q.link[l][..., None] * g * g))
                 for l, g in G.items()) / epsilon \
        + epsilon * sum(float(np.sum(q.plaq[lm][..., None] * f * f))
                        for lm, f in F.items())

    node_shape = grid.shape + (3,)
    gphi = np.zeros(node_shape)
    ga = np.zeros((n,) + grid.shape + (3,))

    for l in range(n):
        R = (2.0 / epsilon) * q.link[l][..., None] * G[l]
        abar = _avg_link(a[l], l)
        pbar = _avg_link(phi, l)
        gphi += _diff_link_T(R, l, h, node_shape)
        gphi += _avg_link_T(2.0 * cross3(R, abar), l, node_shape)
        ga[l] += _avg_link_T(2.0 * cross3(pbar, R), l, node_shape)

    for (l, m), f in F.items():
        S = 2.0 * epsilon * q.plaq[(l, m)][..., None] * f
        al_c = _avg_link(_avg_link(a[l], l), m)
        am_c = _avg_link(_avg_link(a[m], m), l)
        red_l = tuple(grid.shape[b] - (1 if b == l else 0)
                      for b in range(n)) + (3,)   # reduced along axis l
        red_m = tuple(grid.shape[b] - (1 if b == m else 0)
                      for b in range(n)) + (3,)   # reduced along axis m
        # d/dA_m of avg_m(diff_l A_m): diff_l^T then avg_m^T
        ga[m] += _diff_link_T(_avg_link_T(S, m, red_l), l, h, node_shape)
        ga[l] -= _diff_link_T(_avg_link_T(S, l, red_m), m, h, node_shape)
        # bracket terms through the corner averages:
        # am_c = avg_l(avg_m A_m), al_c = avg_m(avg_l A_l)
        gm = 2.0 * cross3(S, al_c)
        ga[m] += _avg_link_T(_avg_link_T(gm, l, red_m), m, node_shape)
        gl = 2.0 * cross3(am_c, S)
        ga[l] += _avg_link_T(_avg_link_T(gl, m, red_l), l, node_shape)
    return energy, gphi, ga


def gradient_fd_error(phi, a, epsilon, grid, n_dirs: int = 20,
                      h: float = 1e-6, seed: int = 0) -> float:
    """Max relative error of the analytic gradient against central FD."""
    rng = np.random.default_rng(seed)
    _, gphi, ga = energy_and_gradient(phi, a, epsilon, grid)
    worst = 0.0
    for _ in range(n_dirs):
        dphi = rng.standard_normal(phi.shape)
        da = rng.standard_normal(a.shape)
        scale = np.sqrt(np.sum(dphi**2) + np.sum(da**2))
        dphi /= scale
        da /= scale
        ep = discrete_energy(phi + h * dphi, a + h * da, epsilon, grid)
        em = discrete_energy(phi - h * dphi, a - h * da, epsilon, grid)
        fd = (ep - em) / (2 * h)
        an = float(np.sum(gphi * dphi) + np.sum(ga * da))
        denom = max(abs(fd), abs(an), 1e-14)
        worst = max(worst, abs(fd - an) / denom)
    return worst


def state_from_pair(p: gauge.Pair):
    phi = p.phi.values[0][..., 1:].copy()
    a = p.a.values[..., 1:].copy()
    return phi, a


def pair_from_state(phi, a, epsilon, grid) -> gauge.Pair:
    pv = np.zeros(grid.shape + (4,))
    pv[..., 1:] = phi
    av = np.zeros((grid.n,) + grid.shape + (4,))
    av[..., 1:] = a
    return gauge.Pair(Form(grid, 0, "quat", pv[None]),
                      Form(grid, 1, "quat", av), epsilon)


# ---------------------------------------------------------------------------
# projected descent
# ---------------------------------------------------------------------------

def minimize(bd: BoundaryData, epsilon: float, grid: Grid,
             opts: MinimizeOptions | None = None) -> MinimizeResult:
    """Projected gradient descent on the free node values of (Phi, A).

    The energy trace is non-increasing (Armijo backtracking); failure to
    decrease within the backtracking budget raises with the trace
    attached.  The monopole core must be resolved: epsilon >= 2h.
    """
    opts = opts or MinimizeOptions()
    if epsilon < 2.0 * grid.h * (1.0 - 1e-12):
        raise ValueError(f"epsilon {epsilon} under-resolved: need >= 2h = "
                         f"{2 * grid.h}")
    if bd.grid != grid:
        raise ValueError("boundary data grid mismatch")

    if opts.init is not None:
        phi, a = state_from_pair(opts.init)
    else:
        phi = np.zeros(grid.shape + (3,))
        a = np.zeros((grid.n,) + grid.shape + (3,))
    if opts.noise_amp > 0:
        rng = np.random.default_rng(opts.seed)
        phi = phi + opts.noise_amp * rng.standard_normal(phi.shape)
        a = a + opts.noise_amp * rng.standard_normal(a.shape)
    phi[bd.phi_fixed] = bd.phi_bc[bd.phi_fixed]
    a[bd.a_fixed] = bd.a_bc[bd.a_fixed]

    free_phi = ~bd.phi_fixed
    free_a = ~bd.a_fixed

    def project(gp, ga_):
        gp = gp.copy()
        ga_ = ga_.copy()
        gp[bd.phi_fixed] = 0.0
        ga_[bd.a_fixed] = 0.0
        return gp, ga_

    energy, gphi, ga = energy_and_gradient(phi, a, epsilon, grid)
    gphi, ga = project(gphi, ga)
    gnorm = float(np.sqrt(np.sum(gphi**2) + np.sum(ga**2)))
    trace = [(0, energy, gnorm, 0.0)]
    alpha = opts.step0
    prev = None
    converged = gnorm <= opts.grad_tol

    for it in range(1, opts.max_iter + 1):
        if converged:
            break
        if opts.step_rule == "bb" and prev is not None:
            sp, sa, yp, ya = prev
            sy = float(np.sum(sp * yp) + np.sum(sa * ya))
            ss = float(np.sum(sp * sp) + np.sum(sa * sa))
            if sy > 1e-300:
                alpha = min(max(ss / sy, 1e-10), 1e4)
        ok = False
        for _ in range(opts.max_backtracks):
            phi_new = phi - alpha * gphi
            a_new = a - alpha * ga
            e_new = discrete_energy(phi_new, a_new, epsilon, grid)
            if e_new <= energy - opts.armijo * alpha * gnorm**2:
                ok = True
                break
            alpha *= 0.5
        if not ok:
            raise RuntimeError(
                f"descent stalled at iteration {it}: no decrease after "
                f"{opts.max_backtracks} backtracks (trace length {len(trace)})")
        e2, gphi_new, ga_new = energy_and_gradient(phi_new, a_new, epsilon, grid)
        gphi_new, ga_new = project(gphi_new, ga_new)
        prev = (phi_new - phi, a_new - a, gphi_new - gphi, ga_new - ga)
        phi, a = phi_new, a_new
        energy, gphi, ga = e2, gphi_new, ga_new
        gnorm = float(np.sqrt(np.sum(gphi**2) + np.sum(ga**2)))
        trace.append((it, energy, gnorm, alpha))
        converged = gnorm <= opts.grad_tol

    pair = pair_from_state(phi, a, epsilon, grid)
    report = gauge.energy(pair)
    return MinimizeResult(pair, report, trace, converged)


# ---------------------------------------------------------------------------
# covariant-harmonic section (linear SPD solve)
# ---------------------------------------------------------------------------

def harmonic_section(a_form: Form, phi_bc: np.ndarray,
                     tol: float = 1e-10, maxiter: int | None = None,
                     check_max_modulus: bool = True) -> tuple[Form, float]:
    """Solve d_A^* d_A Phi = 0 with Phi pinned on the boundary.

    Returns the section and the relative residual of the normal
    equations.  The operator is the gradient of the convex link energy
    sum over grid edges of |(Phi_+ - Phi_-)/h + [A_mid, Phi_mid]|^2
    (forward differences, midpoint quadrature): symmetric positive
    semidefinite, compact-stencil, and exactly harmonic on affine data.
    The discrete maximum-modulus audit (interior modulus bounded by the
    boundary modulus) is checked when requested.
    """
    from scipy.sparse.linalg import LinearOperator, cg

    grid = a_form.grid
    n = grid.n
    h = grid.h
    a = a_form.values[..., 1:]
    phi_fixed, _ = _boundary_masks(grid)
    free = ~phi_fixed
    nfree = int(np.sum(free))

    def K(phi):
        out = np.zeros_like(phi)
        for l in range(n):
            sl_m = [slice(None)] * n
            sl_p = [slice(None)] * n
            sl_m[l] = slice(None, -1)
            sl_p[l] = slice(1, None)
            sl_m, sl_p = tuple(sl_m), tuple(sl_p)
            abar = 0.5 * (a[l][sl_p] + a[l][sl_m])
            G = (phi[sl_p] - phi[sl_m]) / h \
                + cross3(2.0 * abar, 0.5 * (phi[sl_p] + phi[sl_m]))
            out[sl_p] += G / h + cross3(G, abar)
            out[sl_m] += -G / h + cross3(G, abar)
        return out

    bc = np.zeros(grid.shape + (3,))
    bc[phi_fixed] = np.asarray(phi_bc, dtype=float)[phi_fixed]
    rhs = -K(bc)[free].ravel()

    def matvec(x):
        phi = np.zeros(grid.shape + (3,))
        phi[free] = x.reshape(nfree, 3)
        return K(phi)[free].ravel()

    op = LinearOperator((3 * nfree, 3 * nfree), matvec=matvec)
    x, info = cg(op, rhs, rtol=tol, atol=0.0,
                 maxiter=maxiter or 40 * max(grid.shape))
    if info > 0:
        raise RuntimeError(f"harmonic solve failed to converge ({info} iters)")
    resid = float(np.linalg.norm(matvec(x) - rhs)
                  / max(np.linalg.norm(rhs), 1e-300))
    phi = bc.copy()
    phi[free] = x.reshape(nfree, 3)

    if check_max_modulus:
        mod = np.linalg.norm(phi, axis=-1)
        inner = float(np.max(mod[free]))
        outer = float(np.max(mod[phi_fixed])) if np.any(phi_fixed) else 0.0
        if inner > outer + 1e-8:
            raise RuntimeError(
                f"maximum-modulus audit failed: interior {inner:.6f} > "
                f"boundary {outer:.6f} + 1e-8")
    vals = np.zeros(grid.shape + (4,))
    vals[..., 1:] = phi
    return Form(grid, 0, "quat", vals[None]), resid


# ---------------------------------------------------------------------------
# boundary gauging and boundary data
# ---------------------------------------------------------------------------

def normal_gauge(p: gauge.Pair, axis: int, side: int,
                 collar: float | None = None) -> gauge.Pair:
    """Gauge away the normal component of A on one boundary face.

    Builds g = exp(chi(x) phi(P(x))) with phi = -<A, nu> on the face and
    chi equal to the distance to the face in a thin collar, so that
    <A^g, nu> = 0 on the face exactly, leaving the pair untouched beyond
    the collar.
    """
    grid = p.grid
    n = grid.n
    if side not in (0, 1):
        raise ValueError("side must be 0 (lo) or 1 (hi)")
    w = collar if collar is not None else 0.25 * (grid.hi[axis] - grid.lo[axis])
    t1 = w / 4.0

    # distance into the domain from the chosen face
    coords = grid.coords()
    xm = coords[axis]
    t = (grid.hi[axis] - xm) if side == 1 else (xm - grid.lo[axis])

    # chi: equal to t near the face, then a cubic Hermite ramp from
    # (t1, value t1, slope 1) down to (w, 0, 0); C^1 overall
    s = np.clip((t - t1) / (w - t1), 0.0, 1.0)
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    chi = np.where(t <= t1, t, h00 * t1 + h10 * (w - t1))
    dchi_dt = np.where(t <= t1, 1.0,
                       (6 * s**2 - 6 * s) * t1 / (w - t1)
                       + (3 * s**2 - 4 * s + 1))
    dchi_dt = np.where(t >= w, 0.0, dchi_dt)
    sgn_dt = -1.0 if side == 1 else 1.0  # dt/dx_axis

    # face values of phi = -<A, nu>, extended constant along the normal
    sl = [slice(None)] * n
    sl[axis] = grid.shape[axis] - 1 if side == 1 else 0
    nu_sign = 1.0 if side == 1 else -1.0
    a_face = nu_sign * p.a.values[axis][tuple(sl)][..., 1:]  # <A, nu> on face
    wvec = -a_face  # (face shape, 3)
    wfield = np.broadcast_to(
        np.expand_dims(wvec, axis), grid.shape + (3,)).copy()

    # tangential derivatives of the face data (constant along the normal)
    dw = np.zeros((n,) + grid.shape + (3,))
    for b in range(n):
        if b == axis:
            continue
        dw[b] = _apply(deriv_matrix(grid.shape[b], grid.h, 2), wfield, b)

    u_field = chi[..., None] * wfield
    du = np.zeros((n,) + grid.shape + (3,))
    for b in range(n):
        dt_b = dchi_dt * (sgn_dt if b == axis else 0.0)
        du[b] = dt_b[..., None] * wfield + chi[..., None] * dw[b]

    # sigma = exp(u): cos r + sin r * uhat, with exact differential
    r = np.linalg.norm(u_field, axis=-1)
    rsafe = np.where(r < 1e-30, 1.0, r)
    uhat = u_field / rsafe[..., None]
    sinc = np.where(r < 1e-6, 1.0 - r * r / 6.0, np.sin(r) / rsafe)
    sig = np.zeros(grid.shape + (4,))
    sig[..., 0] = np.cos(r)
    sig[..., 1:] = sinc[..., None] * u_field
    dsig = np.zeros((n,) + grid.shape + (4,))
    for b in range(n):
        dr = np.sum(uhat * du[b], axis=-1)
        dsig[b, ..., 0] = -np.sin(r) * dr
        dsig[b, ..., 1:] = (np.cos(r) * dr - sinc * dr)[..., None] * uhat \
            + sinc[..., None] * du[b]
    sigma = Form(grid, 0, "quat", sig[None])
    dsigma = Form(grid, 1, "quat", dsig)
    return gauge.gauge_transform(p, sigma, dsigma=dsigma)


def boundary_data_from_spec(spec: gauge.FieldSpec, grid: Grid) -> BoundaryData:
    """Sample a FieldSpec on the box boundary and restrict tangentially."""
    bd = BoundaryData.empty(grid)
    n = grid.n
    coords = grid.coords()
    for a in range(n):
        for k in (0, grid.shape[a] - 1):
            sl = [slice(None)] * n
            sl[a] = k
            sl = tuple(sl)
            pts = np.stack([c[sl].ravel() for c in coords], axis=-1)
            phi, _, a1, _ = spec.eval_all(pts)
            face_shape = grid.shape[:a] + grid.shape[a + 1:]
            bd.phi_bc[sl] = phi[:, 1:].reshape(face_shape + (3,))
            for comp in range(n):
                if comp == a:
                    continue  # tangential components only
                bd.a_bc[(comp,) + sl] = \
                    a1[:, comp, 1:].reshape(face_shape + (3,))
    return bd


def boundary_data_from_recovery(P: recovery.PolyCurrent, epsilon: float,
                                grid: Grid,
                                options: recovery.RecoveryOptions | None = None
                                ) -> BoundaryData:
    """Boundary data of the recovery pair of a reference fill-in.

    Empty currents give zero data.  In n=4 the current must meet the
    boundary transversally (segment endpoints on or beyond the faces of
    the box, never tangent to them).
    """
    if not P.cells:
        return BoundaryData.empty(grid)
    if P.n != grid.n:
        raise ValueError("current dimension does not match the grid")
    if P.n == 4:
        for c in P.cells:
            v = c.vert_array
            d = v[1] - v[0]
            ax = int(np.argmax(np.abs(d)))
            t0, t1 = sorted((v[0][ax], v[1][ax]))
            if t0 > grid.lo[ax] + 1e-9 or t1 < grid.hi[ax] - 1e-9:
                raise ValueError(
                    "current must meet the box boundary transversally: "
                    f"segment spans [{t0}, {t1}] inside axis {ax}")
    spec = recovery.recovery_field_spec(P, epsilon, (grid.lo, grid.hi),
                                        options)
    return boundary_data_from_spec(spec, grid)


# ---------------------------------------------------------------------------
# extraction of the limiting current
# ---------------------------------------------------------------------------

def extract_plateau(runs: list, reference: currents.DiscreteZeroCurrent,
                    ell: float, offset=None, slice_axis: int = 3,
                    res: int = 8) -> tuple[list, dict]:
    """Cell currents of a minimizing family, compared to a geometric oracle.

    ``runs`` holds (epsilon, Pair) entries; 4-dimensional pairs are
    sliced at the mid-plane first.  The report carries the dictionary
    weak-* distance to the reference current and mass ratios against
    4 pi per unit length.
    """
    out = []
    rows = []
    for epsilon, p in runs:
        q = p
        if p.grid.n == 4:
            mid = 0.5 * (p.grid.lo[slice_axis] + p.grid.hi[slice_axis])
            q = currents.slice_pair(p, mid, axis=slice_axis)
        part = currents.cell_partition(q.grid, ell, offset)
        T = currents.cell_current(q, part)
        dist = currents.weak_star_distance(
            T, reference, domain=(q.grid.lo, q.grid.hi))
        rows.append({
            "epsilon": epsilon,
            "mass": T.mass(),
            "mass_over_4pi": T.mass() / (4.0 * pi),
            "weak_star_distance": dist,
            "max_atom": float(np.max(np.abs(T.weights))) if len(T.weights)
            else 0.0,
        })
        out.append(T)
    report = {"reference_mass": reference.mass(), "runs": rows}
    return out, report
