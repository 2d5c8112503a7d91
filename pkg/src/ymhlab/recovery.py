"""Recovery-sequence builder for polyhedral codimension-three currents.

Given a polyhedral current (signed points in R^3, or axis-parallel line
currents in R^4 treated translation-invariantly), constructs pairs
(Phi_eps, A_eps) whose energy approaches 4 pi times the current's mass
and whose concentration form Z accumulates on the current:

* a unit section v built as the normalized Coulomb field of the point
  charges (Gauss map), certified zero-free on the computational domain;
* Phi_eps = (1/tanh(2 rho/eps) - eps/(2 rho)) v with rho the distance
  to the current (and declared singular skeleton);
* inside tube neighborhoods the connection is the rescaled monopole
  connection in the v-frame, outside it is the pure-gauge form
  B = (1/2) v^{-1} dv, glued by smoothstep cutoffs.

Everything carries exact first derivatives, so recovery pairs stream
through the same analytic quadrature paths as the closed-form monopole.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import pi
from pathlib import Path

import numpy as np

from . import bps, gauge
from .forms import Form, Grid, combos
from .quat import cross3, dot3, qnorm2

__all__ = [
    "Cell",
    "PolyCurrent",
    "VField",
    "CutoffProfile",
    "RecoveryOptions",
    "distance_field",
    "distance_and_gradient",
    "gauss_map_v",
    "recovery_field_spec",
    "recovery_pair",
    "eta_cap",
    "eta_cap_profile",
]

ETA_MAX = 0.28


# ---------------------------------------------------------------------------
# polyhedral currents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cell:
    """Oriented simplex with integer multiplicity: a point or a segment."""

    dim: int
    mult: int
    verts: tuple

    def __post_init__(self):
        v = np.asarray(self.verts, dtype=float)
        if v.ndim != 2 or v.shape[0] != self.dim + 1:
            raise ValueError("cell needs dim+1 vertex rows")
        object.__setattr__(self, "verts", tuple(map(tuple, v)))
        if self.dim not in (0, 1):
            raise ValueError("only point and segment cells are supported")
        if self.mult not in (-1, 1):
            raise ValueError("multiplicity is restricted to +-1 per face")

    @property
    def vert_array(self) -> np.ndarray:
        return np.asarray(self.verts, dtype=float)

    def measure(self) -> float:
        if self.dim == 0:
            return 1.0
        a, b = self.vert_array
        return float(np.linalg.norm(b - a))


@dataclass
class PolyCurrent:
    """Polyhedral (n-3)-current with unit multiplicities plus skeleton data.

    ``skeleton`` lists the singular set the unit section is allowed to
    avoid (union of S and the (n-4)-skeleton); ``boundary`` records cells
    of the declared boundary (return paths, boundary points).
    """

    n: int
    cells: list[Cell] = field(default_factory=list)
    skeleton: list[Cell] = field(default_factory=list)
    boundary: list[Cell] = field(default_factory=list)

    def __post_init__(self):
        if self.n not in (3, 4):
            raise ValueError("ambient dimension must be 3 or 4")
        want_dim = self.n - 3
        for c in self.cells:
            if c.dim != want_dim:
                raise ValueError(
                    f"cells of an n={self.n} current must have dim {want_dim}")

    def mass(self) -> float:
        return sum(abs(c.mult) * c.measure() for c in self.cells)

    def total_multiplicity(self) -> int:
        return sum(c.mult for c in self.cells)

    def write(self, path) -> None:
        lines = [f"ambient {self.n}"]
        for tag, cells in (("cell", self.cells), ("skeleton", self.skeleton),
                           ("boundary", self.boundary)):
            for c in cells:
                coords = " ".join(f"{x:.17g}" for row in c.verts for x in row)
                lines.append(f"{tag} {c.dim} {c.mult} {coords}")
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def read(cls, path) -> "PolyCurrent":
        n = None
        groups: dict[str, list[Cell]] = {"cell": [], "skeleton": [], "boundary": []}
        for raw in Path(path).read_text().splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            if tok[0] == "ambient":
                n = int(tok[1])
                continue
            if tok[0] not in groups:
                raise ValueError(f"unknown record {tok[0]!r}")
            if n is None:
                raise ValueError("ambient dimension must come first")
            dim, mult = int(tok[1]), int(tok[2])
            coords = [float(x) for x in tok[3:]]
            if len(coords) != (dim + 1) * n:
                raise ValueError(f"bad coordinate count in line: {raw!r}")
            verts = np.asarray(coords, dtype=float).reshape(dim + 1, n)
            groups[tok[0]].append(Cell(dim, mult, tuple(map(tuple, verts))))
        if n is None:
            raise ValueError("missing ambient dimension")
        return cls(n, groups["cell"], groups["skeleton"], groups["boundary"])


def _cells_distance(cells: list[Cell], pts: np.ndarray):
    """Distance to a union of cells plus gradient (x - projection)/d."""
    N = pts.shape[0]
    best = np.full(N, np.inf)
    proj = np.zeros_like(pts)
    for c in cells:
        v = c.vert_array
        if c.dim == 0:
            p = v[0]
            d = np.linalg.norm(pts - p, axis=1)
            better = d < best
            best[better] = d[better]
            proj[better] = p
        else:
            a, b = v
            ab = b - a
            denom = float(np.dot(ab, ab))
            t = np.clip((pts - a) @ ab / denom, 0.0, 1.0)
            q = a + t[:, None] * ab
            d = np.linalg.norm(pts - q, axis=1)
            better = d < best
            best[better] = d[better]
            proj[better] = q[better]
    return best, proj


def distance_field(P: PolyCurrent, pts) -> np.ndarray:
    """Exact Euclidean distance to the union of cells and skeleton."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    cells = P.cells + P.skeleton
    if not cells:
        return np.full(pts.shape[0], np.inf)
    d, _ = _cells_distance(cells, pts)
    return d


def distance_and_gradient(cells: list[Cell], pts: np.ndarray):
    d, proj = _cells_distance(cells, pts)
    dsafe = np.where(d == 0.0, 1.0, d)
    grad = (pts - proj) / dsafe[:, None]
    return d, grad


# ---------------------------------------------------------------------------
# the unit section v (Coulomb Gauss map) and its certification
# ---------------------------------------------------------------------------

@dataclass
class VField:
    """Unit S^2-valued section with exact Jacobian and certification data.

    ``ev(pts) -> (N, 3)`` unit internal vectors; ``jac(pts) -> (N, n, 3)``
    ambient partials; ``cert`` records the zero-free certificate and the
    sampled constant in |dv| <= C / dist(x, P u S).
    """

    n: int
    ev: callable
    jac: callable
    cert: dict


def _coulomb(charges: np.ndarray, mults: np.ndarray, pts: np.ndarray):
    """Field E = sum q (x-p)/|x-p|^3 and partials dE (N, 3, 3)."""
    E = np.zeros((pts.shape[0], 3))
    dE = np.zeros((pts.shape[0], 3, 3))
    for p, q in zip(charges, mults):
        r = pts - p
        d2 = np.sum(r * r, axis=1)
        d = np.sqrt(d2)
        d3 = np.where(d == 0.0, np.inf, d2 * d)
        d5 = np.where(d == 0.0, np.inf, d2 * d2 * d)
        E += q * r / d3[:, None]
        dE += q * (np.eye(3)[None] / d3[:, None, None]
                   - 3.0 * r[:, :, None] * r[:, None, :] / d5[:, None, None])
    return E, dE


def _certify_zero_free(charges, mults, lo, hi, samples: int = 33) -> dict:
    """Per-sample certificate that |E| > 0 on the whole box.

    Each sample covers a ball of half the cell diagonal.  Away from the
    charges, |E| at the sample must dominate the analytic bound
    r_s * sum_i sqrt(6)/(d_i - r_s)^3 on the field's variation over the
    ball; near a charge, the closest charge must dominate the rest:
    1/(d_1 + r_s)^2 > sum_{i>1} 1/(d_i - r_s)^2.
    """
    axes = [np.linspace(lo[i], hi[i], samples) for i in range(3)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    cell = max((hi[i] - lo[i]) / (samples - 1) for i in range(3))
    r_s = cell * np.sqrt(3.0) / 2.0
    dists = np.linalg.norm(pts[:, None, :] - charges[None], axis=-1)
    dists.sort(axis=1)
    d1 = dists[:, 0]

    # near zone: the closest charge dominates everything else on the ball
    rest = dists[:, 1:]
    with np.errstate(divide="ignore"):
        rest_hi = np.sum(1.0 / np.maximum(rest - r_s, 1e-300) ** 2, axis=1)
    ok_near = (rest.shape[1] == 0) | (1.0 / (d1 + r_s) ** 2 > rest_hi)

    # far zone: sampled |E| beats the variation bound over the ball
    safe = dists > 2.0 * r_s
    all_safe = np.all(safe, axis=1)
    E, _ = _coulomb(charges, mults, pts)
    normE = np.linalg.norm(E, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        var = r_s * np.sum(np.sqrt(6.0) / np.maximum(dists - r_s, 1e-300) ** 3,
                           axis=1)
    ok_far = all_safe & (normE > var)

    ok = ok_near | ok_far
    if not np.all(ok):
        bad = pts[~ok]
        raise _CertFailure(
            "singular set S intersects domain: |E| not certified positive "
            f"at {len(bad)} sample cells (first near {tuple(bad[0])}); "
            "refine cert_samples or fix the charge configuration")
    far_vals = normE[all_safe]
    return {"min_E": float(np.min(far_vals)) if far_vals.size else float("inf"),
            "sample_radius": r_s, "samples": samples}


class _CertFailure(ValueError):
    pass


def _certify_adaptive(charges, mults, lo, hi, samples: int) -> dict:
    """Refine the sampling until the certificate passes or gives up."""
    s = samples
    while True:
        try:
            return _certify_zero_free(charges, mults, lo, hi, s)
        except _CertFailure:
            if s >= 160:
                raise
            s = 2 * s - 1


def gauss_map_v(P: PolyCurrent, domain: tuple | None = None,
                compensated_at_infinity: bool = False,
                certify: bool = True, samples: int = 24) -> VField:
    """Normalized Coulomb/line field of the current's cells.

    n=3: signed point charges, requiring zero total multiplicity unless
    the compensating charge is declared at infinity.  n=4: all cells must
    be segments parallel to one axis spanning the domain; the field is the
    transverse Coulomb map, constant along the invariant axis.
    """
    if P.n == 3:
        charges = np.array([c.vert_array[0] for c in P.cells])
        mults = np.array([float(c.mult) for c in P.cells])
        if len(charges) == 0:
            raise ValueError("current has no cells")
        if not compensated_at_infinity and P.total_multiplicity() != 0:
            raise ValueError(
                "n=3 point charges must have zero total multiplicity "
                "(or declare compensation at infinity)")
        trans = None
    else:
        segs = [c.vert_array for c in P.cells]
        if not segs:
            raise ValueError("current has no cells")
        dirs = [s[1] - s[0] for s in segs]
        axes_hit = [int(np.argmax(np.abs(d))) for d in dirs]
        for d, ax in zip(dirs, axes_hit):
            off = np.delete(d, ax)
            if np.max(np.abs(off)) > 1e-12 * np.abs(d[ax]):
                raise NotImplementedError(
                    "n=4 gauss map supports axis-parallel circuits only")
        if len(set(axes_hit)) != 1:
            raise NotImplementedError(
                "n=4 gauss map needs all segments parallel to one axis")
        axis = axes_hit[0]
        trans = np.array([i for i in range(4) if i != axis])
        charges = np.array([np.delete(s[0], axis) for s in segs])
        signs = [1.0 if d[axis] > 0 else -1.0 for d in dirs]
        mults = np.array([float(c.mult) * s for c, s in zip(P.cells, signs)])
        if len(charges) > 1 and not compensated_at_infinity \
                and abs(float(np.sum(mults))) > 0:
            raise ValueError("transverse charges must balance "
                             "(or declare compensation at infinity)")

    def _tpts(pts):
        return pts if trans is None else pts[:, trans]

    cert = {}
    if certify and domain is not None:
        lo = np.asarray(domain[0], dtype=float)
        hi = np.asarray(domain[1], dtype=float)
        if trans is not None:
            lo, hi = lo[trans], hi[trans]
        cert = _certify_adaptive(charges, mults, lo, hi, samples)

    def ev(pts):
        E, _ = _coulomb(charges, mults, _tpts(np.asarray(pts, dtype=float)))
        return E / np.linalg.norm(E, axis=1, keepdims=True)

    def jac(pts):
        pts = np.asarray(pts, dtype=float)
        E, dE = _coulomb(charges, mults, _tpts(pts))
        normE = np.linalg.norm(E, axis=1, keepdims=True)
        v = E / normE
        # d(v)_l = (dE_l - v <v, dE_l>)/|E|
        vd = np.einsum("Ni,Nli->Nl", v, dE)
        dv3 = (dE - v[:, None, :] * vd[:, :, None]) / normE[:, :, None]
        if trans is None:
            return dv3
        out = np.zeros((pts.shape[0], 4, 3))
        out[:, trans, :] = dv3
        return out

    n = P.n
    vf = VField(n=n, ev=ev, jac=jac, cert=cert)
    vf.cert.setdefault("transverse_axes", None if trans is None
                       else [int(t) for t in trans])
    return vf


def audit_dv_bound(vf: VField, P: PolyCurrent, domain, samples: int = 17,
                   rng=None) -> float:
    """Sampled constant C in |dv| <= C / dist(x, P u S)."""
    rng = np.random.default_rng(rng)
    lo = np.asarray(domain[0], dtype=float)
    hi = np.asarray(domain[1], dtype=float)
    pts = lo + (hi - lo) * rng.random((samples ** 2 * 10, P.n))
    rho = distance_field(P, pts)
    keep = rho > 1e-6
    dv = vf.jac(pts[keep])
    mag = np.sqrt(np.sum(dv * dv, axis=(1, 2)))
    return float(np.max(mag * rho[keep]))


# ---------------------------------------------------------------------------
# cutoffs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CutoffProfile:
    """C^2 quintic smoothstep from 1 (inside) to 0 (outside)."""

    inner: float
    outer: float

    def __post_init__(self):
        if not 0.0 <= self.inner < self.outer:
            raise ValueError("need 0 <= inner < outer")

    def value(self, t):
        u = np.clip((np.asarray(t, dtype=float) - self.inner)
                    / (self.outer - self.inner), 0.0, 1.0)
        return 1.0 - u**3 * (10.0 - 15.0 * u + 6.0 * u**2)

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        u = np.clip((t - self.inner) / (self.outer - self.inner), 0.0, 1.0)
        inside = (t > self.inner) & (t < self.outer)
        return np.where(inside,
                        -30.0 * u**2 * (1.0 - u) ** 2 / (self.outer - self.inner),
                        0.0)


def _profile_w(t):
    """Core interpolation weight W(t) = 2t/sinh(2t): 1 at the cell, 0 far.

    The tube connection in covariant form is A_l = a(t) t^2 (v x dv_l)
    = (1 - W) B_l, which reduces to the monopole connection in normal
    coordinates for either orientation of v.
    """
    t = np.asarray(t, dtype=float)
    small = t < bps.SERIES_SWITCH_RADIUS
    out = np.empty_like(t)
    out[small] = 1.0 - 2.0 * t[small] ** 2 / 3 + 14.0 * t[small] ** 4 / 45
    with np.errstate(over="ignore"):
        ts = t[~small]
        out[~small] = 2.0 * ts / np.sinh(2.0 * ts)
    return out


def _profile_wp(t):
    """Derivative W'(t) = 2 csch(2t) (1 - 2t coth(2t))."""
    t = np.asarray(t, dtype=float)
    small = t < bps.SERIES_SWITCH_RADIUS
    out = np.empty_like(t)
    out[small] = -4.0 * t[small] / 3 + 56.0 * t[small] ** 3 / 45
    with np.errstate(over="ignore"):
        ts = t[~small]
        sh = np.sinh(2.0 * ts)
        out[~small] = 2.0 / sh * (1.0 - 2.0 * ts / np.tanh(2.0 * ts))
    return out


# ---------------------------------------------------------------------------
# the recovery pair
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RecoveryOptions:
    """Tube geometry knobs.

    ``delta`` overrides the tube scale directly; otherwise it is
    delta_scale * eps**delta_exponent.  Cutoff radii follow the tube
    construction: the monopole connection fills rho <= c delta/2, the
    pure-gauge form takes over past c delta, and chi kills the pair
    within (C_skel .. C_skel+1) delta of the skeleton.
    """

    delta: float | None = None
    delta_exponent: float = 15.0 / 16.0
    delta_scale: float = 1.0
    c: float = 0.5
    C_skel: float = 2.0
    min_core_ratio: float = 0.5
    compensated_at_infinity: bool = False
    certify: bool = True
    cert_samples: int = 24
    nudge: float = 1e-9
    # optional eta-capping baked into the modulus profile: pushes |Phi|
    # to exactly 1 where the raw modulus exceeds 1 - eta^2, so the
    # concentration form vanishes identically off the tubes
    eta: float | None = None

    def tube_delta(self, epsilon: float) -> float:
        if self.delta is not None:
            return float(self.delta)
        return self.delta_scale * epsilon ** self.delta_exponent


def recovery_field_spec(P: PolyCurrent, epsilon: float,
                        domain: tuple,
                        options: RecoveryOptions | None = None) -> gauge.FieldSpec:
    """Analytic evaluators of the recovery pair for current P at scale eps."""
    opt = options or RecoveryOptions()
    n = P.n
    delta = opt.tube_delta(epsilon)
    psi_in, psi_out = opt.c * delta / 2.0, opt.c * delta
    if psi_in < opt.min_core_ratio * epsilon:
        raise ValueError(
            f"epsilon {epsilon:g} too large for tube radius {psi_in:g} "
            f"(delta={delta:g}, c={opt.c:g}); enlarge delta or shrink epsilon")
    psi = CutoffProfile(psi_in, psi_out)
    chi = (CutoffProfile(opt.C_skel * delta, (opt.C_skel + 1.0) * delta)
           if P.skeleton else None)

    vf = gauss_map_v(P, domain=domain if opt.certify else None,
                     compensated_at_infinity=opt.compensated_at_infinity,
                     certify=opt.certify, samples=opt.cert_samples)
    t_ax = vf.cert.get("transverse_axes")
    pairs2 = combos(n, 2)

    # ambient axes the cross-product frame acts on (all three in n=3,
    # the transverse triple in the invariant n=4 mode)
    act_axes = list(range(3)) if t_ax is None else list(t_ax)
    rho_cells = P.cells + P.skeleton
    if t_ax is not None:
        # invariant mode: rho is the transverse distance to the lines,
        # matching the translation-invariant unit section
        trans_pts = [Cell(0, c.mult, (tuple(np.asarray(c.verts[0])[t_ax]),))
                     for c in P.cells]

    def _rho(pts):
        if t_ax is None:
            return distance_and_gradient(rho_cells, pts)
        d, g3 = distance_and_gradient(trans_pts, pts[:, t_ax])
        grad = np.zeros_like(pts)
        grad[:, t_ax] = g3
        return d, grad

    def fields_fn(pts):
        pts = np.asarray(pts, dtype=float)
        N = pts.shape[0]
        rho, _ = _rho(pts)
        tiny = rho < opt.nudge * epsilon
        if np.any(tiny):
            # nudge off the singular locus; all fields are continuous there
            pts = pts.copy()
            pts[tiny, act_axes[0]] += opt.nudge * epsilon
        rho, grho = _rho(pts)

        v = vf.ev(pts)                      # (N, 3) internal
        dv = vf.jac(pts)                    # (N, n, 3) ambient partials
        t = rho / epsilon
        H = bps.profile_modulus(t)
        Hp = bps.profile_modulus_prime(t)
        if opt.eta is not None:
            cap_val, cap_der = eta_cap_profile(opt.eta)
            Hp = (cap_val(H) + H * cap_der(H)) * Hp   # (s phi(s))' chain rule
            H = H * cap_val(H)
        W = _profile_w(t)
        Wp = _profile_wp(t)

        # Phi carries the opposite-degree branch (-H v): with the Gauss
        # map normalized by *d(v* dA_{S^2}) = 4 pi P, this is the sign
        # for which the extracted Z atoms equal +4 pi x multiplicity
        # (pinned once by the monopole fixture)
        phi3 = -H[:, None] * v
        dphi3 = -(Hp / epsilon)[:, None, None] * grho[:, :, None] * v[:, None, :] \
            - H[:, None, None] * dv

        # pure gauge: B_m = -(1/2) v x dv_m; the tube connection is the
        # covariant monopole form (1 - W) B, so the glued connection is
        # A = chi * lam * B with lam = 1 - psi W.
        B = -0.5 * cross3(v[:, None, :], dv)

        psi_v = psi.value(rho)
        lam = 1.0 - psi_v * W
        dlam = -(psi.deriv(rho) * W + psi_v * Wp / epsilon)[:, None] * grho
        if chi is not None:
            rho_k, grho_k = distance_and_gradient(P.skeleton, pts)
            # chi vanishes near the skeleton and is 1 far away
            chi_v = 1.0 - chi.value(rho_k)
            dchi = -chi.deriv(rho_k)[:, None] * grho_k
        else:
            chi_v = np.ones(N)
            dchi = np.zeros((N, n))

        mu = chi_v * lam
        dmu = chi_v[:, None] * dlam + lam[:, None] * dchi
        A3 = mu[:, None, None] * B

        phi = np.zeros((N, 4))
        phi[:, 1:] = phi3
        dphi = np.zeros((N, n, 4))
        dphi[:, :, 1:] = dphi3
        a1 = np.zeros((N, n, 4))
        a1[:, :, 1:] = A3

        # dA = dmu ^ B + mu dB with dB = F_B - B ^ B, F_B = -(1/4) dv ^ dv
        da2 = np.zeros((N, len(pairs2), 4))
        for ci, (l, m) in enumerate(pairs2):
            FB = -0.5 * cross3(dv[:, l], dv[:, m])
            dB_as = FB - 2.0 * cross3(B[:, l], B[:, m])
            da2[:, ci, 1:] = mu[:, None] * dB_as \
                + dmu[:, l, None] * B[:, m] - dmu[:, m, None] * B[:, l]
        return phi, dphi, a1, da2

    return gauge.FieldSpec(
        n=n,
        phi=lambda pts: fields_fn(pts)[0],
        dphi=lambda pts: fields_fn(pts)[1],
        a=lambda pts: fields_fn(pts)[2],
        da2=lambda pts: fields_fn(pts)[3],
        fields=fields_fn,
    )


def recovery_pair(P: PolyCurrent, epsilon: float, grid: Grid,
                  options: RecoveryOptions | None = None) -> gauge.Pair:
    """Recovery pair sampled on a grid with analytic callbacks attached."""
    spec = recovery_field_spec(P, epsilon, (grid.lo, grid.hi), options)
    return gauge.pair_from_spec(spec, grid, epsilon)


# ---------------------------------------------------------------------------
# modulus post-processing (eta capping)
# ---------------------------------------------------------------------------

def eta_cap_profile(eta: float):
    """The multiplier phi_eta and its derivative as vectorized callables.

    phi = 1 on t <= 1 - eta, 1/t on t >= 1 - eta^2, and a monotone C^1
    bridge with a plateaued derivative in between, keeping |phi'| <= 2 eta
    on the bridge and phi <= 1 + 2 eta^2.
    """
    if not 0.0 < eta <= ETA_MAX:
        raise ValueError(
            f"eta must lie in (0, {ETA_MAX}]: larger values cannot satisfy "
            "the bridge constraints |phi'| <= 2 eta on [1-eta, 1-eta^2]")
    t0, t1 = 1.0 - eta, 1.0 - eta * eta
    w = t1 - t0
    ramp = w / 12.0
    dphi_total = 1.0 / t1 - 1.0
    slope = dphi_total / (w - ramp)

    def _ramp_int(u):
        # integral of the smoothstep ramp 3u^2-2u^3 from 0 to u
        return u**3 - 0.5 * u**4

    def value(t):
        t = np.asarray(t, dtype=float)
        out = np.ones_like(t)
        hi = t >= t1
        out[hi] = 1.0 / t[hi]
        mid = (t > t0) & (t < t1)
        tm = t[mid]
        acc = np.zeros_like(tm)
        # rising ramp
        u = np.clip((tm - t0) / ramp, 0.0, 1.0)
        acc += slope * ramp * _ramp_int(u)
        # plateau
        acc += slope * np.clip(tm - (t0 + ramp), 0.0, w - 2.0 * ramp)
        # falling ramp
        u = np.clip((tm - (t1 - ramp)) / ramp, 0.0, 1.0)
        acc += slope * ramp * (u - _ramp_int(u))
        out[mid] = 1.0 + acc
        return out

    def deriv(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        hi = t >= t1
        out[hi] = -1.0 / t[hi] ** 2
        mid = (t > t0) & (t < t1)
        tm = t[mid]
        up = np.clip((tm - t0) / ramp, 0.0, 1.0)
        down = np.clip((tm - (t1 - ramp)) / ramp, 0.0, 1.0)
        shape = up**2 * (3 - 2 * up) - down**2 * (3 - 2 * down)
        out[mid] = slope * shape
        return out

    return value, deriv


def eta_cap(p: gauge.Pair, eta: float) -> gauge.Pair:
    """Rescale Phi by phi_eta(|Phi|): the modulus is pushed to 1 where
    it already exceeds 1 - eta^2, at an energy inflation of order eta."""
    value, _ = eta_cap_profile(eta)
    ph = p.phi.values[0]
    mod = np.sqrt(qnorm2(ph))
    factor = value(mod)
    phi_new = Form(p.grid, 0, "quat", (ph * factor[..., None])[None])
    return gauge.Pair(phi_new, p.a.copy(), p.epsilon,
                      scheme="central2" if p.scheme == "analytic" else p.scheme)
