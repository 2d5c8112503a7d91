"""Current extraction and liminf-side diagnostics.

Cell-integrated Z currents, boundary-degree currents, the quantization
gap between them, energy-aware grid-skeleton selection, slicing of
4-dimensional pairs, and a dictionary weak-* distance standing in for
the flat norm on desk-scale fixtures.
"""

from __future__ import annotations

import functools
import json
import warnings
from dataclasses import dataclass, field
from math import pi
from pathlib import Path

import numpy as np

from . import forms, gauge
from .forms import Form, Grid, combos
from .quat import qnorm2

__all__ = [
    "DiscreteZeroCurrent",
    "CellPartition",
    "Surface",
    "sphere_surface",
    "box_surface",
    "degree",
    "solid_angle_sum",
    "cell_partition",
    "cell_current",
    "degree_current",
    "quantization_gap",
    "select_skeleton",
    "slice_pair",
    "weak_star_distance",
    "bump_dictionary",
    "poly_to_atoms",
]


@dataclass
class DiscreteZeroCurrent:
    """Finite sum of weighted Dirac masses at cell centers."""

    points: np.ndarray  # (k, n)
    weights: np.ndarray  # (k,)

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        if self.points.shape[0] != self.weights.shape[0]:
            raise ValueError("points and weights length mismatch")

    def mass(self) -> float:
        return float(np.sum(np.abs(self.weights)))

    def pair_with(self, fn) -> float:
        """<T, omega> for a scalar test function."""
        if len(self.weights) == 0:
            return 0.0
        return float(np.sum(self.weights * fn(self.points)))

    def to_csv(self, path) -> None:
        n = self.points.shape[1]
        header = ",".join(["x", "y", "z", "w"][:n]) + ",weight"
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for p, w in zip(self.points, self.weights):
                fh.write(",".join(f"{c:.17g}" for c in p) + f",{w:.17g}\n")

    def to_json(self) -> str:
        return json.dumps({
            "atoms": [{"point": list(p), "weight": float(w)}
                      for p, w in zip(self.points, self.weights)],
            "mass": self.mass(),
        }, sort_keys=True)


# ---------------------------------------------------------------------------
# triangulated surfaces and the solid-angle degree
# ---------------------------------------------------------------------------

@dataclass
class Surface:
    """Closed oriented triangulated surface in R^3."""

    vertices: np.ndarray  # (V, 3)
    triangles: np.ndarray  # (T, 3) int, outward-oriented


def sphere_surface(center, radius: float, n_theta: int = 24,
                   n_phi: int = 48) -> Surface:
    """Latitude-longitude triangulation, outward orientation."""
    c = np.asarray(center, dtype=float)
    th = np.linspace(0.0, np.pi, n_theta + 1)
    ph = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    verts = [c + radius * np.array([0.0, 0.0, 1.0])]
    ring_start = []
    for t in th[1:-1]:
        ring_start.append(len(verts))
        for p in ph:
            verts.append(c + radius * np.array(
                [np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)]))
    south = len(verts)
    verts.append(c + radius * np.array([0.0, 0.0, -1.0]))
    tris = []
    first = ring_start[0]
    for j in range(n_phi):
        tris.append((0, first + j, first + (j + 1) % n_phi))
    for r0, r1 in zip(ring_start[:-1], ring_start[1:]):
        for j in range(n_phi):
            j1 = (j + 1) % n_phi
            tris.append((r0 + j, r1 + j, r1 + j1))
            tris.append((r0 + j, r1 + j1, r0 + j1))
    last = ring_start[-1]
    for j in range(n_phi):
        tris.append((south, last + (j + 1) % n_phi, last + j))
    return Surface(np.asarray(verts), np.asarray(tris, dtype=int))


def box_surface(lo, hi, res: int = 8) -> Surface:
    """Boundary of a box as 6 faces, each res x res quads split in two."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    verts = []
    tris = []
    for axis in range(3):
        t1, t2 = [i for i in range(3) if i != axis]
        u = np.linspace(lo[t1], hi[t1], res + 1)
        w = np.linspace(lo[t2], hi[t2], res + 1)
        for side, val in ((0, lo[axis]), (1, hi[axis])):
            base = len(verts)
            for a in u:
                for b in w:
                    p = np.empty(3)
                    p[axis], p[t1], p[t2] = val, a, b
                    verts.append(p)
            def vid(i, j):
                return base + i * (res + 1) + j
            # (axis, t1, t2) with t1 < t2 is an even permutation iff axis is
            # even; outward means +axis on the hi side
            even = {0: True, 1: False, 2: True}[axis]
            pos = (side == 1) == even
            for i in range(res):
                for j in range(res):
                    q = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1),
                         vid(i, j + 1))
                    if pos:
                        tris.append((q[0], q[1], q[2]))
                        tris.append((q[0], q[2], q[3]))
                    else:
                        tris.append((q[0], q[2], q[1]))
                        tris.append((q[0], q[3], q[2]))
    return Surface(np.asarray(verts), np.asarray(tris, dtype=int))


def solid_angle_sum(unit_vals: np.ndarray, surface: Surface) -> float:
    """Sum of oriented spherical areas of the image triangles."""
    V = unit_vals
    a = V[surface.triangles[:, 0]]
    b = V[surface.triangles[:, 1]]
    c = V[surface.triangles[:, 2]]
    num = np.einsum("ij,ij->i", a, np.cross(b, c))
    den = 1.0 + np.einsum("ij,ij->i", a, b) \
        + np.einsum("ij,ij->i", b, c) + np.einsum("ij,ij->i", c, a)
    return float(np.sum(2.0 * np.arctan2(num, den)))


def degree(phi_vals: np.ndarray, surface: Surface, min_modulus: float = 0.75,
           tol: float = 0.2) -> int:
    """Degree of Phi/|Phi| on a closed surface from vertex samples.

    ``phi_vals`` holds Phi at the surface vertices, as (V, 3) imaginary
    components or (V, 4) quaternions.  Residuals beyond ``tol`` from an
    integer, or moduli below ``min_modulus``, are hard errors: the
    quantization identity is exact, so large residuals mean broken
    preconditions rather than noise.
    """
    vals = np.asarray(phi_vals, dtype=float)
    if vals.shape[1] == 4:
        vals = vals[:, 1:]
    mod = np.linalg.norm(vals, axis=1)
    if np.min(mod) < min_modulus:
        raise ValueError(
            f"|Phi| < {min_modulus} on the surface (min {np.min(mod):.4f})")
    total = solid_angle_sum(vals / mod[:, None], surface) / (4.0 * pi)
    resid = abs(total - round(total))
    if resid > tol:
        raise ValueError(f"degree ill-defined: residual {resid:.3f} from "
                         f"integer (raw {total:.4f})")
    return int(round(total))


# ---------------------------------------------------------------------------
# cell partitions and extracted currents
# ---------------------------------------------------------------------------

@dataclass
class CellPartition:
    """Cubical cells of side ell tiling a sub-box of the grid, node-aligned."""

    grid: Grid
    ell: float
    offset: tuple
    start: tuple       # node index of the partition origin, per axis
    counts: tuple      # number of cells per axis
    stride: int        # nodes per cell side

    @property
    def num_cells(self) -> int:
        return int(np.prod(self.counts))

    def cell_ranges(self):
        """Yield (multi-index, per-axis node slices, center) per cell."""
        for flat in range(self.num_cells):
            idx = np.unravel_index(flat, self.counts)
            sl = tuple(slice(self.start[a] + idx[a] * self.stride,
                             self.start[a] + (idx[a] + 1) * self.stride + 1)
                       for a in range(self.grid.n))
            center = tuple(self.grid.lo[a] + self.grid.h *
                           (self.start[a] + (idx[a] + 0.5) * self.stride)
                           for a in range(self.grid.n))
            yield idx, sl, center

    def cell_box(self, idx):
        lo = [self.grid.lo[a] + self.grid.h * (self.start[a] + idx[a] * self.stride)
              for a in range(self.grid.n)]
        hi = [b + self.grid.h * self.stride for b in lo]
        return np.array(lo), np.array(hi)


def cell_partition(grid: Grid, ell: float, offset=None) -> CellPartition:
    """Node-aligned partition; ell and offset snap to node multiples."""
    h = grid.h
    stride = int(round(ell / h))
    if stride < 1 or abs(stride * h - ell) > 1e-9 * max(1.0, ell):
        raise ValueError(f"cell side {ell} must be a node multiple of h={h}")
    if ell <= 4 * h:
        raise ValueError("cell side must exceed 4 grid spacings")
    n = grid.n
    if offset is None:
        offset = (0.0,) * n
    start = []
    counts = []
    for a in range(n):
        o_nodes = int(round(offset[a] / h))
        o_nodes %= stride
        start.append(o_nodes)
        counts.append((grid.shape[a] - 1 - o_nodes) // stride)
        if counts[-1] < 1:
            raise ValueError("partition leaves no complete cells")
    return CellPartition(grid, stride * h, tuple(o * h for o in start),
                         tuple(start), tuple(counts), stride)


@functools.lru_cache(maxsize=None)
def _cell_weights(stride: int, h: float, n: int) -> np.ndarray:
    w = np.full(stride + 1, h)
    w[0] = w[-1] = h / 2.0
    out = w
    for _ in range(n - 1):
        out = np.multiply.outer(out, w)
    return out


def cell_integrals(z: Form, part: CellPartition) -> DiscreteZeroCurrent:
    """Per-cell trapezoid integrals of a top-degree form at cell centers.

    Cell quadratures share faces with half weights, so the weights sum
    exactly to the integral over the tiled sub-box.
    """
    if z.grid != part.grid:
        raise ValueError("partition grid does not match the form grid")
    w = _cell_weights(part.stride, z.grid.h, z.grid.n)
    pts = []
    wts = []
    for _, sl, center in part.cell_ranges():
        pts.append(center)
        wts.append(float(np.sum(w * z.values[0][sl])))
    return DiscreteZeroCurrent(np.asarray(pts), np.asarray(wts))


def cell_current(p: gauge.Pair, part: CellPartition,
                 z: Form | None = None) -> DiscreteZeroCurrent:
    """Per-cell integrals of Z(Phi, A) placed at the cell centers."""
    if p.grid.n != 3:
        raise ValueError("cell_current needs a 3-dimensional pair; slice first")
    if z is None:
        z = gauge.z_form(p)
    return cell_integrals(z, part)


def degree_current(p: gauge.Pair, part: CellPartition, res: int = 8,
                   min_modulus: float = 0.75) -> DiscreteZeroCurrent:
    """Integer current with weight -deg(Phi/|Phi| on each cell boundary)."""
    if p.grid.n != 3:
        raise ValueError("degree_current needs a 3-dimensional pair")
    cache: dict = {}
    pts = []
    wts = []
    bad = []
    for idx, _, center in part.cell_ranges():
        lo, hi = part.cell_box(idx)
        surf = box_surface(lo, hi, res=res)
        phi, _, _ = gauge.point_fields(p, surf.vertices, _cache=cache)
        try:
            deg = degree(phi, surf, min_modulus=min_modulus)
        except ValueError as err:
            bad.append((idx, str(err)))
            continue
        pts.append(center)
        wts.append(-float(deg))
    if bad:
        raise ValueError(
            f"degree undefined on {len(bad)} cells: {bad[:3]} ...")
    return DiscreteZeroCurrent(np.asarray(pts), np.asarray(wts))


def quantization_gap(p: gauge.Pair, part: CellPartition, res: int = 8,
                     z: Form | None = None) -> float:
    """Mass of T_{eps,ell} - 4 pi S_{eps,ell}, matched atom by atom."""
    T = cell_current(p, part, z=z)
    S = degree_current(p, part, res=res)
    return float(np.sum(np.abs(T.weights - 4.0 * pi * S.weights)))


# ---------------------------------------------------------------------------
# skeleton selection (the averaging argument as explicit search)
# ---------------------------------------------------------------------------

def _face_energy(density: np.ndarray, deficit: np.ndarray, grid: Grid,
                 part: CellPartition, epsilon: float) -> float:
    """Surface integral of e_eps + (1/eps)(1-|Phi|)^2 over the 2-skeleton."""
    total = 0.0
    n = grid.n
    target = density + deficit / epsilon
    for a in range(n):
        planes = [part.start[a] + k * part.stride
                  for k in range(part.counts[a] + 1)]
        # transverse trapezoid weights restricted to the partition block
        w = None
        sel = []
        for b in range(n):
            if b == a:
                continue
            m = part.start[b] + part.counts[b] * part.stride
            wb = np.full(grid.shape[b], grid.h)
            wb[: part.start[b]] = 0.0
            wb[m + 1:] = 0.0
            wb[part.start[b]] = grid.h / 2.0
            wb[m] = grid.h / 2.0
            w = wb if w is None else np.multiply.outer(w, wb)
            sel.append(b)
        for k in planes:
            sl = [slice(None)] * n
            sl[a] = k
            total += float(np.sum(w * target[tuple(sl)]))
    return total


def select_skeleton(p: gauge.Pair, ell: float, trials: int = 8,
                    seed: int | None = 0) -> tuple[CellPartition, float]:
    """Search node-aligned offsets for the lowest-energy 2-skeleton.

    Realizes the averaging argument explicitly: among sampled offsets,
    returns the partition minimizing int_{S2} e_eps + (1/eps)(1-|Phi|)^2,
    with deterministic lexicographic tie-breaking.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    grid = p.grid
    stride = int(round(ell / grid.h))
    rep = gauge.energy(p)
    density = rep.density.values[0]
    mod = np.sqrt(qnorm2(p.phi.values[0]))
    deficit = (1.0 - mod) ** 2
    rng = np.random.default_rng(seed)
    cand = {(0,) * grid.n}
    limit = min(trials, stride ** grid.n)
    while len(cand) < limit:
        cand.add(tuple(int(v) for v in rng.integers(0, stride, grid.n)))
    best = None
    for off_nodes in sorted(cand):
        offset = tuple(o * grid.h for o in off_nodes)
        try:
            part = cell_partition(grid, stride * grid.h, offset)
        except ValueError:
            continue
        score = _face_energy(density, deficit, grid, part, p.epsilon)
        if best is None or score < best[1] - 1e-15:
            best = (part, score)
    if best is None:
        raise ValueError("no admissible partition offset found")
    return best


# ---------------------------------------------------------------------------
# slicing
# ---------------------------------------------------------------------------

def slice_pair(p: gauge.Pair, y: float, axis: int = 3) -> gauge.Pair:
    """Restrict a 4-dimensional pair to the 3-plane {x_axis = y}.

    Phi restricts; A keeps the three in-plane components (the pullback
    under the inclusion).  ``y`` snaps to the nearest grid plane with a
    warning when off-plane.
    """
    grid = p.grid
    if grid.n != 4:
        raise ValueError("slice_pair expects a 4-dimensional pair")
    pos = (y - grid.lo[axis]) / grid.h
    k = int(round(pos))
    k = min(max(k, 0), grid.shape[axis] - 1)
    if abs(pos - k) > 1e-9:
        warnings.warn(f"slice plane snapped from {y} to "
                      f"{grid.lo[axis] + k * grid.h}")
    keep = [a for a in range(4) if a != axis]
    g3 = Grid(tuple(grid.lo[a] for a in keep),
              tuple(grid.hi[a] for a in keep),
              tuple(grid.shape[a] for a in keep))
    idx = [slice(None)] * 4
    idx[axis] = k
    idx = tuple(idx)
    phi_vals = p.phi.values[(slice(None),) + idx]
    a_vals = np.stack([p.a.values[(a,) + idx] for a in keep])
    phi3 = Form(g3, 0, "quat", phi_vals.copy())
    a3 = Form(g3, 1, "quat", a_vals.copy())

    spec3 = None
    if p.spec is not None:
        spec4 = p.spec
        yval = grid.lo[axis] + k * grid.h
        keep_arr = np.asarray(keep)
        pairs3 = combos(3, 2)
        pairs4 = {pr: i for i, pr in enumerate(combos(4, 2))}
        sel2 = [pairs4[(keep[i], keep[j])] for (i, j) in pairs3]

        def lift(pts3):
            pts4 = np.empty((pts3.shape[0], 4))
            pts4[:, keep_arr] = pts3
            pts4[:, axis] = yval
            return pts4

        def fields3(pts3):
            phi, dphi, a1, da2 = spec4.eval_all(lift(pts3))
            return (phi, dphi[:, keep_arr], a1[:, keep_arr], da2[:, sel2])

        spec3 = gauge.FieldSpec(
            n=3,
            phi=lambda q: fields3(q)[0],
            dphi=lambda q: fields3(q)[1],
            a=lambda q: fields3(q)[2],
            da2=lambda q: fields3(q)[3],
            fields=fields3,
        )
        # exact derivative callbacks on the sliced forms
        def dphi_form():
            raw = spec3.dphi(g3.points()).reshape(g3.shape + (3, 4))
            return Form(g3, 1, "quat",
                        np.ascontiguousarray(np.moveaxis(raw, -2, 0)))

        def da2_form():
            raw = spec3.da2(g3.points()).reshape(g3.shape + (3, 4))
            return Form(g3, 2, "quat",
                        np.ascontiguousarray(np.moveaxis(raw, -2, 0)))

        phi3.deriv = dphi_form
        a3.deriv = da2_form
    return gauge.Pair(phi3, a3, p.epsilon, spec=spec3,
                      scheme=p.scheme if spec3 or p.scheme != "analytic"
                      else "central2")


# ---------------------------------------------------------------------------
# weak-* dictionary distance (flat-norm proxy)
# ---------------------------------------------------------------------------

class _BumpForm:
    """C^1 polynomial bump times a monomial, normalized by C^1 size."""

    def __init__(self, center, scale, powers):
        self.center = np.asarray(center, dtype=float)
        self.scale = float(scale)
        self.powers = tuple(powers)
        self.norm = 1.0
        self.norm = self._c1_norm()

    def __call__(self, pts):
        u = (np.atleast_2d(pts) - self.center) / self.scale
        b = np.prod(np.clip(1.0 - u * u, 0.0, None) ** 2, axis=1)
        mono = np.prod(u ** np.asarray(self.powers), axis=1)
        return b * mono / self.norm

    def _c1_norm(self) -> float:
        n = len(self.center)
        axes = [np.linspace(-1, 1, 17)] * n
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = self.center + self.scale * np.stack(
            [m.ravel() for m in mesh], axis=-1)
        vals = self(pts)
        h = self.scale / 64.0
        grad_sq = np.zeros(len(pts))
        for a in range(n):
            shift = np.zeros(n)
            shift[a] = h
            grad_sq += ((self(pts + shift) - self(pts - shift))
                        / (2 * h)) ** 2
        sup_d = float(np.sqrt(np.max(grad_sq)))
        return max(float(np.max(np.abs(vals))), sup_d, 1e-12)


def bump_dictionary(lo, hi, centers_per_axis: int = 3,
                    max_degree: int = 3) -> list:
    """Tensor-product polynomial bumps on a coarse lattice of supports."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = len(lo)
    axes = [np.linspace(lo[a], hi[a], centers_per_axis + 2)[1:-1]
            for a in range(n)]
    scale = float(np.max((hi - lo) / (centers_per_axis + 1))) * 1.5
    out = []
    mesh = np.meshgrid(*axes, indexing="ij")
    centers = np.stack([m.ravel() for m in mesh], axis=-1)
    powers = [pw for pw in np.ndindex(*((max_degree + 1,) * n))
              if sum(pw) <= max_degree]
    for c in centers:
        for pw in powers:
            out.append(_BumpForm(c, scale, pw))
    return out


def poly_to_atoms(P) -> DiscreteZeroCurrent:
    """Atomize a point current in Z units: weight 4 pi x multiplicity."""
    pts = []
    wts = []
    for c in P.cells:
        if c.dim != 0:
            raise ValueError("only point currents atomize directly; "
                             "slice segment currents first")
        pts.append(c.vert_array[0])
        wts.append(4.0 * pi * c.mult)
    return DiscreteZeroCurrent(np.asarray(pts), np.asarray(wts))


def weak_star_distance(T1, T2, dictionary=None, domain=None) -> float:
    """Max dictionary pairing of T1 - T2 over C^1-normalized test forms.

    Metrizes weak-* convergence on bounded-mass sets of 0-currents; the
    default dictionary is polynomial bumps up to degree 3 on a coarse
    lattice covering ``domain``.
    """
    def as_atoms(T):
        if isinstance(T, DiscreteZeroCurrent):
            return T
        return poly_to_atoms(T)

    A1, A2 = as_atoms(T1), as_atoms(T2)
    if dictionary is None:
        if domain is None:
            allp = np.concatenate([A1.points, A2.points], axis=0)
            lo = np.min(allp, axis=0) - 1.0
            hi = np.max(allp, axis=0) + 1.0
        else:
            lo, hi = domain
        dictionary = bump_dictionary(lo, hi)
    if not dictionary:
        raise ValueError("empty test-form dictionary")
    best = 0.0
    for om in dictionary:
        best = max(best, abs(A1.pair_with(om) - A2.pair_with(om)))
    return best
