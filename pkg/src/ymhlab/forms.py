"""Discrete differential forms on regular node-collocated grids.

A ``Form`` of degree k stores one array per strictly increasing
multi-index I of length k, sampled at every grid node.  Values are
either real (array shape ``(ncomp, *shape)``) or quaternion-valued
(shape ``(ncomp, *shape, 4)``, layout ``[w, x, y, z]``); su(2)-valued
forms are quaternion forms with vanishing real part.

The coordinate coframe is orthonormal and the grid Euclidean, so wedge
products and the Hodge star are pointwise and exact; only the exterior
derivative is approximate (central differences of order 2 or 4, with
one-sided boundary stencils of matching order).  Fields built from
closed-form expressions can register an exact derivative callback,
used by the ``analytic`` scheme.
"""

from __future__ import annotations

import io
import itertools
import struct
from dataclasses import dataclass, field, replace
from functools import lru_cache
from math import comb
from typing import Callable, Iterable, Sequence

import numpy as np

from .quat import qmul, qnorm2

__all__ = [
    "Grid",
    "Form",
    "DERIV_SCHEMES",
    "zero_form",
    "constant_form",
    "d",
    "wedge",
    "star",
    "re_part",
    "norm2_pointwise",
    "integrate",
    "form_norm",
    "combos",
    "comp_index",
    "merge_sign",
    "trapezoid_weights",
    "deriv_matrix",
    "sample_scalar",
    "sample_quat0",
    "sample_quat1",
    "interp_components",
    "form_to_bytes",
    "form_from_bytes",
    "form_to_csv",
]

DERIV_SCHEMES = ("analytic", "central2", "central4")


@dataclass(frozen=True)
class Grid:
    """Regular node lattice over a box in R^n with uniform spacing h."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    shape: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        object.__setattr__(self, "shape", tuple(int(v) for v in self.shape))
        if not (len(self.lo) == len(self.hi) == len(self.shape)):
            raise ValueError("lo, hi, shape must have equal length")
        if self.n not in (3, 4):
            raise ValueError(f"dimension must be 3 or 4, got {self.n}")
        if any(m < 5 for m in self.shape):
            raise ValueError("need at least 5 nodes per axis")
        hs = [(b - a) / (m - 1) for a, b, m in zip(self.lo, self.hi, self.shape)]
        if any(h <= 0 for h in hs):
            raise ValueError("box extents must be positive")
        if max(hs) - min(hs) > 1e-12 * max(hs):
            raise ValueError(f"spacing must be uniform across axes, got {hs}")

    @property
    def n(self) -> int:
        return len(self.shape)

    @property
    def h(self) -> float:
        return (self.hi[0] - self.lo[0]) / (self.shape[0] - 1)

    @property
    def num_nodes(self) -> int:
        return int(np.prod(self.shape))

    @classmethod
    def cube(cls, lo: float, hi: float, nodes: int, n: int = 3) -> "Grid":
        return cls((lo,) * n, (hi,) * n, (nodes,) * n)

    @classmethod
    def from_spacing(cls, lo: Sequence[float], h: float,
                     shape: Sequence[int]) -> "Grid":
        hi = tuple(a + h * (m - 1) for a, m in zip(lo, shape))
        return cls(tuple(lo), hi, tuple(shape))

    def axis(self, i: int) -> np.ndarray:
        return np.linspace(self.lo[i], self.hi[i], self.shape[i])

    def axes(self) -> list[np.ndarray]:
        return [self.axis(i) for i in range(self.n)]

    def coords(self) -> list[np.ndarray]:
        """Node coordinate arrays, each of shape ``self.shape``."""
        return list(np.meshgrid(*self.axes(), indexing="ij"))

    def points(self) -> np.ndarray:
        """All node coordinates, flattened to (num_nodes, n)."""
        return np.stack([c.ravel() for c in self.coords()], axis=-1)

    def slab_points(self, i0: int, i1: int) -> np.ndarray:
        """Coordinates of nodes with first index in [i0, i1), flat (N, n)."""
        axes = self.axes()
        axes[0] = axes[0][i0:i1]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([c.ravel() for c in mesh], axis=-1)

    def interior(self, width: int = 2) -> tuple[slice, ...]:
        """Index slices for nodes at least `width` nodes from the boundary."""
        return tuple(slice(width, m - width) for m in self.shape)

    def nearest_index(self, x: Sequence[float]) -> tuple[int, ...]:
        return tuple(int(round((float(v) - a) / self.h))
                     for v, a in zip(x, self.lo))


@lru_cache(maxsize=None)
def combos(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    """Strictly increasing multi-indices of length k in {0..n-1}."""
    return tuple(itertools.combinations(range(n), k))


@lru_cache(maxsize=None)
def comp_index(n: int, k: int) -> dict[tuple[int, ...], int]:
    return {I: i for i, I in enumerate(combos(n, k))}


def merge_sign(I: tuple[int, ...], J: tuple[int, ...]) -> int:
    """Sign of the shuffle sorting the concatenation (I, J); 0 if not disjoint."""
    if set(I) & set(J):
        return 0
    seq = I + J
    inv = sum(1 for a in range(len(seq)) for b in range(a + 1, len(seq))
              if seq[a] > seq[b])
    return -1 if inv % 2 else 1


@dataclass
class Form:
    """Degree-k differential form sampled at the nodes of a grid.

    ``kind`` is "real" or "quat".  ``deriv`` optionally returns the exact
    exterior derivative as a Form on the same grid (analytic scheme).
    """

    grid: Grid
    degree: int
    kind: str
    values: np.ndarray
    deriv: Callable[[], "Form"] | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("real", "quat"):
            raise ValueError(f"unknown value kind {self.kind!r}")
        ncomp = comb(self.grid.n, self.degree)
        expect = (ncomp,) + self.grid.shape + ((4,) if self.kind == "quat" else ())
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != expect:
            raise ValueError(
                f"values shape {self.values.shape} != expected {expect}")

    @property
    def ncomp(self) -> int:
        return self.values.shape[0]

    def component(self, I: Iterable[int]) -> np.ndarray:
        return self.values[comp_index(self.grid.n, self.degree)[tuple(I)]]

    def copy(self) -> "Form":
        return replace(self, values=self.values.copy())


def zero_form(grid: Grid, degree: int, kind: str = "real") -> Form:
    ncomp = comb(grid.n, degree)
    shape = (ncomp,) + grid.shape + ((4,) if kind == "quat" else ())
    return Form(grid, degree, kind, np.zeros(shape))


def constant_form(grid: Grid, degree: int, comp_values, kind: str = "real") -> Form:
    """Form with node-independent component values (list per multi-index)."""
    f = zero_form(grid, degree, kind)
    for i, v in enumerate(comp_values):
        f.values[i] = v
    return f


# ---------------------------------------------------------------------------
# derivative stencils
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def deriv_matrix(npts: int, h: float, order: int) -> np.ndarray:
    """Dense 1D differentiation matrix, central interior + one-sided edges."""
    D = np.zeros((npts, npts))
    if order == 2:
        if npts < 3:
            raise ValueError("central2 needs >= 3 points")
        for i in range(1, npts - 1):
            D[i, i - 1] = -0.5
            D[i, i + 1] = 0.5
        D[0, 0:3] = (-1.5, 2.0, -0.5)
        D[-1, -3:] = (0.5, -2.0, 1.5)
    elif order == 4:
        if npts < 5:
            raise ValueError("central4 needs >= 5 points")
        for i in range(2, npts - 2):
            D[i, i - 2:i + 3] = (1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12)
        # 4th-order one-sided / skewed stencils for the two edge rows
        D[0, 0:5] = (-25.0 / 12, 4.0, -3.0, 4.0 / 3, -0.25)
        D[1, 0:5] = (-0.25, -5.0 / 6, 1.5, -0.5, 1.0 / 12)
        D[-2, -5:] = (-1.0 / 12, 0.5, -1.5, 5.0 / 6, 0.25)
        D[-1, -5:] = (0.25, -4.0 / 3, 3.0, -4.0, 25.0 / 12)
    else:
        raise ValueError(f"unsupported stencil order {order}")
    return D / h


def _apply_along(vals: np.ndarray, M: np.ndarray, axis: int) -> np.ndarray:
    """Apply matrix M along one axis of vals."""
    out = np.tensordot(M, np.moveaxis(vals, axis, 0), axes=(1, 0))
    return np.moveaxis(out, 0, axis)


def diff_axis(f: Form, axis: int, order: int, transpose: bool = False) -> np.ndarray:
    """Partial derivative of all components along a grid axis."""
    M = deriv_matrix(f.grid.shape[axis], f.grid.h, order)
    if transpose:
        M = M.T
    return _apply_along(f.values, M, 1 + axis)


def d(f: Form, scheme: str = "central2") -> Form:
    """Discrete exterior derivative.

    ``analytic`` uses the form's registered derivative callback and falls
    back to central2 for sampled-only data.
    """
    if scheme not in DERIV_SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    n, k = f.grid.n, f.degree
    if k >= n:
        raise ValueError("top-degree form has no exterior derivative")
    if scheme == "analytic":
        if f.deriv is not None:
            return f.deriv()
        scheme = "central2"
    order = 2 if scheme == "central2" else 4

    out = zero_form(f.grid, k + 1, f.kind)
    idx_in = comp_index(n, k)
    partials = {}
    for ci, K in enumerate(combos(n, k + 1)):
        acc = out.values[ci]
        for pos, a in enumerate(K):
            I = K[:pos] + K[pos + 1:]
            key = (a, idx_in[I])
            if key not in partials:
                M = deriv_matrix(f.grid.shape[a], f.grid.h, order)
                partials[key] = _apply_along(f.values[idx_in[I]], M, a)
            term = partials[key]
            if pos % 2:
                acc -= term
            else:
                acc += term
    return out


# ---------------------------------------------------------------------------
# algebraic operations (pointwise, exact)
# ---------------------------------------------------------------------------

def _coeff_mul(a: np.ndarray, akind: str, b: np.ndarray, bkind: str) -> np.ndarray:
    if akind == "real" and bkind == "real":
        return a * b
    if akind == "real":
        return a[..., None] * b
    if bkind == "real":
        return a * b[..., None]
    return qmul(a, b)


def wedge(a: Form, b: Form) -> Form:
    """Wedge product; quaternion coefficients multiply in order, never commuted."""
    if a.grid != b.grid:
        raise ValueError("wedge requires a shared grid")
    n = a.grid.n
    k, l = a.degree, b.degree
    if k + l > n:
        raise ValueError("degree overflow in wedge product")
    kind = "real" if (a.kind == "real" and b.kind == "real") else "quat"
    out = zero_form(a.grid, k + l, kind)
    idx_out = comp_index(n, k + l)
    for I in combos(n, k):
        ai = a.component(I)
        for J in combos(n, l):
            s = merge_sign(I, J)
            if s == 0:
                continue
            K = tuple(sorted(I + J))
            term = _coeff_mul(ai, a.kind, b.component(J), b.kind)
            if s < 0:
                out.values[idx_out[K]] -= term
            else:
                out.values[idx_out[K]] += term
    return out


@lru_cache(maxsize=None)
def _star_table(n: int, k: int) -> tuple[tuple[int, int], ...]:
    """(target component, sign) per source component for the Hodge star."""
    idx_out = comp_index(n, n - k)
    table = []
    for I in combos(n, k):
        Ic = tuple(i for i in range(n) if i not in I)
        table.append((idx_out[Ic], merge_sign(I, Ic)))
    return tuple(table)


def star(f: Form) -> Form:
    """Euclidean Hodge star, orientation dx1 ^ ... ^ dxn."""
    n, k = f.grid.n, f.degree
    out = zero_form(f.grid, n - k, f.kind)
    for src, (dst, s) in enumerate(_star_table(n, k)):
        out.values[dst] = s * f.values[src]
    return out


def re_part(f: Form) -> Form:
    """Componentwise real part of a quaternion-valued form."""
    if f.kind == "real":
        return f.copy()
    return Form(f.grid, f.degree, "real", f.values[..., 0].copy())


def norm2_pointwise(f: Form) -> Form:
    """Pointwise squared norm sum_I |f_I|^2 as a real 0-form."""
    if f.kind == "real":
        vals = np.sum(f.values ** 2, axis=0)
    else:
        vals = np.sum(qnorm2(f.values), axis=0)
    return Form(f.grid, 0, "real", vals[None])


@lru_cache(maxsize=None)
def _axis_weights(npts: int, h: float) -> np.ndarray:
    w = np.full(npts, h)
    w[0] = w[-1] = h / 2.0
    return w


def trapezoid_weights(grid: Grid) -> np.ndarray:
    """Tensor-product trapezoid quadrature weights over all nodes."""
    w = _axis_weights(grid.shape[0], grid.h)
    out = w
    for i in range(1, grid.n):
        out = np.multiply.outer(out, _axis_weights(grid.shape[i], grid.h))
    return out


def integrate(f: Form) -> float:
    """Integral of a real 0-form density or a real top-degree form."""
    if f.kind != "real":
        raise ValueError("integrate expects real values; take re_part first")
    if f.degree not in (0, f.grid.n):
        raise ValueError("integrate requires degree 0 (density) or n")
    return float(np.sum(trapezoid_weights(f.grid) * f.values[0]))


def form_norm(f: Form, p: float = 2, interior: int = 0) -> float:
    """L^p norm (p = inf for sup) of the pointwise norm of f."""
    dens = np.sqrt(np.sum(f.values ** 2 if f.kind == "real"
                          else qnorm2(f.values), axis=0))
    w = trapezoid_weights(f.grid)
    if interior:
        sl = f.grid.interior(interior)
        dens, w = dens[sl], w[sl]
    if p == np.inf or p == "inf":
        return float(np.max(dens))
    return float(np.sum(w * dens ** p) ** (1.0 / p))


# ---------------------------------------------------------------------------
# sampling closed-form fields and interpolating samples
# ---------------------------------------------------------------------------

def sample_scalar(grid: Grid, fn: Callable[[np.ndarray], np.ndarray],
                  deriv: Callable[[], Form] | None = None) -> Form:
    """Real 0-form from a vectorized evaluator on (N, n) points."""
    vals = np.asarray(fn(grid.points()), dtype=float).reshape(grid.shape)
    return Form(grid, 0, "real", vals[None], deriv=deriv)


def sample_quat0(grid: Grid, fn: Callable[[np.ndarray], np.ndarray],
                 deriv: Callable[[], Form] | None = None) -> Form:
    """Quaternion 0-form from an evaluator returning (N, 4)."""
    vals = np.asarray(fn(grid.points()), dtype=float).reshape(grid.shape + (4,))
    return Form(grid, 0, "quat", vals[None], deriv=deriv)


def sample_quat1(grid: Grid, fn: Callable[[np.ndarray], np.ndarray],
                 deriv: Callable[[], Form] | None = None) -> Form:
    """Quaternion 1-form from an evaluator returning (N, n, 4)."""
    raw = np.asarray(fn(grid.points()), dtype=float)
    vals = np.moveaxis(raw.reshape(grid.shape + (grid.n, 4)), -2, 0)
    return Form(grid, 1, "quat", np.ascontiguousarray(vals), deriv=deriv)


def interp_components(f: Form, pts: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of all components at (N, n) points.

    Returns (N, ncomp) for real forms, (N, ncomp, 4) for quaternion forms.
    """
    from scipy.interpolate import RegularGridInterpolator

    axes = f.grid.axes()
    # stack components (and quaternion entries) into one trailing axis
    if f.kind == "real":
        data = np.moveaxis(f.values, 0, -1)
    else:
        data = np.moveaxis(f.values, 0, -2)
        data = data.reshape(data.shape[:-2] + (f.ncomp * 4,))
    itp = RegularGridInterpolator(axes, data, method="linear",
                                  bounds_error=False, fill_value=None)
    out = itp(pts)
    if f.kind == "quat":
        out = out.reshape(pts.shape[0], f.ncomp, 4)
    return out


# ---------------------------------------------------------------------------
# serialization: flat binary layout and CSV per component
# ---------------------------------------------------------------------------

_KIND_CODE = {"real": 0, "quat": 1}
_KIND_NAME = {v: k for k, v in _KIND_CODE.items()}


def form_to_bytes(f: Form) -> bytes:
    """Flat little-endian layout: n, k, nodes[], lo[], hi[], valueKind, data."""
    buf = io.BytesIO()
    n = f.grid.n
    buf.write(struct.pack("<2q", n, f.degree))
    buf.write(struct.pack(f"<{n}q", *f.grid.shape))
    buf.write(struct.pack(f"<{n}d", *f.grid.lo))
    buf.write(struct.pack(f"<{n}d", *f.grid.hi))
    buf.write(struct.pack("<q", _KIND_CODE[f.kind]))
    buf.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())
    return buf.getvalue()


def form_from_bytes(raw: bytes) -> Form:
    off = 0
    n, k = struct.unpack_from("<2q", raw, off); off += 16
    shape = struct.unpack_from(f"<{n}q", raw, off); off += 8 * n
    lo = struct.unpack_from(f"<{n}d", raw, off); off += 8 * n
    hi = struct.unpack_from(f"<{n}d", raw, off); off += 8 * n
    (kind_code,) = struct.unpack_from("<q", raw, off); off += 8
    kind = _KIND_NAME[kind_code]
    grid = Grid(lo, hi, shape)
    full = (comb(n, k),) + grid.shape + ((4,) if kind == "quat" else ())
    vals = np.frombuffer(raw, dtype="<f8", offset=off).reshape(full).copy()
    return Form(grid, k, kind, vals)


def form_to_csv(f: Form, stem) -> list[str]:
    """One CSV per component: node coordinates then value column(s)."""
    from pathlib import Path

    pts = f.grid.points()
    written = []
    header = ",".join(f"x{i + 1}" for i in range(f.grid.n))
    for ci, I in enumerate(combos(f.grid.n, f.degree)):
        name = "".join(str(i + 1) for i in I) or "0"
        path = Path(f"{stem}_c{name}.csv")
        comp = f.values[ci].reshape(-1, 4) if f.kind == "quat" \
            else f.values[ci].reshape(-1, 1)
        cols = ",w,x,y,z" if f.kind == "quat" else ",value"
        with open(path, "w") as fh:
            fh.write(header + cols + "\n")
            for row, v in zip(pts, comp):
                fh.write(",".join(f"{c:.17g}" for c in row) + "," +
                         ",".join(f"{c:.17g}" for c in v) + "\n")
        written.append(str(path))
    return written
