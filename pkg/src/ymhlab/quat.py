"""Quaternion and imaginary-quaternion (su(2)) algebra.

Two layers share one convention:

* scalar types ``Quaternion`` / ``ImQuaternion`` for exact, readable
  point computations (tests, fixtures, small oracles);
* vectorized kernels acting on float arrays whose trailing axis holds
  the components ``[w, x, y, z]`` (full quaternions) or ``[x, y, z]``
  (imaginary parts).  These back all grid-scale field operations.

The multiplication table is i^2 = j^2 = k^2 = ijk = -1 with
ij = -ji = k, jk = -kj = i, ki = -ik = j.  su(2) is identified with the
imaginary quaternions, carrying the Euclidean inner product
<u, v> = Re(conj(u) v), so |i| = |j| = |k| = 1 and u^2 = -|u|^2 for
imaginary u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Quaternion",
    "ImQuaternion",
    "ONE",
    "I",
    "J",
    "K",
    "exp_im",
    "qmul",
    "qconj",
    "qre",
    "qim",
    "qnorm2",
    "qnorm",
    "qdot",
    "quat",
    "imquat",
    "bracket_arr",
    "cross3",
    "dot3",
    "qexp_im_arr",
]

# sin(r)/r is evaluated by series below this radius (removable singularity)
_SINC_CUTOFF = 1e-4


@dataclass(frozen=True)
class Quaternion:
    """Element w + x i + y j + z k of the quaternion algebra H."""

    w: float
    x: float
    y: float
    z: float

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w + other.w, self.x + other.x,
                          self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w - other.w, self.x - other.x,
                          self.y - other.y, self.z - other.z)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        """Hamilton product (noncommutative); scalars act componentwise."""
        if isinstance(other, (int, float)):
            return Quaternion(self.w * other, self.x * other,
                              self.y * other, self.z * other)
        a, b = self, other
        return Quaternion(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self.__mul__(other)
        return NotImplemented

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm2(self) -> float:
        return self.w ** 2 + self.x ** 2 + self.y ** 2 + self.z ** 2

    def norm(self) -> float:
        return math.sqrt(self.norm2())

    @property
    def re(self) -> float:
        return self.w

    @property
    def im(self) -> "ImQuaternion":
        return ImQuaternion(self.x, self.y, self.z)

    def isclose(self, other: "Quaternion", tol: float = 1e-12) -> bool:
        return (self - other).norm() <= tol


@dataclass(frozen=True)
class ImQuaternion:
    """Element x i + y j + z k of Im(H), identified with su(2)."""

    x: float
    y: float
    z: float

    def as_quaternion(self) -> Quaternion:
        return Quaternion(0.0, self.x, self.y, self.z)

    def __add__(self, other: "ImQuaternion") -> "ImQuaternion":
        return ImQuaternion(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "ImQuaternion") -> "ImQuaternion":
        return ImQuaternion(self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> "ImQuaternion":
        return ImQuaternion(-self.x, -self.y, -self.z)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return ImQuaternion(self.x * other, self.y * other, self.z * other)
        if isinstance(other, ImQuaternion):
            return self.as_quaternion() * other.as_quaternion()
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self.__mul__(other)
        return NotImplemented

    def conj(self) -> "ImQuaternion":
        return -self

    def norm2(self) -> float:
        return self.x ** 2 + self.y ** 2 + self.z ** 2

    def norm(self) -> float:
        return math.sqrt(self.norm2())


ONE = Quaternion(1.0, 0.0, 0.0, 0.0)
I = ImQuaternion(1.0, 0.0, 0.0)
J = ImQuaternion(0.0, 1.0, 0.0)
K = ImQuaternion(0.0, 0.0, 1.0)


def bracket(u: ImQuaternion, v: ImQuaternion) -> ImQuaternion:
    """Commutator [u, v] = uv - vu; imaginary by construction."""
    # uv - vu = 2 u x v for imaginary u, v (real parts cancel exactly)
    return ImQuaternion(
        2.0 * (u.y * v.z - u.z * v.y),
        2.0 * (u.z * v.x - u.x * v.z),
        2.0 * (u.x * v.y - u.y * v.x),
    )


def inner(u: ImQuaternion, v: ImQuaternion) -> float:
    """Euclidean inner product <u, v> = Re(conj(u) v)."""
    return u.x * v.x + u.y * v.y + u.z * v.z


def exp_im(u: ImQuaternion) -> Quaternion:
    """Quaternion exponential of an imaginary argument.

    exp(u) = cos|u| + sin|u| u/|u|, a unit quaternion.  The removable
    singularity at u = 0 is handled by the series sin(r)/r = 1 - r^2/6
    below r = 1e-4.
    """
    r = u.norm()
    if r < _SINC_CUTOFF:
        s = 1.0 - r * r / 6.0
    else:
        s = math.sin(r) / r
    return Quaternion(math.cos(r), s * u.x, s * u.y, s * u.z)


# ---------------------------------------------------------------------------
# vectorized kernels: trailing axis 4 = [w, x, y, z], or 3 = [x, y, z]
# ---------------------------------------------------------------------------

def quat(w, x, y, z) -> np.ndarray:
    """Stack scalar/array components into a (..., 4) quaternion array."""
    return np.stack(np.broadcast_arrays(
        np.asarray(w, dtype=float), np.asarray(x, dtype=float),
        np.asarray(y, dtype=float), np.asarray(z, dtype=float)), axis=-1)


def imquat(x, y, z) -> np.ndarray:
    """Imaginary quaternion array (w = 0) from three components."""
    zero = np.zeros(np.broadcast(np.asarray(x), np.asarray(y), np.asarray(z)).shape)
    return quat(zero, x, y, z)


def qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product on (..., 4) arrays."""
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack((
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ), axis=-1)


def qconj(a: np.ndarray) -> np.ndarray:
    out = a.copy()
    out[..., 1:] *= -1.0
    return out


def qre(a: np.ndarray) -> np.ndarray:
    return a[..., 0]


def qim(a: np.ndarray) -> np.ndarray:
    return a[..., 1:]


def qnorm2(a: np.ndarray) -> np.ndarray:
    return np.sum(a * a, axis=-1)


def qnorm(a: np.ndarray) -> np.ndarray:
    return np.sqrt(qnorm2(a))


def qdot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """<a, b> = Re(conj(a) b), the Euclidean 4-dot."""
    return np.sum(a * b, axis=-1)


def bracket_arr(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """[u, v] = uv - vu on (..., 4) arrays (general quaternions)."""
    return qmul(u, v) - qmul(v, u)


def cross3(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Cross product on (..., 3) arrays; [u, v] = 2 u x v for imaginaries."""
    return np.stack((
        u[..., 1] * v[..., 2] - u[..., 2] * v[..., 1],
        u[..., 2] * v[..., 0] - u[..., 0] * v[..., 2],
        u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0],
    ), axis=-1)


def dot3(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.sum(u * v, axis=-1)


def qexp_im_arr(v: np.ndarray) -> np.ndarray:
    """exp of imaginary (..., 3) arrays, returning unit (..., 4) quaternions."""
    r = np.sqrt(dot3(v, v))
    s = np.where(r < _SINC_CUTOFF, 1.0 - r * r / 6.0,
                 np.sin(r) / np.where(r == 0.0, 1.0, r))
    out = np.empty(v.shape[:-1] + (4,))
    out[..., 0] = np.cos(r)
    out[..., 1:] = s[..., None] * v
    return out
