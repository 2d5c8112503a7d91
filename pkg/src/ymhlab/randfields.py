"""Seeded random trigonometric fields for property tests and audits.

Fields are low-mode trigonometric polynomials, so they can be resampled
exactly on refined grids (for order-of-accuracy checks) and carry exact
partial derivatives when analytic callbacks are wanted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gauge
from .forms import Form, Grid
from .quat import qnorm2

__all__ = ["TrigField", "random_trig_field", "random_pair_fields",
           "sample_random_pair", "random_unit_section", "random_sigma"]


@dataclass
class TrigField:
    """Sum of a constant and sine modes: c0 + sum_m amp_m sin(k_m . x + ph_m)."""

    c0: np.ndarray        # (C,) constant per output component
    amps: np.ndarray      # (M, C)
    ks: np.ndarray        # (M, n)
    phases: np.ndarray    # (M, C)

    def value(self, pts: np.ndarray) -> np.ndarray:
        arg = pts @ self.ks.T  # (N, M)
        out = np.einsum("NMC,MC->NC", np.sin(arg[:, :, None]
                                             + self.phases[None]), self.amps)
        return self.c0[None] + out

    def partials(self, pts: np.ndarray) -> np.ndarray:
        """(N, n, C) array of d(value)/dx_l."""
        arg = pts @ self.ks.T
        cos = np.cos(arg[:, :, None] + self.phases[None])  # (N, M, C)
        return np.einsum("NMC,Ml->NlC", cos * self.amps[None], self.ks)


def random_trig_field(rng, n: int, n_comp: int, amp: float = 1.0,
                      kmax: int = 1, modes: int = 3,
                      mean: float = 0.0) -> TrigField:
    ks = rng.integers(-kmax, kmax + 1, size=(modes, n)).astype(float)
    ks[np.all(ks == 0, axis=1), 0] = 1.0
    amps = amp * rng.standard_normal((modes, n_comp)) / np.sqrt(modes)
    phases = rng.uniform(0, 2 * np.pi, size=(modes, n_comp))
    c0 = mean + amp * 0.3 * rng.standard_normal(n_comp)
    return TrigField(c0, amps, ks, phases)


def random_pair_fields(seed: int, n: int = 3, amp_phi: float = 1.0,
                       amp_a: float = 1.0, kmax: int = 1, modes: int = 3):
    """(phi_field, a_fields) resampleable on any grid of dimension n."""
    rng = np.random.default_rng(seed)
    phi = random_trig_field(rng, n, 3, amp_phi, kmax, modes)
    avec = [random_trig_field(rng, n, 3, amp_a, kmax, modes)
            for _ in range(n)]
    return phi, avec


def sample_random_pair(grid: Grid, seed: int, epsilon: float = 0.5,
                       amp_phi: float = 1.0, amp_a: float = 1.0,
                       kmax: int = 1, modes: int = 3,
                       squash_phi: float | None = None) -> gauge.Pair:
    """Random smooth pair sampled on a grid (finite-difference mode).

    ``squash_phi`` rescales Phi through tanh so that |Phi| stays below
    the given bound (useful for capping tests).
    """
    phi_f, a_f = random_pair_fields(seed, grid.n, amp_phi, amp_a, kmax, modes)
    pts = grid.points()
    phi3 = phi_f.value(pts)
    if squash_phi is not None:
        mod = np.linalg.norm(phi3, axis=-1, keepdims=True)
        phi3 = phi3 * (squash_phi * np.tanh(mod) / np.maximum(mod, 1e-30))
    phi_vals = np.zeros(grid.shape + (4,))
    phi_vals[..., 1:] = phi3.reshape(grid.shape + (3,))
    a_vals = np.zeros((grid.n,) + grid.shape + (4,))
    for l in range(grid.n):
        a_vals[l, ..., 1:] = a_f[l].value(pts).reshape(grid.shape + (3,))
    return gauge.Pair(Form(grid, 0, "quat", phi_vals[None]),
                      Form(grid, 1, "quat", a_vals), epsilon)


def random_unit_section(grid: Grid, seed: int, amp: float = 0.6,
                        kmax: int = 1, modes: int = 3) -> Form:
    """Unit imaginary section with exact derivative callback."""
    rng = np.random.default_rng(seed)
    f = random_trig_field(rng, grid.n, 3, amp, kmax, modes, mean=0.0)
    f.c0 = f.c0 + np.array([1.5, 0.0, 0.0])  # keep away from zero
    pts = grid.points()
    raw = f.value(pts)
    mod = np.linalg.norm(raw, axis=-1, keepdims=True)
    unit = raw / mod
    vals = np.zeros(grid.shape + (4,))
    vals[..., 1:] = unit.reshape(grid.shape + (3,))

    def deriv() -> Form:
        q = f.value(pts)
        dq = f.partials(pts)
        m = np.linalg.norm(q, axis=-1)
        qh = q / m[:, None]
        # d(q/|q|)_l = (dq_l - qh <qh, dq_l>)/|q|
        dun = (dq - qh[:, None, :]
               * np.einsum("NlC,NC->Nl", dq, qh)[..., None]) / m[:, None, None]
        out = np.zeros((grid.n,) + grid.shape + (4,))
        for l in range(grid.n):
            out[l, ..., 1:] = dun[:, l].reshape(grid.shape + (3,))
        return Form(grid, 1, "quat", out)

    return Form(grid, 0, "quat", vals[None], deriv=deriv)


def random_sigma(grid: Grid, seed: int, amp: float = 0.5,
                 kmax: int = 1, modes: int = 3) -> Form:
    """Random smooth unit-quaternion gauge field with exact derivative."""
    rng = np.random.default_rng(seed)
    f = random_trig_field(rng, grid.n, 4, amp, kmax, modes)
    f.c0 = f.c0 + np.array([2.0, 0.0, 0.0, 0.0])  # bounded away from 0
    pts = grid.points()

    def unit_and_partials():
        q = f.value(pts)
        dq = f.partials(pts)  # (N, n, 4)
        m = np.linalg.norm(q, axis=-1)
        qh = q / m[:, None]
        dun = (dq - qh[:, None, :]
               * np.einsum("NlC,NC->Nl", dq, qh)[..., None]) / m[:, None, None]
        return qh, dun

    qh, dun = unit_and_partials()
    vals = qh.reshape(grid.shape + (4,))

    def deriv() -> Form:
        out = np.moveaxis(dun.reshape(grid.shape + (grid.n, 4)), -2, 0)
        return Form(grid, 1, "quat", np.ascontiguousarray(out))

    return Form(grid, 0, "quat", vals[None], deriv=deriv)
