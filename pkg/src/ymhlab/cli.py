"""Experiment runner: reproducible, config-driven runs of the laboratory.

Usage:
    ymhlab run <experiment> [--config FILE] [--set key=value ...] --out DIR

Configs are flat ``key = value`` text files; --set overrides win.  Each
run writes JSON-lines records, CSV tables, two-column plot data, and
rendered PNG figures into the output directory, every file stamped with
the config hash.  Exit codes: 0 success, 2 validation error, 3
numerical failure.  The environment variable YMHLAB_THREADS caps BLAS
threads (set it to 1 for bit-reproducible runs).
"""

from __future__ import annotations

import os

if "YMHLAB_THREADS" in os.environ:
    _t = os.environ["YMHLAB_THREADS"]
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                 "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(_var, _t)

import argparse    # noqa: E402
import sys         # noqa: E402
from math import pi  # noqa: E402
from pathlib import Path  # noqa: E402

import numpy as np  # noqa: E402

from . import bps, currents, gauge, plateau, recovery  # noqa: E402
from .forms import Form, Grid, form_norm, integrate, norm2_pointwise, \
    star, zero_form  # noqa: E402
from .quat import qnorm2  # noqa: E402
from .randfields import sample_random_pair  # noqa: E402
from .reports import ReportWriter  # noqa: E402

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    pass


def _parse_kv_file(path: str) -> dict:
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"bad config line: {raw!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _floats(text: str) -> list[float]:
    return [float(t) for t in str(text).replace(",", " ").split()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in str(text).replace(",", " ").split()]


DEFAULTS: dict[str, dict] = {
    "bps-energy": {"seed": 0, "radius": 50.0, "box_half": 10.0,
                   "nodes": 161, "epsilon": 1.0},
    "bogomolnyi-residual": {"seed": 0, "epsilon": 0.5, "box_half": 1.5,
                            "nodes": "17 33 65", "sign": -1},
    "inequality-audit": {"seed": 0, "seeds": 100, "nodes": 9,
                         "box_half": 1.0, "epsilon": 0.7},
    "quantization": {"seed": 0, "epsilon": 0.3, "nodes": "17 33",
                     "box_half": 1.5, "radii": "0.7 1.0 1.3",
                     "random_pairs": 10},
    "recovery-gamma": {"seed": 0, "fixture": "dipole", "box_half": 2.0,
                       "ladder": "0.2 0.1 0.05", "nodes": "129 129 161",
                       "delta": 0.45},
    "liminf-cells": {"seed": 0, "fixture": "dipole", "box_half": 2.0,
                     "ladder": "0.2 0.1 0.05", "nodes": "97 129 161",
                     "delta": 0.45, "ell": 1.0, "eta": 0.25},
    "slices": {"seed": 0, "nodes3": 24, "nodes4": 12, "epsilon": 0.3},
    "plateau": {"seed": 0, "epsilon": 0.1, "h": 0.05, "box_half": 1.0,
                "max_iter": 2500, "grad_tol": 2e-4, "noise_amp": 0.0,
                "ell": 1.6, "soft4d": 0, "nodes4": 12,
                "epsilon4": 0.4, "max_iter4": 150},
    "theta-monopole": {"seed": 0, "epsilon": 0.35, "box_half": 1.4,
                       "nodes": "21 41"},
}


def build_config(experiment: str, file_cfg: dict, overrides: dict) -> dict:
    if experiment not in DEFAULTS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from "
                          + ", ".join(sorted(DEFAULTS)))
    cfg = dict(DEFAULTS[experiment])
    for src in (file_cfg, overrides):
        for k, v in src.items():
            if k not in cfg:
                raise ConfigError(
                    f"unknown config key {k!r} for {experiment}")
            cfg[k] = type(DEFAULTS[experiment][k])(v) \
                if not isinstance(DEFAULTS[experiment][k], str) else v
    cfg["experiment"] = experiment
    return cfg


def _ladder(cfg) -> list[float]:
    ladder = _floats(cfg["ladder"])
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigError(f"epsilon ladder must be strictly decreasing, "
                          f"got {ladder}")
    return ladder


def _dipole(box_half: float) -> recovery.PolyCurrent:
    return recovery.PolyCurrent(3, [
        recovery.Cell(0, 1, ((0.5, 0.0, 0.0),)),
        recovery.Cell(0, -1, ((-0.5, 0.0, 0.0),)),
    ])


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def run_bps_energy(cfg, w: ReportWriter) -> None:
    R = cfg["radius"]
    oracle = bps.radial_energy_oracle(R)
    total = bps.bps_total_energy(R)
    w.record("radial_oracle", seed=cfg["seed"], radius=R, truncated=oracle,
             with_tail=total, four_pi=4 * pi,
             rel_err=abs(total - 4 * pi) / (4 * pi))
    grid = Grid.cube(-cfg["box_half"], cfg["box_half"], int(cfg["nodes"]))
    spec = bps.bps_field_spec(bps.BpsSpec(epsilon=cfg["epsilon"]))
    E = gauge.energy_from_spec(spec, cfg["epsilon"], grid, keep_density=False)
    box = bps.box_energy_oracle(cfg["box_half"])
    gap = abs(E.total - box) / box
    w.record("grid_vs_box_oracle", seed=cfg["seed"], grid_total=E.total,
             box_oracle=box, rel_gap=gap, h=grid.h)
    rr = np.linspace(1e-3, 8.0, 200)
    w.plot_xy("radial_energy_density", rr,
              bps.radial_density(rr) * 4 * pi * rr**2,
              "r", "4 pi r^2 e(r)", "unit monopole radial energy density")
    Rs = np.linspace(1.0, R, 30)
    w.table("energy_growth", ["R", "E(R)"],
            [(float(r), bps.radial_energy_oracle(float(r))) for r in Rs])
    w.plot_xy("energy_growth", Rs,
              [bps.radial_energy_oracle(float(r)) for r in Rs],
              "R", "E(R)", hline=4 * pi)


def run_bogomolnyi(cfg, w: ReportWriter) -> None:
    eps = cfg["epsilon"]
    nodes = _ints(cfg["nodes"])
    spec = bps.BpsSpec(sign=int(cfg["sign"]), epsilon=eps)
    rows = []
    for nn in nodes:
        grid = Grid.cube(-cfg["box_half"], cfg["box_half"], nn)
        p = bps.bps_pair(spec, grid)
        branch = bps.load_fixture()["branches"][str(int(cfg["sign"]))][
            "bogomolnyi_branch"]
        sd = star(gauge.cov_deriv(p))               # analytic mode
        fa = gauge.curvature(p)
        resid_an = form_norm(Form(grid, 2, "quat",
                                  sd.values - branch * eps * fa.values),
                             np.inf)
        sd_fd = star(gauge.cov_deriv(p, "central2"))
        fa_fd = gauge.curvature(p, "central2")
        resid_fd = form_norm(Form(grid, 2, "quat",
                                  sd_fd.values - branch * eps * fa_fd.values),
                             np.inf, interior=2)
        rows.append((nn, grid.h, resid_an, resid_fd))
        w.record("bogomolnyi_residual", seed=cfg["seed"], nodes=nn, h=grid.h,
                 analytic_sup=resid_an, fd_sup=resid_fd)
    ratios = [rows[i][3] / rows[i + 1][3] for i in range(len(rows) - 1)]
    w.record("fd_order", ratios=ratios)
    w.table("residuals", ["nodes", "h", "analytic_sup", "fd_sup"], rows)
    w.plot_xy("fd_residual_vs_h", [r[1] for r in rows], [r[3] for r in rows],
              "h", "sup residual", "FD Bogomolnyi residual", logx=True,
              logy=True)


def run_inequality_audit(cfg, w: ReportWriter) -> None:
    grid = Grid.cube(-cfg["box_half"], cfg["box_half"], int(cfg["nodes"]))
    eps = cfg["epsilon"]
    margins = []
    for s in range(int(cfg["seeds"])):
        p = sample_random_pair(grid, seed=cfg["seed"] * 100003 + s,
                               epsilon=eps)
        cov = gauge.cov_deriv(p)
        fa = gauge.curvature(p)
        zf = gauge.z_form(p)
        zmag = np.sqrt(np.sum(zf.values**2, axis=0))
        ncov = np.sqrt(np.sum(qnorm2(cov.values), axis=0))
        nfa = np.sqrt(np.sum(qnorm2(fa.values), axis=0))
        m1 = np.min(2 * ncov * nfa - zmag)
        m2 = np.min(ncov**2 / eps + eps * nfa**2 - 2 * ncov * nfa)
        margins.append((s, float(m1), float(m2)))
        if m1 < 0 or m2 < 0:
            w.record("violation", seed=s, margin_ab=m1, margin_amgm=m2)
    worst = (min(m[1] for m in margins), min(m[2] for m in margins))
    w.record("inequality_audit", seed=cfg["seed"], seeds=len(margins),
             min_margin_cauchy=worst[0], min_margin_amgm=worst[1],
             violations=sum(1 for m in margins if m[1] < 0 or m[2] < 0))
    w.table("margins", ["seed", "margin_cauchy", "margin_amgm"], margins)
    w.plot_xy("margins", [m[0] for m in margins], [m[1] for m in margins],
              "seed", "min pointwise margin |Z| vs 2|dPhi||F|")


def run_quantization(cfg, w: ReportWriter) -> None:
    eps = cfg["epsilon"]
    nodes = _ints(cfg["nodes"])
    box = cfg["box_half"]
    # exactness Z = 2 d beta under h-halving (BPS plus random smooth pairs)
    gaps_bps = []
    for nn in nodes:
        grid = Grid.cube(-box, box, nn)
        p = bps.bps_pair(bps.BpsSpec(sign=-1, epsilon=eps), grid)
        z = gauge.z_form(p)
        dbeta = forms_d2beta(p)
        gaps_bps.append(_l1_interior(z, dbeta))
    ratio_bps = [a / b for a, b in zip(gaps_bps, gaps_bps[1:])]
    w.record("z_eq_2dbeta_bps", gaps=gaps_bps, ratios=ratio_bps)
    rng_ratios = []
    for s in range(int(cfg["random_pairs"])):
        gaps = []
        for nn in nodes:
            grid = Grid.cube(-box, box, nn)
            p = sample_random_pair(grid, seed=cfg["seed"] * 7919 + s,
                                   epsilon=eps, amp_phi=0.8, amp_a=0.8)
            gaps.append(_l1_interior(gauge.z_form(p), forms_d2beta(p)))
        rng_ratios.append(gaps[0] / gaps[-1] if len(gaps) > 1 else 0.0)
        w.record("z_eq_2dbeta_random", seed=s, gaps=gaps)
    # omega quantization on spheres, both signs
    radii = _floats(cfg["radii"])
    grid = Grid.cube(-box, box, max(nodes))
    for sign in (1, -1):
        p = bps.bps_pair(bps.BpsSpec(sign=sign, epsilon=eps), grid)
        for r in radii:
            flux = gauge.sphere_flux(p, (0, 0, 0), r, "omega")
            surf = currents.sphere_surface((0, 0, 0), r)
            phi, _, _ = gauge.point_fields(p, surf.vertices)
            deg = currents.degree(phi, surf)
            w.record("omega_quantization", sign=sign, radius=r,
                     flux_over_4pi=flux / (4 * pi), degree=deg,
                     residual=abs(flux / (4 * pi) + deg))
    w.table("z2dbeta", ["nodes", "l1_gap_bps"],
            list(zip(nodes, gaps_bps)))
    w.plot_xy("z2dbeta_gap", [Grid.cube(-box, box, nn).h for nn in nodes],
              gaps_bps, "h", "L1 gap", "Z - 2 d beta", logx=True, logy=True)


def forms_d2beta(p: gauge.Pair) -> Form:
    from . import forms as F
    beta = gauge.beta_form(p)
    d2 = F.d(beta, "central2")
    return Form(p.grid, 3, "real", 2.0 * d2.values)


def _l1_interior(z: Form, other: Form) -> float:
    diff = Form(z.grid, 3, "real", z.values - other.values)
    return form_norm(diff, 1, interior=2)


def run_recovery_gamma(cfg, w: ReportWriter) -> None:
    if cfg["fixture"] != "dipole":
        raise ConfigError(f"unknown fixture {cfg['fixture']!r}")
    P = _dipole(cfg["box_half"])
    ladder = _ladder(cfg)
    nodes = _ints(cfg["nodes"])
    if len(nodes) != len(ladder):
        raise ConfigError("nodes list must match the ladder length")
    opt = recovery.RecoveryOptions(delta=float(cfg["delta"]))
    dom = ((-cfg["box_half"],) * 3, (cfg["box_half"],) * 3)
    rows = []
    for eps, nn in zip(ladder, nodes):
        spec = recovery.recovery_field_spec(P, eps, dom, opt)
        grid = Grid.cube(-cfg["box_half"], cfg["box_half"], nn)
        E = gauge.energy_from_spec(spec, eps, grid, keep_density=False)
        deficit = gauge.modulus_deficit_sq_from_spec(spec, grid)
        rows.append((eps, nn, E.total, E.total / (8 * pi), deficit))
        w.record("recovery_energy", epsilon=eps, nodes=nn, energy=E.total,
                 over_8pi=E.total / (8 * pi), deficit_sq=deficit,
                 mass=P.mass())
    if len(rows) > 1:
        le = np.log([r[0] for r in rows])
        ld = np.log([r[4] for r in rows])
        slope = float(np.polyfit(le, ld, 1)[0])
        w.record("deficit_fit", exponent=slope)
    w.table("gamma_ladder", ["epsilon", "nodes", "energy", "over_8pi",
                             "deficit_sq"], rows)
    w.plot_xy("energy_vs_eps", [r[0] for r in rows], [r[2] for r in rows],
              "epsilon", "E_eps", "dipole recovery energy", hline=8 * pi)
    w.plot_xy("deficit_vs_eps", [r[0] for r in rows], [r[4] for r in rows],
              "epsilon", "int (1-|Phi|)^2", logx=True, logy=True)


def run_liminf_cells(cfg, w: ReportWriter) -> None:
    if cfg["fixture"] != "dipole":
        raise ConfigError(f"unknown fixture {cfg['fixture']!r}")
    P = _dipole(cfg["box_half"])
    ladder = _ladder(cfg)
    nodes = _ints(cfg["nodes"])
    opt = recovery.RecoveryOptions(delta=float(cfg["delta"]),
                                   eta=float(cfg["eta"]))
    dom = ((-cfg["box_half"],) * 3, (cfg["box_half"],) * 3)
    rows = []
    for eps, nn in zip(ladder, nodes):
        spec = recovery.recovery_field_spec(P, eps, dom, opt)
        grid = Grid.cube(-cfg["box_half"], cfg["box_half"], nn)
        z = gauge.z_form_from_spec(spec, grid)
        part = currents.cell_partition(grid, float(cfg["ell"]), (0.0, 0.5, 0.5))
        T = currents.cell_integrals(z, part)
        carrier = gauge.pair_from_spec(
            spec, Grid.cube(-cfg["box_half"], cfg["box_half"], 33), eps)
        S = currents.degree_current(carrier, part)
        gap = float(np.sum(np.abs(T.weights - 4 * pi * S.weights)))
        charged = np.abs(S.weights) > 0.5
        rows.append((eps, gap / (4 * pi),
                     float(np.max(np.abs(T.weights[charged])) / (4 * pi))
                     if np.any(charged) else 0.0,
                     float(np.max(np.abs(T.weights[~charged])))
                     if np.any(~charged) else 0.0))
        w.record("liminf_cells", epsilon=eps, gap_over_4pi=gap / (4 * pi),
                 charged_cells=int(np.sum(charged)),
                 weights_over_4pi=[float(v) for v in T.weights / (4 * pi)])
    w.table("quantization_gap", ["epsilon", "gap_over_4pi",
                                 "max_charged_over_4pi", "max_other"], rows)
    w.plot_xy("gap_vs_eps", [r[0] for r in rows], [r[1] for r in rows],
              "epsilon", "M(T - 4 pi S)/4 pi", "quantization gap")


def run_slices(cfg, w: ReportWriter) -> None:
    n3 = int(cfg["nodes3"])
    n4 = int(cfg["nodes4"])
    eps = cfg["epsilon"]
    g3 = Grid.cube(-2.0, 2.0, n3)
    h = g3.h
    lo4 = (-2.0, -2.0, -2.0, 0.0)
    grid4 = Grid.from_spacing(lo4, h, (n3, n3, n3, n4))
    spec = bps.BpsSpec(sign=-1, epsilon=eps)
    p4 = bps.bps_pair(spec, grid4)
    p3 = bps.bps_pair(spec, g3)
    rows = []
    z3_ints = []
    for k in range(n4):
        y = grid4.lo[3] + k * h
        sl = currents.slice_pair(p4, y)
        dev = max(float(np.max(np.abs(sl.phi.values - p3.phi.values))),
                  float(np.max(np.abs(sl.a.values - p3.a.values))))
        zint = integrate(gauge.z_form(sl))
        z3_ints.append(zint)
        rows.append((y, dev, zint))
    z4 = gauge.z_form(p4)
    # int Z ^ dx4 over the 4D box = int Z_123 dvol4
    comp123 = list(forms_combos(4, 3)).index((0, 1, 2))
    vol_int = integrate(Form(grid4, 4, "real", z4.values[comp123][None]))
    L4 = grid4.hi[3] - grid4.lo[3]
    wts = np.full(n4, h)
    wts[0] = wts[-1] = h / 2
    fubini_lhs = float(np.sum(wts * np.asarray(z3_ints))) / L4
    fubini_rhs = vol_int / L4
    w.record("fubini", mean_slice_z=fubini_lhs, volume_z_over_L=fubini_rhs,
             rel_gap=abs(fubini_lhs - fubini_rhs)
             / max(abs(fubini_rhs), 1e-30))
    e4 = gauge.energy(p4, keep_density=False)
    slice_E = [gauge.energy(currents.slice_pair(p4, grid4.lo[3] + k * h),
                            keep_density=False).total for k in range(n4)]
    coarea = float(np.sum(wts * np.asarray(slice_E)))
    w.record("coarea", energy4=e4.total, summed_slices=coarea,
             rel_gap=abs(coarea - e4.total) / e4.total)
    w.record("slice_match", max_deviation=max(r[1] for r in rows))
    w.table("slices", ["y", "max_field_dev", "z_integral"], rows)
    w.plot_xy("z_per_slice", [r[0] for r in rows], [r[2] for r in rows],
              "y", "int Z(slice)")


def forms_combos(n, k):
    from .forms import combos
    return combos(n, k)


def run_plateau(cfg, w: ReportWriter) -> None:
    eps = cfg["epsilon"]
    half = cfg["box_half"]
    nn = int(round(2 * half / cfg["h"])) + 1
    grid = Grid.cube(-half, half, nn)
    spec = bps.bps_field_spec(bps.BpsSpec(sign=-1, epsilon=eps))
    bd = plateau.boundary_data_from_spec(spec, grid)
    init = gauge.pair_from_spec(spec, grid, eps)
    sec, resid = plateau.harmonic_section(init.a, init.phi.values[0][..., 1:])
    w.record("harmonic_init", residual=resid)
    init2 = gauge.Pair(sec, init.a.copy(), eps)
    opts = plateau.MinimizeOptions(max_iter=int(cfg["max_iter"]),
                                   grad_tol=float(cfg["grad_tol"]),
                                   init=init2,
                                   noise_amp=float(cfg["noise_amp"]),
                                   seed=int(cfg["seed"]))
    res = plateau.minimize(bd, eps, grid, opts)
    mono = all(res.trace[i + 1][1] <= res.trace[i][1] + 1e-12
               for i in range(len(res.trace) - 1))
    grad_err = plateau.gradient_fd_error(
        *plateau.state_from_pair(res.pair), eps, grid, n_dirs=5)
    w.record("plateau_reduction", energy=res.trace[-1][1],
             over_4pi=res.trace[-1][1] / (4 * pi), monotone=mono,
             iterations=len(res.trace) - 1, grad_fd_error=grad_err,
             converged=res.converged)
    ref = currents.DiscreteZeroCurrent(np.zeros((1, 3)),
                                       np.array([4 * pi]))
    Ts, rep = plateau.extract_plateau([(eps, res.pair)], ref,
                                      float(cfg["ell"]),
                                      offset=(0.2, 0.2, 0.2))
    w.record("plateau_extraction", **rep["runs"][0])
    w.table("descent_trace", ["iter", "energy", "gradnorm", "step"],
            res.trace)
    w.plot_xy("descent_trace", [r[0] for r in res.trace],
              [r[1] for r in res.trace], "iteration", "energy",
              hline=4 * pi)
    Ts[0].to_csv(w.out / "extracted_current.csv")

    if int(cfg["soft4d"]):
        n4 = int(cfg["nodes4"])
        eps4 = float(cfg["epsilon4"])
        g4 = Grid.cube(-1.0, 1.0, n4, n=4)
        P = recovery.PolyCurrent(4, [recovery.Cell(
            1, 1, ((0.0, 0.0, 0.0, -1.0), (0.0, 0.0, 0.0, 1.0)))])
        ropt = recovery.RecoveryOptions(delta=0.9,
                                        compensated_at_infinity=True,
                                        certify=False)
        bd4 = plateau.boundary_data_from_recovery(P, eps4, g4, ropt)
        init4 = gauge.pair_from_spec(
            recovery.recovery_field_spec(P, eps4, (g4.lo, g4.hi), ropt),
            g4, eps4)
        res4 = plateau.minimize(
            bd4, eps4, g4,
            plateau.MinimizeOptions(max_iter=int(cfg["max_iter4"]),
                                    grad_tol=1e-6, init=init4))
        mono4 = all(res4.trace[i + 1][1] <= res4.trace[i][1] + 1e-12
                    for i in range(len(res4.trace) - 1))
        w.record("plateau_soft4d", energy=res4.trace[-1][1],
                 per_unit_length=res4.trace[-1][1] / 2.0,
                 monotone=mono4, iterations=len(res4.trace) - 1,
                 completed=True)
        w.table("descent_trace_4d", ["iter", "energy", "gradnorm", "step"],
                res4.trace)


def run_theta_monopole(cfg, w: ReportWriter) -> None:
    eps = cfg["epsilon"]
    nodes = _ints(cfg["nodes"])
    rows = []
    for nn in nodes:
        grid = Grid.cube(-cfg["box_half"], cfg["box_half"], nn)
        p = bps.bps_pair(bps.BpsSpec(sign=-1, epsilon=eps), grid)
        theta = Form(grid, 0, "real", np.ones((1,) + grid.shape))
        z_theta, dir2, _ = gauge.theta_pairing(p, theta)
        # residual in FD mode for the order check
        p_fd = gauge.Pair(p.phi, p.a, eps, scheme="central2")
        _, _, resid_fd = gauge.theta_pairing(p_fd, theta)
        E = gauge.energy(p, keep_density=False)
        rows.append((nn, grid.h, z_theta, dir2,
                     abs(z_theta - dir2) / E.total, resid_fd))
        w.record("theta_pairing", nodes=nn, z_theta=z_theta,
                 twice_dirichlet=dir2,
                 rel_gap_vs_energy=abs(z_theta - dir2) / E.total,
                 fd_residual=resid_fd)
    if len(rows) > 1:
        w.record("residual_order", ratios=[rows[i][5] / rows[i + 1][5]
                                           for i in range(len(rows) - 1)])
    w.table("theta_pairing", ["nodes", "h", "z_theta", "two_dirichlet",
                              "rel_gap", "fd_residual"], rows)
    w.plot_xy("residual_vs_h", [r[1] for r in rows], [r[5] for r in rows],
              "h", "monopole residual (L2)", logx=True, logy=True)


RUNNERS = {
    "bps-energy": run_bps_energy,
    "bogomolnyi-residual": run_bogomolnyi,
    "inequality-audit": run_inequality_audit,
    "quantization": run_quantization,
    "recovery-gamma": run_recovery_gamma,
    "liminf-cells": run_liminf_cells,
    "slices": run_slices,
    "plateau": run_plateau,
    "theta-monopole": run_theta_monopole,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ymhlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run one experiment")
    runp.add_argument("experiment")
    runp.add_argument("--config", default=None)
    runp.add_argument("--set", action="append", default=[],
                      metavar="key=value")
    runp.add_argument("--out", required=True)
    args = parser.parse_args(argv)

    try:
        file_cfg = _parse_kv_file(args.config) if args.config else {}
        overrides = {}
        for item in getattr(args, "set"):
            if "=" not in item:
                raise ConfigError(f"--set needs key=value, got {item!r}")
            k, v = item.split("=", 1)
            overrides[k.strip()] = v.strip()
        cfg = build_config(args.experiment, file_cfg, overrides)
        if args.experiment in ("recovery-gamma", "liminf-cells"):
            _ladder(cfg)  # validate early
    except (ConfigError, FileNotFoundError, ValueError) as err:
        print(f"validation error: {err}", file=sys.stderr)
        return EXIT_VALIDATION

    writer = ReportWriter(args.out, cfg)
    writer.save_config()
    try:
        RUNNERS[args.experiment](cfg, writer)
    except ConfigError as err:
        print(f"validation error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as err:  # numerical failure with diagnostics
        writer.record("failure", error=str(err))
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
