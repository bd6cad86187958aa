"""End-to-end verification suite for the whole laboratory.

Ten numbered checks tie the implementation to the closed-form anchors of
the depth-2 hyperbolic-secant well and to cross-module consistency:

 1. linear oracle (lambda* = 1, psi* = sech/sqrt(2))
 2. seed remainder order 1/(p-1) + 1
 3. internal-mode slope lambda_omega/(omega - lambda*) -> p - 1
 4. growth-band edge a0^2 = lambda_omega, band support, mode-count bound
 5. R_scaled -> c(p) plus the closed forms c(2), c(5)
 6. critical exponent p* and the stability sign pattern
 7. coercivity of L+ on the complement of phi
 8. nonlinear growth rate vs linear mu*, conservation, stable-side bound
 9. bifurcation-branch slopes vs omega''(0), R, and dlambda/domega omega''(0)
10. symmetric vs non-symmetric mu and mode-reduced vs dense-2D omega''(0)

Each check returns a CriterionResult; run_all evaluates them in order and
emits one pass/fail line apiece. Stated runtime budgets are part of the
pass condition where given.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .bifurcation import (
    branch_continue,
    find_pstar,
    leading_coefficient,
    omega_pp0_direct,
    r_coefficient,
)
from .evolve2d import Perturbation, run_growth_experiment
from .grid import Grid1D
from .groundstate import solve_ground_asymptotic
from .linearized import (
    assemble,
    coercivity_check,
    critical_wavenumber,
    spectrum_for_period,
    transverse_growth,
    transverse_growth_direct,
)
from .potential import PotentialSpec, linear_ground

DEFAULT_N = 1024
DEFAULT_X = 20.0
DEFAULT_NY = 64


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    elapsed: float
    details: str

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:2d} [{mark}] {self.name}: {self.details} ({self.elapsed:.1f}s)"


def _well() -> PotentialSpec:
    return PotentialSpec.poschl_teller(2.0)


def _grid(n: int = DEFAULT_N) -> Grid1D:
    return Grid1D(n=n, half_width=DEFAULT_X)


def _extrapolate(xs, vals) -> float:
    """Value at 0 of the quadratic through three (x, val) samples."""
    return float(np.polyfit(xs, vals, 2)[-1])


def criterion_1() -> CriterionResult:
    t0 = time.perf_counter()
    lg = linear_ground(_well(), _grid())
    x = lg.grid.nodes
    exact = 1.0 / (np.cosh(x) * math.sqrt(2.0))
    err_lam = abs(lg.lambda_star - 1.0)
    err_psi = float(np.max(np.abs(lg.psi_star - exact)))
    elapsed = time.perf_counter() - t0
    ok = err_lam <= 1e-6 and err_psi <= 1e-6 and elapsed < 5.0
    return CriterionResult(
        1,
        "linear_oracle",
        ok,
        elapsed,
        f"|lambda*-1|={err_lam:.2e} max|psi*-sech/sqrt2|={err_psi:.2e}",
    )


def criterion_2() -> CriterionResult:
    t0 = time.perf_counter()
    spec, grid = _well(), _grid()
    lg = linear_ground(spec, grid)
    xs = np.array([0.04, 0.02, 0.01, 0.005])
    errs = [
        solve_ground_asymptotic(spec, lg.lambda_star + x, 3.0, grid).seed_error
        for x in xs
    ]
    slope = float(np.polyfit(np.log(xs), np.log(errs), 1)[0])
    ok = abs(slope - 1.5) <= 0.2
    return CriterionResult(
        2,
        "seed_remainder_order",
        ok,
        time.perf_counter() - t0,
        f"log-log slope {slope:.4f} vs 1.5 +- 0.2",
    )


def criterion_3() -> CriterionResult:
    t0 = time.perf_counter()
    spec, grid = _well(), _grid()
    lg = linear_ground(spec, grid)
    xs = np.array([4e-3, 2e-3, 1e-3])
    worst_p, worst = None, 0.0
    for p in (2.0, 3.0, 4.0):
        ratios = []
        for x in xs:
            gs = solve_ground_asymptotic(spec, lg.lambda_star + x, p, grid)
            lam = assemble(gs, spec).internal[0]
            ratios.append(lam / x)
        rel = abs(_extrapolate(xs, ratios) / (p - 1.0) - 1.0)
        if rel > worst:
            worst_p, worst = p, rel
    ok = worst <= 0.01
    return CriterionResult(
        3,
        "internal_mode_slope",
        ok,
        time.perf_counter() - t0,
        f"worst extrapolation error {worst:.2%} at p={worst_p}",
    )


def criterion_4() -> CriterionResult:
    t0 = time.perf_counter()
    spec, grid = _well(), _grid()
    lg = linear_ground(spec, grid)
    gs = solve_ground_asymptotic(spec, lg.lambda_star + 0.05, 3.0, grid)
    asm = assemble(gs, spec)
    lam = asm.internal[0]
    a0 = critical_wavenumber(asm, rel_tol=1e-4)
    edge_rel = abs(a0 * a0 - lam) / lam
    root = math.sqrt(lam)
    outside = [transverse_growth(asm, f * root) for f in (1.0, 1.1, 1.3, 1.7, 2.5)]
    spectrum = spectrum_for_period(asm, 3.0 * lam**-0.5)
    bound = 1.0 + 2.0 * spectrum.period * root
    ok = (
        edge_rel < 0.005
        and max(outside) <= 1e-6
        and spectrum.unstable_count <= bound
    )
    return CriterionResult(
        4,
        "critical_wavenumber",
        ok,
        time.perf_counter() - t0,
        f"|a0^2-lam|/lam={edge_rel:.2e}, max mu outside={max(outside):.1e}, "
        f"count {spectrum.unstable_count} <= {bound:.2f}",
    )


def criterion_5() -> CriterionResult:
    t0 = time.perf_counter()
    spec, grid = _well(), _grid()
    lg = linear_ground(spec, grid)
    xs = np.array([4e-3, 2e-3, 1e-3])
    worst_p, worst = None, 0.0
    for p in (2.0, 3.0, 4.0, 4.5):
        scaled = [
            r_coefficient(spec, p, lg.lambda_star + x, grid).r_scaled for x in xs
        ]
        rel = abs(_extrapolate(xs, scaled) / leading_coefficient(p) - 1.0)
        if rel > worst:
            worst_p, worst = p, rel
    closed = (
        abs(leading_coefficient(2.0) - 14.0 * math.pi / 3.0) < 1e-12
        and abs(leading_coefficient(5.0) + 2.0 * math.pi / 3.0) < 1e-12
    )
    ok = worst <= 0.05 and closed
    return CriterionResult(
        5,
        "mass_defect_scaling",
        ok,
        time.perf_counter() - t0,
        f"worst c(p) error {worst:.2%} at p={worst_p}; closed forms ok={closed}",
    )


def criterion_6() -> CriterionResult:
    t0 = time.perf_counter()
    spec, grid = _well(), _grid()
    lg = linear_ground(spec, grid)
    root = find_pstar(spec, grid, bracket=(4.0, 4.3), edge_offset=1e-3, tol=1e-3)
    target = (9.0 + math.sqrt(57.0)) / 4.0
    signs_ok = True
    for p, expect_stable in ((2.0, True), (3.0, True), (4.0, True), (4.2, False), (5.0, False)):
        rep = r_coefficient(spec, p, lg.lambda_star + 1e-3, grid)
        signs_ok = signs_ok and (rep.r_coefficient > 0) == expect_stable
    elapsed = time.perf_counter() - t0
    ok = abs(root - target) <= 0.05 and signs_ok and elapsed < 300.0
    return CriterionResult(
        6,
        "critical_exponent",
        ok,
        elapsed,
        f"p*={root:.4f} vs {target:.6f}; sign pattern ok={signs_ok}",
    )


def criterion_7() -> CriterionResult:
    t0 = time.perf_counter()
    spec, grid = _well(), _grid()
    lg = linear_ground(spec, grid)
    worst = math.inf
    for p in (2.0, 3.0):
        for x in (0.005, 0.01, 0.02):
            gs = solve_ground_asymptotic(spec, lg.lambda_star + x, p, grid)
            worst = min(worst, coercivity_check(assemble(gs, spec)))
    ok = worst > 0.0
    return CriterionResult(
        7,
        "coercivity",
        ok,
        time.perf_counter() - t0,
        f"min constrained eigenvalue {worst:.6f} > 0",
    )


def criterion_8() -> CriterionResult:
    t0 = time.perf_counter()
    spec, grid = _well(), _grid()
    lg = linear_ground(spec, grid)
    gs = solve_ground_asymptotic(spec, lg.lambda_star + 0.05, 3.0, grid)
    asm = assemble(gs, spec)
    l_c = asm.internal[0] ** -0.5
    pert = Perturbation(delta=1e-5, mode=1)

    unstable = run_growth_experiment(
        gs, spectrum_for_period(asm, 1.25 * l_c), spec, DEFAULT_NY, pert
    )
    mu_rel = abs(unstable.fit.mu - unstable.spectrum.mu_star) / unstable.spectrum.mu_star

    stable = run_growth_experiment(
        gs, spectrum_for_period(asm, 0.8 * l_c), spec, DEFAULT_NY, pert, t_end=50.0
    )
    m1 = stable.record.mode1
    stable_ratio = float(np.max(m1) / m1[0])

    drift_q, drift_e = 0.0, 0.0
    for run in (unstable, stable):
        q, e = run.record.mass, run.record.energy
        drift_q = max(drift_q, float(np.max(np.abs(q - q[0])) / q[0]))
        drift_e = max(drift_e, float(np.max(np.abs(e - e[0])) / abs(e[0])))

    elapsed = time.perf_counter() - t0
    ok = (
        unstable.fit.status == "ok"
        and mu_rel <= 0.10
        and unstable.fit.r2 > 0.99
        and stable_ratio < 2.0
        and drift_q <= 1e-10
        and drift_e <= 1e-6
        and elapsed < 600.0
    )
    return CriterionResult(
        8,
        "dynamics_growth",
        ok,
        elapsed,
        f"mu_fit off by {mu_rel:.2%} (r2={unstable.fit.r2:.5f}); stable max "
        f"m1/m1(0)={stable_ratio:.3f}; drift Q={drift_q:.1e} E={drift_e:.1e}",
    )


def criterion_9() -> CriterionResult:
    t0 = time.perf_counter()
    spec = _well()
    grid = Grid1D(n=128, half_width=DEFAULT_X)
    lg = linear_ground(spec, grid)
    omega0 = lg.lambda_star + 0.05
    rep = r_coefficient(spec, 3.0, omega0, grid)
    points = branch_continue(
        spec, 3.0, omega0, grid, amplitudes=(0.005, 0.01, 0.02, 0.03, 0.04, 0.05), ny=16
    )
    a2 = np.array([pt.amplitude**2 for pt in points])
    base = solve_ground_asymptotic(spec, omega0, 3.0, grid)
    norm0 = (
        2.0 * math.pi * rep.critical_period * grid.spacing * float(np.sum(base.phi**2))
    )
    slope_omega = float(np.polyfit(a2, [pt.omega - omega0 for pt in points], 2)[-2])
    slope_norm = float(np.polyfit(a2, [pt.norm2 - norm0 for pt in points], 2)[-2])
    slope_lam2 = float(np.polyfit(a2, [pt.lambda2 for pt in points], 2)[-2])
    rel_omega = abs(slope_omega / (rep.omega_pp0 / 2.0) - 1.0)
    rel_norm = abs(slope_norm / (rep.r_coefficient / 2.0) - 1.0)
    rel_lam2 = abs(slope_lam2 / (rep.dlambda_domega * rep.omega_pp0) - 1.0)
    ok = rel_omega <= 0.10 and rel_norm <= 0.10 and rel_lam2 <= 0.15
    return CriterionResult(
        9,
        "branch_slopes",
        ok,
        time.perf_counter() - t0,
        f"omega slope off {rel_omega:.2%}, norm slope off {rel_norm:.2%}, "
        f"lambda2 slope off {rel_lam2:.2%}",
    )


def criterion_10() -> CriterionResult:
    t0 = time.perf_counter()
    spec = _well()
    grid = Grid1D(n=256, half_width=DEFAULT_X)
    lg = linear_ground(spec, grid)
    gs = solve_ground_asymptotic(spec, lg.lambda_star + 0.05, 3.0, grid)
    asm = assemble(gs, spec)
    root = math.sqrt(asm.internal[0])
    worst_mu = 0.0
    for f in np.linspace(0.05, 0.95, 20):
        a = f * root
        mu_s = transverse_growth(asm, a)
        mu_n = transverse_growth_direct(asm, a)
        worst_mu = max(worst_mu, abs(mu_s - mu_n) / mu_s)
    rep = r_coefficient(spec, 3.0, lg.lambda_star + 0.05, grid)
    direct = omega_pp0_direct(spec, 3.0, lg.lambda_star + 0.05, grid, ny=8)
    rel_pp = abs(direct / rep.omega_pp0 - 1.0)
    ok = worst_mu <= 1e-6 and rel_pp <= 0.01
    return CriterionResult(
        10,
        "cross_checks",
        ok,
        time.perf_counter() - t0,
        f"mu route mismatch {worst_mu:.1e}; omega'' route mismatch {rel_pp:.1e}",
    )


ALL_CRITERIA = (
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
)


def run_all(echo=print) -> list[CriterionResult]:
    """Run the whole gate in order, emitting one line per criterion."""
    results = []
    for fn in ALL_CRITERIA:
        result = fn()
        results.append(result)
        if echo is not None:
            echo(result.line())
    return results
