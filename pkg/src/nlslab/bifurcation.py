"""Symmetry-breaking bifurcation at the critical period.

At L = L_c(omega) = lambda_omega^{-1/2} the first transverse mode of the
line state turns neutral and a branch of y-dependent states

    u_a = phi_omega(a) + a psi_omega(x) cos(y / L) + O(a^2)

bifurcates. This module computes the curvature omega''(0) of the branch,
the mass-defect coefficient

    R = -2 lambda' pi L + omega''(0) dM/domega,

its edge scaling R_scaled = R sqrt(omega - lambda*) with closed-form limit
``leading_coefficient(p)``, the exponent p* where that limit changes sign,
and a direct continuation of the branch in a symmetry-reduced 2D basis that
cross-checks all three predicted slopes.

Mass here is the plain squared norm integral(|u|^2 dx dy); omega''(0) comes
from a two-mode reduction (the quadratic term pumps only the 0th and 2nd
transverse harmonics), with ``omega_pp0_direct`` providing an independent
dense-2D evaluation of the same projections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as sla
from numpy.typing import NDArray

from .errors import BranchLost
from .grid import Grid1D
from .groundstate import GroundState, solve_ground, solve_ground_asymptotic
from .linearized import OperatorAssembly, assemble
from .potential import LinearGround, PotentialSpec, eval_potential, linear_ground

PSTAR_LEADING = (9.0 + math.sqrt(57.0)) / 4.0

_CLAMP = 1e-14
_DENSE_2D_LIMIT = 4096


def leading_coefficient(p: float) -> float:
    """Closed-form limit of R_scaled as omega approaches lambda*.

    c(p) = (-4 p^2 + 18 p - 6) pi / (3 (p-1)^{3/2}); its positive root is
    PSTAR_LEADING. Positive below p*, negative above.
    """
    if p <= 1:
        raise ValueError(f"exponent must exceed 1, got {p}")
    return (-4.0 * p * p + 18.0 * p - 6.0) * math.pi / (3.0 * (p - 1.0) ** 1.5)


@dataclass(frozen=True)
class AuxProjections:
    """Deflated first-order correction of the small-amplitude expansion.

    correction solves (H + lambda*) G = psi*^p / ||psi*||_{p+1}^{p+1} - psi*
    with <G, psi*> = 0; integral is <psi*^p, G> and feedback the same
    quantity scaled by c^{p-1}, which is the coefficient that closes the
    expansion of lambda_omega at second order.
    """

    correction: NDArray[np.float64]
    integral: float
    feedback: float


def aux_projections(lg: LinearGround, p: float) -> AuxProjections:
    """Solve the deflated linear problem for the profile correction G.

    H + lambda* is singular exactly along psi* on the discrete level, so the
    solve uses the rank-one deflation A = H + lambda* + psi_hat psi_hat^T
    with the right-hand side and solution projected off the kernel.
    """
    if p <= 1:
        raise ValueError(f"exponent must exceed 1, got {p}")
    grid = lg.grid
    h = grid.spacing
    vx = eval_potential(lg.spec, grid)
    shifted = -grid.second_derivative_matrix + np.diag(vx + lg.lambda_star)
    psi = lg.psi_star
    norm_pp1 = h * float(np.sum(np.abs(psi) ** (p + 1)))
    rhs = np.abs(psi) ** (p - 1) * psi / norm_pp1 - psi
    unit = psi * np.sqrt(h)
    deflated = shifted + np.outer(unit, unit)
    rhs = rhs - unit * float(unit @ rhs)
    g = np.linalg.solve(deflated, rhs)
    g = g - unit * float(unit @ g)
    integral = h * float(np.sum(np.abs(psi) ** (p - 1) * psi * g))
    return AuxProjections(correction=g, integral=integral, feedback=integral / norm_pp1)


def second_order_integral(lg: LinearGround, p: float) -> float:
    """<psi*^p, G> for the correction G; equals 1/36 for the depth-2 well at p=3."""
    return aux_projections(lg, p).integral


def _stencil(
    spec: PotentialSpec,
    p: float,
    omega0: float,
    grid: Grid1D,
    delta: float | None,
) -> tuple[float, list[tuple[GroundState, OperatorAssembly]]]:
    """Ground states and assemblies at omega0 - delta, omega0, omega0 + delta."""
    lg = linear_ground(spec, grid)
    x = omega0 - lg.lambda_star
    if x <= 0:
        raise ValueError(f"omega0 must exceed lambda* = {lg.lambda_star:.6f}")
    if delta is None:
        delta = x / 20.0
    if not 0 < delta <= x / 10.0:
        raise ValueError(f"delta must lie in (0, {x / 10.0:.3e}], got {delta}")
    out = []
    for omega in (omega0 - delta, omega0, omega0 + delta):
        gs = solve_ground_asymptotic(spec, omega, p, grid)
        out.append((gs, assemble(gs, spec)))
    return delta, out


def dlambda_domega(
    spec: PotentialSpec,
    p: float,
    omega0: float,
    grid: Grid1D,
    delta: float | None = None,
) -> float:
    """Central-difference slope of the internal-mode depth lambda_omega."""
    delta, (lo, _, hi) = _stencil(spec, p, omega0, grid, delta)
    return (hi[1].internal[0] - lo[1].internal[0]) / (2.0 * delta)


def _omega_pp_terms(
    asm: OperatorAssembly, dlam: float
) -> tuple[float, float, float, float]:
    """(A0, A2, B, omega'') from the two-mode reduction at L = L_c."""
    gs = asm.ground
    p, h = gs.p, gs.grid.spacing
    lam, psi = asm.internal
    big_l = lam**-0.5
    phic = np.maximum(gs.phi, _CLAMP)
    f = phic ** (p - 2.0) * psi**2
    u0 = np.linalg.solve(asm.l_plus, f)
    u2 = np.linalg.solve(asm.l_plus + (4.0 / big_l**2) * np.eye(f.size), f)
    a0 = h * float(np.sum(f * u0))
    a2 = h * float(np.sum(f * u2))
    b = h * float(np.sum(phic ** (p - 3.0) * psi**4))
    omega_pp = -(p**2) * (p - 1.0) ** 2 / dlam * (a0 / 2.0 + a2 / 4.0) - p * (
        p - 1.0
    ) * (p - 2.0) * b / (4.0 * dlam)
    return a0, a2, b, omega_pp


def omega_pp0(
    spec: PotentialSpec,
    p: float,
    omega0: float,
    grid: Grid1D,
    delta: float | None = None,
) -> float:
    """Branch curvature omega''(0) at the critical period of omega0."""
    delta, (lo, center, hi) = _stencil(spec, p, omega0, grid, delta)
    dlam = (hi[1].internal[0] - lo[1].internal[0]) / (2.0 * delta)
    return _omega_pp_terms(center[1], dlam)[3]


def omega_pp0_direct(
    spec: PotentialSpec,
    p: float,
    omega0: float,
    grid: Grid1D,
    ny: int = 8,
    delta: float | None = None,
) -> float:
    """omega''(0) from a dense 2D solve instead of the mode reduction.

    Assembles the full linearized operator on the n x ny product grid at the
    critical period and projects against psi_omega cos(y/L) directly. The
    quadratic pumping involves only harmonics 0 and 2, so any ny >= 6
    resolves it exactly and agreement with omega_pp0 is a structural check,
    not a discretization limit.

    Raises:
        ValueError: if n * ny exceeds the dense-solve guard (4096).
    """
    if ny < 6 or ny % 2:
        raise ValueError(f"ny must be even and >= 6, got {ny}")
    if grid.n * ny > _DENSE_2D_LIMIT:
        raise ValueError(f"dense 2D solve capped at {_DENSE_2D_LIMIT} unknowns")
    delta, (lo, center, hi) = _stencil(spec, p, omega0, grid, delta)
    dlam = (hi[1].internal[0] - lo[1].internal[0]) / (2.0 * delta)
    asm = center[1]
    gs = center[0]
    lam, psi = asm.internal
    big_l = lam**-0.5
    n, h = grid.n, grid.spacing

    hy = 2.0 * math.pi * big_l / ny
    yv = hy * np.arange(ny)
    d2y = Grid1D(n=ny, half_width=math.pi * big_l).second_derivative_matrix
    lap2 = np.kron(grid.second_derivative_matrix, np.eye(ny)) + np.kron(
        np.eye(n), d2y
    )
    vx = eval_potential(spec, grid)
    diag2 = (omega0 + vx - p * np.abs(gs.phi) ** (p - 1.0))[:, None] * np.ones(ny)
    lp2 = -lap2 + np.diag(diag2.ravel())

    cosy = np.cos(yv / big_l)
    phic = np.maximum(gs.phi, _CLAMP)
    g = (phic ** (p - 2.0) * psi**2)[:, None] * cosy[None, :] ** 2
    ug = np.linalg.solve(lp2, g.ravel())
    w2 = h * hy
    i1 = w2 * float(np.sum(g.ravel() * ug))
    i2 = w2 * float(np.sum(phic[:, None] ** (p - 3.0) * psi[:, None] ** 4 * cosy[None, :] ** 4))
    norm2 = w2 * float(np.sum((psi[:, None] * cosy[None, :]) ** 2))
    return -(p**2) * (p - 1.0) ** 2 / (dlam * norm2) * i1 - p * (p - 1.0) * (
        p - 2.0
    ) / (3.0 * dlam * norm2) * i2


@dataclass(frozen=True)
class BifurcationReport:
    """Everything the mass-defect criterion needs at one (p, omega0)."""

    omega0: float
    p: float
    lambda_omega: float
    critical_period: float
    dlambda_domega: float
    omega_pp0: float
    dnorm2_domega: float
    r_coefficient: float
    r_scaled: float
    leading_coefficient: float

    @property
    def verdict(self) -> str:
        return "stable" if self.r_coefficient > 0 else "unstable"

    def as_dict(self) -> dict[str, float | str]:
        return {
            "omega0": self.omega0,
            "p": self.p,
            "lambda_omega": self.lambda_omega,
            "critical_period": self.critical_period,
            "dlambda_domega": self.dlambda_domega,
            "omega_pp0": self.omega_pp0,
            "dnorm2_domega": self.dnorm2_domega,
            "r_coefficient": self.r_coefficient,
            "r_scaled": self.r_scaled,
            "leading_coefficient": self.leading_coefficient,
            "verdict": self.verdict,
        }


def r_coefficient(
    spec: PotentialSpec,
    p: float,
    omega0: float,
    grid: Grid1D,
    delta: float | None = None,
) -> BifurcationReport:
    """Mass-defect coefficient R of the bifurcating branch at omega0.

    The mass derivative is taken at the fixed critical period of omega0
    itself, matching the baseline used when comparing branch masses at equal
    frequency.
    """
    delta, triple = _stencil(spec, p, omega0, grid, delta)
    (gs_lo, asm_lo), (gs0, asm0), (gs_hi, asm_hi) = triple
    dlam = (asm_hi.internal[0] - asm_lo.internal[0]) / (2.0 * delta)
    lam = asm0.internal[0]
    big_l = lam**-0.5
    _, _, _, omega_pp = _omega_pp_terms(asm0, dlam)

    h = grid.spacing
    norm2_hi = 2.0 * math.pi * big_l * h * float(np.sum(gs_hi.phi**2))
    norm2_lo = 2.0 * math.pi * big_l * h * float(np.sum(gs_lo.phi**2))
    dnorm2 = (norm2_hi - norm2_lo) / (2.0 * delta)

    r_coef = -2.0 * dlam * math.pi * big_l + omega_pp * dnorm2
    lg = linear_ground(spec, grid)
    r_scaled = r_coef * math.sqrt(omega0 - lg.lambda_star)
    return BifurcationReport(
        omega0=omega0,
        p=p,
        lambda_omega=lam,
        critical_period=big_l,
        dlambda_domega=dlam,
        omega_pp0=omega_pp,
        dnorm2_domega=dnorm2,
        r_coefficient=r_coef,
        r_scaled=r_scaled,
        leading_coefficient=leading_coefficient(p),
    )


def find_pstar(
    spec: PotentialSpec,
    grid: Grid1D,
    bracket: tuple[float, float] = (4.0, 4.3),
    edge_offset: float = 1e-3,
    tol: float = 1e-3,
) -> float:
    """Sign change of R(p) near the small-amplitude edge, by bisection.

    edge_offset is the fixed omega0 - lambda* at which R is sampled; it
    should be small enough that the leading coefficient dominates.

    Raises:
        ValueError: if R has the same sign at both bracket ends.
    """
    lo, hi = bracket
    if not lo < hi:
        raise ValueError(f"bracket must be ordered, got {bracket}")
    lg = linear_ground(spec, grid)
    omega0 = lg.lambda_star + edge_offset

    def sign_r(p: float) -> bool:
        return r_coefficient(spec, p, omega0, grid).r_coefficient > 0

    s_lo, s_hi = sign_r(lo), sign_r(hi)
    if s_lo == s_hi:
        raise ValueError(f"R does not change sign on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if sign_r(mid) == s_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BranchPoint:
    """One converged point of the bifurcating branch.

    amplitude is the projection coefficient of u - phi_line onto
    psi_omega cos(y/L); profile has shape (nx, ny).
    """

    amplitude: float
    omega: float
    profile: NDArray[np.float64]
    norm2: float
    lambda2: float


def _reduced_basis(nx: int, ny: int) -> tuple[NDArray[np.float64], NDArray[np.intp]]:
    """Orthonormal indicator basis of the even-even symmetry classes.

    Nodes related by x -> -x or y -> -y (index negation modulo n) share a
    class; the basis column for a class is its normalized indicator, so any
    diagonal operator stays diagonal in the reduced coordinates. Returns the
    dense basis and one representative flat index per class.
    """
    cls = -np.ones((nx, ny), dtype=int)
    sizes = []
    for ix in range(nx // 2 + 1):
        for iy in range(ny // 2 + 1):
            if cls[ix, iy] >= 0:
                continue
            orbit = {
                (ix, iy),
                ((nx - ix) % nx, iy),
                (ix, (ny - iy) % ny),
                ((nx - ix) % nx, (ny - iy) % ny),
            }
            cid = len(sizes)
            for jx, jy in orbit:
                cls[jx, jy] = cid
            sizes.append(len(orbit))
    m = len(sizes)
    flat_cls = cls.ravel()
    basis = np.zeros((nx * ny, m))
    scale = 1.0 / np.sqrt(np.asarray(sizes, dtype=float))
    basis[np.arange(nx * ny), flat_cls] = scale[flat_cls]
    rep = np.zeros(m, dtype=np.intp)
    rep[flat_cls] = np.arange(nx * ny)
    return basis, rep


def branch_continue(
    spec: PotentialSpec,
    p: float,
    omega0: float,
    grid: Grid1D,
    amplitudes: Sequence[float],
    ny: int = 16,
    tol: float = 1e-11,
    max_iter: int = 40,
) -> list[BranchPoint]:
    """Continue the symmetry-broken branch in its amplitude.

    Works in the even-even reduced basis on the critical torus of omega0
    with a bordered Newton step: the amplitude constraint
    <u - phi_line, psi cos> = a pi L pins the new mode while omega is freed.
    lambda2 reported per point is the second eigenvalue of the reduced
    linearized operator, whose slope in a^2 cross-checks
    dlambda/domega * omega''(0).

    Raises:
        ValueError: if amplitudes are not strictly increasing and positive.
        BranchLost: if the bordered Newton iteration stalls at some a.
    """
    amps = [float(a) for a in amplitudes]
    if not amps or any(a <= 0 for a in amps) or any(
        b <= a for a, b in zip(amps, amps[1:])
    ):
        raise ValueError("amplitudes must be positive and strictly increasing")

    gs = solve_ground_asymptotic(spec, omega0, p, grid)
    asm = assemble(gs, spec)
    lam, psi = asm.internal
    big_l = lam**-0.5
    nx, h = grid.n, grid.spacing

    hy = 2.0 * math.pi * big_l / ny
    yv = hy * np.arange(ny)
    d2y = Grid1D(n=ny, half_width=math.pi * big_l).second_derivative_matrix
    lap2 = np.kron(grid.second_derivative_matrix, np.eye(ny)) + np.kron(
        np.eye(nx), d2y
    )
    basis, rep = _reduced_basis(nx, ny)
    m = basis.shape[1]
    k_red = basis.T @ (-lap2) @ basis

    vx = eval_potential(spec, grid)
    v_flat = np.repeat(vx, ny)
    phi_flat = np.repeat(gs.phi, ny)
    chi_flat = (psi[:, None] * np.cos(yv / big_l)[None, :]).ravel()
    w2 = h * hy

    phi_red = basis.T @ phi_flat
    chi_red = basis.T @ chi_flat
    cons_grad = w2 * chi_red

    def solve_point(a: float, u_red: NDArray, omega: float) -> tuple[NDArray, float]:
        z = np.concatenate([u_red, [omega]])
        bordered = np.zeros((m + 1, m + 1))
        bordered[m, :m] = cons_grad
        for _ in range(max_iter):
            u_red, omega = z[:m], z[m]
            u_full = basis @ u_red
            nl = np.abs(u_full) ** (p - 1.0)
            resid = basis.T @ (-lap2 @ u_full + (omega + v_flat) * u_full - nl * u_full)
            cons = w2 * float(np.sum((u_full - phi_flat) * chi_flat)) - a * math.pi * big_l
            norm = math.sqrt(w2) * float(np.linalg.norm(resid)) + abs(cons)
            if norm < tol:
                return u_red, float(omega)
            bordered[:m, :m] = k_red + np.diag((omega + v_flat - p * nl)[rep])
            bordered[:m, m] = u_red
            z = z - np.linalg.solve(bordered, np.concatenate([resid, [cons]]))
        raise BranchLost(f"no convergence at amplitude {a} (residual {norm:.3e})")

    points = []
    u_red, omega = phi_red.copy(), omega0
    prev = 0.0
    for a in amps:
        u_red = u_red + (a - prev) * chi_red
        u_red, omega = solve_point(a, u_red, omega)
        prev = a
        u_full = basis @ u_red
        norm2 = w2 * float(np.sum(u_full**2))
        jac_red = k_red + np.diag((omega + v_flat - p * np.abs(u_full) ** (p - 1.0))[rep])
        lam2 = float(
            sla.eigh(jac_red, subset_by_index=(1, 1), eigvals_only=True)[0]
        )
        points.append(
            BranchPoint(
                amplitude=a,
                omega=omega,
                profile=u_full.reshape(nx, ny),
                norm2=norm2,
                lambda2=lam2,
            )
        )
    return points
