"""Nonlinear line ground states by damped Newton continuation.

The stationary profile solves

    -phi'' + omega*phi + V*phi - phi^p = 0,   phi > 0, even,

for omega above the linear level lambda*. Near lambda* the solution is a
small multiple of the linear eigenfunction; that asymptotic profile seeds
Newton directly, and continuation in omega reuses each converged state as
the next warm start.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import NonConvergence, TrivialSolution
from .grid import Grid1D, h1_norm, l2_norm
from .potential import LinearGround, PotentialSpec, eval_potential, linear_ground

DEFAULT_TOL = 1e-11
_MAX_ITER = 60
_MAX_HALVINGS = 8


@dataclass(frozen=True)
class GroundState:
    """A converged stationary profile.

    Attributes:
        omega: Frequency, strictly above lambda*.
        p: Nonlinearity exponent (>= 2).
        phi: Real, even, positive profile samples.
        grid: Discretization.
        residual: Final L2 residual of the stationary equation.
        seed_error: H1 distance from the leading-order asymptotic profile.
    """

    omega: float
    p: float
    phi: NDArray[np.float64]
    grid: Grid1D
    residual: float
    seed_error: float

    @property
    def q1(self) -> float:
        """Line charge (1/2) int phi^2 dx."""
        return 0.5 * self.grid.spacing * float(np.sum(self.phi**2))


def asymptotic_seed(lg: LinearGround, omega: float, p: float) -> NDArray[np.float64]:
    """Leading-order profile c*(omega - lambda*)^{1/(p-1)} psi*.

    The coefficient c = ||psi*||_{L^{p+1}}^{-(p+1)/(p-1)} makes the cubic-order
    balance of the stationary equation exact on the linear level.

    Raises:
        ValueError: if omega <= lambda* (no small solution exists there).
    """
    if not omega > lg.lambda_star:
        raise ValueError(f"omega must exceed lambda* = {lg.lambda_star}, got {omega}")
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    norm_pp1 = lg.grid.spacing * float(np.sum(np.abs(lg.psi_star) ** (p + 1)))
    c = norm_pp1 ** (-1.0 / (p - 1))
    return c * (omega - lg.lambda_star) ** (1.0 / (p - 1)) * lg.psi_star


def _symmetrize(values: NDArray[np.float64], grid: Grid1D) -> NDArray[np.float64]:
    return 0.5 * (values + values[grid.reflection_indices()])


def solve_ground(
    seed: NDArray[np.float64],
    spec: PotentialSpec,
    omega: float,
    p: float,
    grid: Grid1D,
    tol: float = DEFAULT_TOL,
) -> GroundState:
    """Damped Newton iteration from a seed profile.

    Each iterate is symmetrized in x; the step is halved (up to 8 times)
    until the L2 residual decreases.

    Raises:
        ValueError: omega <= lambda*, or p < 2.
        TrivialSolution: the iteration collapsed to zero.
        NonConvergence: damping stalled or the iteration budget ran out.
    """
    if not p >= 2:
        raise ValueError(f"p must be >= 2, got {p}")
    lg = linear_ground(spec, grid)
    if not omega > lg.lambda_star:
        raise ValueError(f"omega must exceed lambda* = {lg.lambda_star}, got {omega}")

    vx = eval_potential(spec, grid)
    d2 = grid.second_derivative_matrix
    h = grid.spacing
    lin_diag = omega + vx

    def residual_vec(u: NDArray[np.float64]) -> NDArray[np.float64]:
        return -d2 @ u + lin_diag * u - np.abs(u) ** (p - 1) * u

    phi = _symmetrize(np.asarray(seed, dtype=float), grid)
    res = residual_vec(phi)
    res_norm = np.sqrt(h) * float(np.linalg.norm(res))
    for _ in range(_MAX_ITER):
        if res_norm < tol:
            break
        jac = -d2 + np.diag(lin_diag - p * np.abs(phi) ** (p - 1))
        step = np.linalg.solve(jac, res)
        damping = 1.0
        for _ in range(_MAX_HALVINGS + 1):
            cand = _symmetrize(phi - damping * step, grid)
            cand_res = residual_vec(cand)
            cand_norm = np.sqrt(h) * float(np.linalg.norm(cand_res))
            if cand_norm < res_norm:
                phi, res, res_norm = cand, cand_res, cand_norm
                break
            damping *= 0.5
        else:
            raise NonConvergence(
                f"damping stalled at residual {res_norm:.3e}", residual=res_norm
            )
    else:
        raise NonConvergence(
            f"no convergence after {_MAX_ITER} iterations, residual {res_norm:.3e}",
            residual=res_norm,
        )
    if float(np.max(np.abs(phi))) < 1e-8:
        raise TrivialSolution("Newton collapsed onto the zero solution")
    seed0 = asymptotic_seed(lg, omega, p)
    return GroundState(
        omega=float(omega),
        p=float(p),
        phi=phi,
        grid=grid,
        residual=res_norm,
        seed_error=h1_norm(phi - seed0, grid),
    )


def solve_ground_asymptotic(
    spec: PotentialSpec, omega: float, p: float, grid: Grid1D, tol: float = DEFAULT_TOL
) -> GroundState:
    """Convenience: seed from the asymptotic profile and solve."""
    lg = linear_ground(spec, grid)
    return solve_ground(asymptotic_seed(lg, omega, p), spec, omega, p, grid, tol=tol)


def continue_in_omega(
    spec: PotentialSpec,
    p: float,
    omegas: Sequence[float],
    grid: Grid1D,
    tol: float = DEFAULT_TOL,
) -> list[GroundState]:
    """Solve along an ascending omega list with warm starts.

    Raises:
        ValueError: if the omegas are not strictly ascending or start at or
            below lambda*.
    """
    omegas = list(omegas)
    if any(b <= a for a, b in zip(omegas, omegas[1:])):
        raise ValueError("omegas must be strictly ascending")
    lg = linear_ground(spec, grid)
    states: list[GroundState] = []
    seed = None
    for omega in omegas:
        if seed is None:
            seed = asymptotic_seed(lg, omega, p)
        states.append(solve_ground(seed, spec, omega, p, grid, tol=tol))
        seed = states[-1].phi
    return states


def d_omega_phi(
    spec: PotentialSpec,
    p: float,
    omega: float,
    grid: Grid1D,
    delta: float | None = None,
) -> NDArray[np.float64]:
    """Central-difference derivative of the profile with respect to omega.

    delta defaults to (omega - lambda*)/50 and must stay below half the
    distance to lambda* so both sample points remain in the solvable range.
    """
    lg = linear_ground(spec, grid)
    gap = omega - lg.lambda_star
    if delta is None:
        delta = gap / 50.0
    if not 0 < delta < 0.5 * gap:
        raise ValueError(f"delta must lie in (0, {0.5 * gap}), got {delta}")
    lo = solve_ground_asymptotic(spec, omega - delta, p, grid)
    hi = solve_ground(lo.phi, spec, omega + delta, p, grid)
    return (hi.phi - lo.phi) / (2.0 * delta)
