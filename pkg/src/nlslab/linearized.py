"""Linearized operators around a line state and transverse growth rates.

Around phi the linearization splits into

    L+ = -d2/dx2 + omega + V - p*phi^{p-1}
    L- = -d2/dx2 + omega + V - phi^{p-1}

and a transverse Fourier mode with wavenumber a feels the shifted pair
S(a) = diag(L+ + a^2, L- + a^2). The growth rate of that mode is

    mu(a)^2 = -min spec((L- + a^2)(L+ + a^2)),

computed here through the symmetric congruence M (L+ + a^2) M with
M = (L- + a^2)^{1/2}; a non-symmetric eigensolve of the raw product is kept
as a cross-check. On the torus of scale L only a = n/L occur, so the state
is spectrally stable once every integer mode sits at mu = 0, which happens
exactly for L below the critical period 1/sqrt(lambda_omega).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla
from numpy.typing import NDArray

from .errors import ModelError, SpectralAssumptionViolated
from .grid import Grid1D
from .groundstate import GroundState
from .potential import PotentialSpec, eval_potential

_NEG_TOL = 1e-8


@dataclass
class OperatorAssembly:
    """Dense L+ / L- matrices for one ground state."""

    ground: GroundState
    l_plus: NDArray[np.float64]
    l_minus: NDArray[np.float64]

    @property
    def grid(self) -> Grid1D:
        return self.ground.grid

    @cached_property
    def _minus_eig(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        return np.linalg.eigh(self.l_minus)

    @cached_property
    def _plus_rotated(self) -> NDArray[np.float64]:
        """L+ expressed in the eigenbasis of L-."""
        _, u = self._minus_eig
        return u.T @ self.l_plus @ u

    def _kernel_clamp(self, a: float) -> float:
        """Roundoff floor for eigenvalues of (L-+a^2)(L++a^2).

        Product eigenvalues above -clamp are treated as the kernel; the
        scale is a crude norm bound for the product itself.
        """
        s_max = float(self._minus_eig[0][-1])
        nl_gap = (self.ground.p - 1) * float(
            np.max(np.abs(self.ground.phi) ** (self.ground.p - 1))
        )
        bound = (s_max + a * a) * (s_max + a * a + nl_gap)
        return 32.0 * np.finfo(float).eps * max(1.0, bound)

    @cached_property
    def internal(self) -> tuple[float, NDArray[np.float64]]:
        """(lambda_omega, psi_omega): the unique negative mode of L+.

        Raises:
            SpectralAssumptionViolated: if L+ does not have exactly one
                simple negative eigenvalue (the second one must clear +1e-8).
        """
        w, v = sla.eigh(self.l_plus, subset_by_index=(0, 1))
        if w[0] >= -_NEG_TOL:
            raise SpectralAssumptionViolated(
                f"L+ has no negative eigenvalue (lowest {w[0]:.3e})"
            )
        if w[1] <= _NEG_TOL:
            raise SpectralAssumptionViolated(
                f"L+ second eigenvalue {w[1]:.3e} is not safely positive"
            )
        psi = v[:, 0] / np.sqrt(self.grid.spacing)
        if psi[np.argmax(np.abs(psi))] < 0:
            psi = -psi
        return float(-w[0]), psi


@dataclass(frozen=True)
class TransverseSpectrum:
    """Per-period transverse stability summary.

    mode_table rows are (n, a = n/L, mu(a)); mu_star is the largest rate,
    and unstable_count counts eigenvalues with multiplicity (modes +-n).
    """

    lambda_omega: float
    psi_omega: NDArray[np.float64]
    critical_period: float
    period: float
    mode_table: tuple[tuple[int, float, float], ...]
    mu_star: float
    mu_curve: tuple[tuple[float, float], ...] = field(default=())

    @property
    def unstable_count(self) -> int:
        return sum(2 for n, _, mu in self.mode_table if n >= 1 and mu > 0) + sum(
            1 for n, _, mu in self.mode_table if n == 0 and mu > 0
        )

    @property
    def verdict(self) -> str:
        return "stable" if self.mu_star <= 1e-6 else "unstable"


def assemble(gs: GroundState, spec: PotentialSpec) -> OperatorAssembly:
    """Build dense L+ and L- for a converged state.

    Raises:
        ValueError: if the state's residual is too large to trust (>= 1e-8).
        ModelError: if L- fails the structural checks (phi not in its
            numerical kernel, or a negative eigenvalue below -1e-8).
    """
    if gs.residual >= 1e-8:
        raise ValueError(f"ground-state residual {gs.residual:.3e} too large")
    grid = gs.grid
    vx = eval_potential(spec, grid)
    nl = np.abs(gs.phi) ** (gs.p - 1)
    base = -grid.second_derivative_matrix
    l_plus = base + np.diag(gs.omega + vx - gs.p * nl)
    l_minus = base + np.diag(gs.omega + vx - nl)
    asm = OperatorAssembly(ground=gs, l_plus=l_plus, l_minus=l_minus)

    kernel_res = np.sqrt(grid.spacing) * float(np.linalg.norm(l_minus @ gs.phi))
    scale = max(1.0, float(np.max(np.abs(gs.phi))))
    if kernel_res > 1e-8 * scale * max(1.0, float(np.linalg.norm(l_minus, np.inf))):
        raise ModelError(f"phi is not in the kernel of L-: residual {kernel_res:.3e}")
    if asm._minus_eig[0][0] < -_NEG_TOL:
        raise ModelError(f"L- has a negative eigenvalue {asm._minus_eig[0][0]:.3e}")
    return asm


def internal_mode(asm: OperatorAssembly) -> tuple[float, NDArray[np.float64]]:
    """Depth and profile of the single negative mode of L+."""
    return asm.internal


def transverse_growth(asm: OperatorAssembly, a: float) -> float:
    """Growth rate mu(a) via the symmetric square-root form.

    Eigenvalues of the congruent product within roundoff of zero (relative
    to the product's norm) count as the kernel, so stable modes return
    exactly 0.0.

    Raises:
        ModelError: if L- + a^2 has an eigenvalue below -1e-8.
    """
    s, _ = asm._minus_eig
    shifted = s + a * a
    if shifted[0] < -_NEG_TOL:
        raise ModelError(f"L- + a^2 has eigenvalue {shifted[0]:.3e}")
    root = np.sqrt(np.maximum(shifted, 0.0))
    n = root.size
    sym = root[:, None] * (asm._plus_rotated + (a * a) * np.eye(n)) * root[None, :]
    sym = 0.5 * (sym + sym.T)
    lam_min = float(sla.eigh(sym, subset_by_index=(0, 0), eigvals_only=True)[0])
    if lam_min >= -asm._kernel_clamp(a):
        return 0.0
    return math.sqrt(-lam_min)


def transverse_growth_direct(asm: OperatorAssembly, a: float) -> float:
    """Cross-check: mu(a) from the non-symmetric product eigensolve.

    Complex eigenvalue pairs (possible only through roundoff) are ignored;
    the most negative real eigenvalue defines mu.
    """
    n = asm.grid.n
    eye = np.eye(n)
    product = (asm.l_minus + a * a * eye) @ (asm.l_plus + a * a * eye)
    ev = np.linalg.eigvals(product)
    real = ev.real[np.abs(ev.imag) <= 1e-9 * np.maximum(1.0, np.abs(ev.real))]
    lam_min = float(np.min(real))
    if lam_min >= -asm._kernel_clamp(a):
        return 0.0
    return math.sqrt(-lam_min)


def growth_curve(asm: OperatorAssembly, a_values) -> tuple[tuple[float, float], ...]:
    """Sampled (a, mu(a)) pairs."""
    return tuple((float(a), transverse_growth(asm, float(a))) for a in a_values)


def critical_wavenumber(asm: OperatorAssembly, rel_tol: float = 1e-4) -> float:
    """Edge of the positive support of mu by bisection.

    Brackets sqrt(lambda_omega) and bisects the predicate mu(a) > 0 to a
    relative width rel_tol.
    """
    lam, _ = asm.internal
    root = math.sqrt(lam)
    lo, hi = 0.9 * root, 1.1 * root
    if transverse_growth(asm, lo) <= 0 or transverse_growth(asm, hi) > 0:
        lo, hi = 0.5 * root, 2.0 * root
        if transverse_growth(asm, lo) <= 0 or transverse_growth(asm, hi) > 0:
            raise ModelError("could not bracket the growth-support edge")
    while hi - lo > rel_tol * root:
        mid = 0.5 * (lo + hi)
        if transverse_growth(asm, mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def spectrum_for_period(
    asm: OperatorAssembly,
    period: float,
    n_max: int | None = None,
    curve_samples: int = 0,
) -> TransverseSpectrum:
    """Evaluate mu over the integer modes of the torus of scale ``period``.

    n_max defaults to ceil(L*sqrt(lambda_omega)) + 2 and must cover at least
    ceil(L*sqrt(lambda_omega)) + 1 so the whole unstable band is inspected.
    curve_samples > 0 additionally samples mu on a uniform a-grid up to
    1.2*sqrt(lambda_omega) for plotting or crossing studies.
    """
    if not period > 0:
        raise ValueError(f"period must be positive, got {period}")
    lam, _ = asm.internal
    required = math.ceil(period * math.sqrt(lam)) + 1
    if n_max is None:
        n_max = required + 1
    if n_max < required:
        raise ValueError(f"n_max={n_max} misses modes up to {required}")
    table = []
    for n in range(n_max + 1):
        a = n / period
        table.append((n, a, transverse_growth(asm, a)))
    curve: tuple[tuple[float, float], ...] = ()
    if curve_samples > 0:
        a_grid = np.linspace(0.0, 1.2 * math.sqrt(lam), curve_samples)
        curve = growth_curve(asm, a_grid)
    mu_star = max(mu for _, _, mu in table)
    out = TransverseSpectrum(
        lambda_omega=lam,
        psi_omega=asm.internal[1],
        critical_period=lam**-0.5,
        period=float(period),
        mode_table=tuple(table),
        mu_star=mu_star,
        mu_curve=curve,
    )
    bound = 1 + 2 * period * math.sqrt(lam)
    if out.unstable_count > bound:
        raise ModelError(
            f"unstable count {out.unstable_count} exceeds the bound {bound:.3f}"
        )
    return out


def coercivity_check(asm: OperatorAssembly) -> float:
    """Smallest eigenvalue of L+ restricted to the complement of phi.

    Builds an orthonormal basis of {phi}^perp by one Householder reflection
    and solves the reduced dense symmetric problem. Positive output verifies
    the coercivity property that makes the constrained energy a Lyapunov
    functional.
    """
    phi_hat = asm.ground.phi / np.linalg.norm(asm.ground.phi)
    v = phi_hat.copy()
    v[0] += 1.0 if v[0] >= 0 else -1.0
    v /= np.linalg.norm(v)
    reflector = np.eye(asm.grid.n) - 2.0 * np.outer(v, v)
    basis = reflector[:, 1:]
    reduced = basis.T @ asm.l_plus @ basis
    return float(sla.eigh(reduced, subset_by_index=(0, 0), eigvals_only=True)[0])
