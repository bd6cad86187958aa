import numpy as np
import pytest

from nlslab.errors import NonConvergence, TrivialSolution
from nlslab.grid import Grid1D, l2_norm
from nlslab.groundstate import (
    asymptotic_seed,
    continue_in_omega,
    d_omega_phi,
    solve_ground,
    solve_ground_asymptotic,
)
from nlslab.potential import PotentialSpec, linear_ground


@pytest.fixture
def grid():
    return Grid1D(n=512, half_width=16.0)


@pytest.fixture
def spec():
    return PotentialSpec.poschl_teller(2.0)


def test_asymptotic_seed_cubic(spec, grid):
    # depth-2 well: lambda*=1, psi*=sech/sqrt(2), int psi*^4 = 1/3,
    # so the cubic seed is sqrt(3 x) psi*
    lg = linear_ground(spec, grid)
    x = 0.01
    seed = asymptotic_seed(lg, 1.0 + x, 3.0)
    exact = np.sqrt(3 * x) / np.sqrt(2) / np.cosh(grid.nodes)
    assert np.max(np.abs(seed - exact)) < 1e-7
    with pytest.raises(ValueError):
        asymptotic_seed(lg, lg.lambda_star, 3.0)
    with pytest.raises(ValueError):
        asymptotic_seed(lg, 1.1, 1.0)


def test_solve_ground_properties(spec, grid):
    gs = solve_ground_asymptotic(spec, 1.01, 3.0, grid)
    assert gs.residual < 1e-11
    assert np.min(gs.phi) > 0
    assert np.allclose(gs.phi, gs.phi[grid.reflection_indices()], atol=0)
    assert gs.seed_error < 1e-2
    assert gs.q1 == pytest.approx(0.5 * grid.spacing * np.sum(gs.phi**2))
    # explicit seeding gives the identical state
    lg = linear_ground(spec, grid)
    again = solve_ground(asymptotic_seed(lg, 1.01, 3.0), spec, 1.01, 3.0, grid)
    assert np.array_equal(again.phi, gs.phi)


def test_solve_ground_guards(spec, grid):
    lg = linear_ground(spec, grid)
    seed = asymptotic_seed(lg, 1.01, 3.0)
    with pytest.raises(ValueError, match="p must be"):
        solve_ground(seed, spec, 1.01, 1.5, grid)
    with pytest.raises(ValueError, match="omega"):
        solve_ground(seed, spec, 0.5, 3.0, grid)
    with pytest.raises(TrivialSolution):
        solve_ground(np.zeros(grid.n), spec, 1.01, 3.0, grid)
    with pytest.raises(NonConvergence):
        solve_ground(seed, spec, 1.01, 3.0, grid, tol=0.0)


def test_continuation_monotone(spec, grid):
    omegas = [1.01, 1.02, 1.05, 1.1]
    states = continue_in_omega(spec, 3.0, omegas, grid)
    assert [s.omega for s in states] == omegas
    q = [s.q1 for s in states]
    assert all(b > a for a, b in zip(q, q[1:]))
    amp = [float(np.max(s.phi)) for s in states]
    assert all(b > a for a, b in zip(amp, amp[1:]))
    with pytest.raises(ValueError, match="ascending"):
        continue_in_omega(spec, 3.0, [1.05, 1.01], grid)


def test_seed_error_shrinks_with_x(spec, grid):
    errs = [solve_ground_asymptotic(spec, 1.0 + x, 3.0, grid).seed_error for x in (0.04, 0.01)]
    # remainder scales like x^{3/2}: quartering x cuts the error ~8x
    ratio = errs[0] / errs[1]
    assert 6.0 < ratio < 10.0


def test_d_omega_phi(spec, grid):
    x = 0.01
    dphi = d_omega_phi(spec, 3.0, 1.0 + x, grid)
    lg = linear_ground(spec, grid)
    leading = np.sqrt(3.0) / (2.0 * np.sqrt(x)) * lg.psi_star
    rel = l2_norm(dphi - leading, grid) / l2_norm(leading, grid)
    assert rel < 0.02
    with pytest.raises(ValueError, match="delta"):
        d_omega_phi(spec, 3.0, 1.0 + x, grid, delta=x)
