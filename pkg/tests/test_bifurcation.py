import math

import numpy as np
import pytest
import scipy.linalg as sla

from nlslab.errors import BranchLost
from nlslab.bifurcation import (
    PSTAR_LEADING,
    aux_projections,
    branch_continue,
    dlambda_domega,
    find_pstar,
    leading_coefficient,
    omega_pp0,
    omega_pp0_direct,
    r_coefficient,
    second_order_integral,
)
from nlslab.grid import Grid1D
from nlslab.potential import PotentialSpec, eval_potential, linear_ground


@pytest.fixture(scope="module")
def spec():
    return PotentialSpec.poschl_teller(2.0)


@pytest.fixture(scope="module")
def grid512():
    return Grid1D(n=512, half_width=16.0)


@pytest.fixture(scope="module")
def grid256():
    return Grid1D(n=256, half_width=16.0)


@pytest.fixture(scope="module")
def grid128():
    return Grid1D(n=128, half_width=16.0)


def test_leading_coefficient_closed_forms():
    assert leading_coefficient(2.0) == pytest.approx(14.0 * math.pi / 3.0, rel=1e-14)
    assert leading_coefficient(3.0) == pytest.approx(math.sqrt(2.0) * math.pi, rel=1e-14)
    assert leading_coefficient(5.0) == pytest.approx(-2.0 * math.pi / 3.0, rel=1e-14)
    assert leading_coefficient(PSTAR_LEADING) == pytest.approx(0.0, abs=1e-12)
    assert leading_coefficient(4.0) > 0 > leading_coefficient(4.2)
    with pytest.raises(ValueError):
        leading_coefficient(1.0)


def test_aux_projections_anchor(spec, grid512):
    lg = linear_ground(spec, grid512)
    aux = aux_projections(lg, 3.0)
    h = grid512.spacing
    # orthogonality and the defining equation, checked directly
    assert abs(h * np.sum(aux.correction * lg.psi_star)) < 1e-10
    shifted = -grid512.second_derivative_matrix + np.diag(
        eval_potential(spec, grid512) + lg.lambda_star
    )
    norm4 = h * np.sum(lg.psi_star**4)
    rhs = lg.psi_star**3 / norm4 - lg.psi_star
    res = shifted @ aux.correction - rhs
    assert math.sqrt(h) * np.linalg.norm(res) < 1e-8
    # depth-2 closed forms
    assert aux.integral == pytest.approx(1.0 / 36.0, abs=1e-9)
    assert aux.feedback == pytest.approx(1.0 / 12.0, abs=1e-9)
    with pytest.raises(ValueError):
        aux_projections(lg, 1.0)


def _fd_second_order_integral(n: int, half_width: float = 16.0) -> float:
    """Same projection by an unrelated route: 3-point FD operator and its
    own numeric ground state, O(h^2) accurate."""
    g = Grid1D(n=n, half_width=half_width)
    h = g.spacing
    ham = (
        np.diag(np.full(n, 2.0))
        + np.diag(np.full(n - 1, -1.0), 1)
        + np.diag(np.full(n - 1, -1.0), -1)
    ) / h**2
    ham[0, -1] = ham[-1, 0] = -1.0 / h**2
    ham += np.diag(-2.0 / np.cosh(g.nodes) ** 2)
    w, v = sla.eigh(ham, subset_by_index=(0, 0))
    psi = v[:, 0] / math.sqrt(h)
    if psi[np.argmax(np.abs(psi))] < 0:
        psi = -psi
    shifted = ham - w[0] * np.eye(n)
    rhs = psi**3 / (h * np.sum(psi**4)) - psi
    unit = psi * math.sqrt(h)
    deflated = shifted + np.outer(unit, unit)
    rhs = rhs - unit * (unit @ rhs)
    gvec = np.linalg.solve(deflated, rhs)
    gvec = gvec - unit * (unit @ gvec)
    return float(h * np.sum(psi**3 * gvec))


def test_second_order_integral_fd_oracle(spec, grid512):
    coarse = _fd_second_order_integral(256)
    fine = _fd_second_order_integral(512)
    target = 1.0 / 36.0
    ratio = (coarse - target) / (fine - target)
    assert 3.5 < ratio < 4.5
    richardson = (4.0 * fine - coarse) / 3.0
    assert richardson == pytest.approx(target, abs=1e-6)
    lg = linear_ground(spec, grid512)
    assert second_order_integral(lg, 3.0) == pytest.approx(target, abs=1e-9)


def test_internal_depth_expansion(spec, grid256):
    # lambda_omega/x = (p-1) + p(p-1)J x + ...; J = 1/12 here, so slope 1/2
    from nlslab.groundstate import solve_ground_asymptotic
    from nlslab.linearized import assemble, internal_mode

    xs = (0.02, 0.04)
    ratios = []
    for x in xs:
        gs = solve_ground_asymptotic(spec, 1.0 + x, 3.0, grid256)
        lam, _ = internal_mode(assemble(gs, spec))
        ratios.append(lam / x)
    slope = (ratios[1] - ratios[0]) / (xs[1] - xs[0])
    assert slope == pytest.approx(0.5, rel=0.1)


def test_dlambda_domega(spec, grid256):
    dlam = dlambda_domega(spec, 3.0, 1.01, grid256)
    assert dlam == pytest.approx(2.0, rel=0.01)
    with pytest.raises(ValueError, match="delta"):
        dlambda_domega(spec, 3.0, 1.01, grid256, delta=0.002)
    with pytest.raises(ValueError, match="omega0"):
        dlambda_domega(spec, 3.0, 0.9, grid256)


def test_omega_pp_small_x_limit(spec, grid512):
    assert omega_pp0(spec, 3.0, 1.001, grid512) == pytest.approx(1.0, abs=0.01)


def test_omega_pp_direct_route(spec, grid128):
    reduced = omega_pp0(spec, 3.0, 1.01, grid128)
    direct = omega_pp0_direct(spec, 3.0, 1.01, grid128, ny=8)
    assert direct == pytest.approx(reduced, rel=0.01)
    with pytest.raises(ValueError, match="ny"):
        omega_pp0_direct(spec, 3.0, 1.01, grid128, ny=7)
    with pytest.raises(ValueError, match="ny"):
        omega_pp0_direct(spec, 3.0, 1.01, grid128, ny=4)
    with pytest.raises(ValueError, match="dense"):
        omega_pp0_direct(spec, 3.0, 1.01, Grid1D(n=1024, half_width=16.0), ny=8)


def test_r_report(spec, grid256):
    report = r_coefficient(spec, 3.0, 1.01, grid256)
    assert report.lambda_omega == pytest.approx(0.02, rel=0.02)
    assert report.critical_period == pytest.approx(report.lambda_omega**-0.5, rel=1e-15)
    assert report.dlambda_domega == pytest.approx(2.0, rel=0.01)
    assert report.r_scaled == pytest.approx(report.r_coefficient * 0.1, rel=1e-6)
    assert report.r_scaled == pytest.approx(math.sqrt(2.0) * math.pi, rel=0.05)
    assert report.verdict == "stable"
    payload = report.as_dict()
    assert payload["verdict"] == "stable"
    assert payload["omega_pp0"] == report.omega_pp0


def test_find_pstar(spec, grid128):
    with pytest.raises(ValueError, match="ordered"):
        find_pstar(spec, grid128, bracket=(4.3, 4.0))
    with pytest.raises(ValueError, match="sign"):
        find_pstar(spec, grid128, bracket=(4.5, 5.0))
    pstar = find_pstar(spec, grid128, tol=0.02)
    assert pstar == pytest.approx(PSTAR_LEADING, abs=0.07)


def test_branch_guards(spec, grid128):
    with pytest.raises(ValueError, match="amplitudes"):
        branch_continue(spec, 3.0, 1.01, grid128, [], ny=8)
    with pytest.raises(ValueError, match="amplitudes"):
        branch_continue(spec, 3.0, 1.01, grid128, [0.0, 0.1], ny=8)
    with pytest.raises(ValueError, match="amplitudes"):
        branch_continue(spec, 3.0, 1.01, grid128, [0.2, 0.1], ny=8)
    with pytest.raises(BranchLost):
        branch_continue(spec, 3.0, 1.01, grid128, [0.05], ny=8, max_iter=1)


def test_branch_points(spec, grid128):
    pts = branch_continue(spec, 3.0, 1.01, grid128, [0.015, 0.03], ny=16)
    assert [p.amplitude for p in pts] == [0.015, 0.03]
    assert pts[0].profile.shape == (128, 16)
    # curvature: omega grows quadratically in the amplitude
    d1 = pts[0].omega - 1.01
    d2 = pts[1].omega - 1.01
    assert d1 > 0
    assert d2 / d1 == pytest.approx(4.0, rel=0.15)
    assert pts[1].norm2 > pts[0].norm2 > 0
    # even-even symmetry of the profile
    u = pts[1].profile
    rx = (-np.arange(128)) % 128
    ry = (-np.arange(16)) % 16
    assert np.allclose(u, u[rx][:, ry], atol=1e-11)
    # the neutral mode reopens quadratically as well
    assert pts[0].lambda2 > 0
    assert pts[1].lambda2 / pts[0].lambda2 == pytest.approx(4.0, rel=0.2)
