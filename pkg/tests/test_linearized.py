import dataclasses
import math

import numpy as np
import pytest

from nlslab.errors import ModelError, SpectralAssumptionViolated
from nlslab.grid import Grid1D
from nlslab.groundstate import solve_ground_asymptotic
from nlslab.linearized import (
    OperatorAssembly,
    assemble,
    coercivity_check,
    critical_wavenumber,
    internal_mode,
    spectrum_for_period,
    transverse_growth,
    transverse_growth_direct,
)
from nlslab.potential import PotentialSpec


@pytest.fixture(scope="module")
def grid():
    return Grid1D(n=256, half_width=16.0)


@pytest.fixture(scope="module")
def spec():
    return PotentialSpec.poschl_teller(2.0)


@pytest.fixture(scope="module")
def asm(spec, grid):
    gs = solve_ground_asymptotic(spec, 1.02, 3.0, grid)
    return assemble(gs, spec)


def test_assemble_structure(asm, grid):
    # phi spans the kernel of L-
    res = np.sqrt(grid.spacing) * np.linalg.norm(asm.l_minus @ asm.ground.phi)
    assert res < 1e-9
    assert np.allclose(asm.l_plus, asm.l_plus.T)
    # the diagonal rides on the O(h^-2) spectral stencil, so the comparison
    # is only good to the ulp of that scale
    nl = asm.ground.p * np.abs(asm.ground.phi) ** (asm.ground.p - 1)
    gap = asm.l_minus - asm.l_plus
    assert np.allclose(np.diag(gap), nl - np.abs(asm.ground.phi) ** 2, atol=1e-12)


def test_assemble_guards(asm, spec):
    sloppy = dataclasses.replace(asm.ground, residual=1e-6)
    with pytest.raises(ValueError, match="residual"):
        assemble(sloppy, spec)
    with pytest.raises(ModelError, match="kernel"):
        assemble(asm.ground, PotentialSpec.poschl_teller(6.0))


def test_internal_mode(asm, grid):
    lam, psi = internal_mode(asm)
    # leading order: lambda_omega = (p-1)(omega - lambda*)
    assert lam == pytest.approx(0.04, rel=2e-2)
    assert grid.spacing * np.sum(psi**2) == pytest.approx(1.0, rel=1e-12)
    assert np.allclose(psi, psi[grid.reflection_indices()], atol=1e-9)


def test_internal_mode_requires_single_negative(asm):
    flat = OperatorAssembly(ground=asm.ground, l_plus=np.eye(asm.grid.n), l_minus=asm.l_minus)
    with pytest.raises(SpectralAssumptionViolated, match="no negative"):
        _ = flat.internal
    double = OperatorAssembly(
        ground=asm.ground,
        l_plus=np.diag(np.concatenate([[-1.0, -0.5], np.ones(asm.grid.n - 2)])),
        l_minus=asm.l_minus,
    )
    with pytest.raises(SpectralAssumptionViolated, match="second"):
        _ = double.internal


def test_growth_band(asm):
    lam, _ = internal_mode(asm)
    edge = math.sqrt(lam)
    assert transverse_growth(asm, 0.0) == 0.0
    assert transverse_growth(asm, 0.5 * edge) > 0.0
    for factor in (1.1, 1.5, 2.0):
        assert transverse_growth(asm, factor * edge) == 0.0
    a0 = critical_wavenumber(asm)
    assert a0 == pytest.approx(edge, rel=5e-3)


def test_growth_routes_agree(asm):
    lam, _ = internal_mode(asm)
    for a in (0.3 * math.sqrt(lam), 0.7 * math.sqrt(lam), 1.4 * math.sqrt(lam)):
        sym = transverse_growth(asm, a)
        direct = transverse_growth_direct(asm, a)
        assert direct == pytest.approx(sym, abs=1e-6)


def test_growth_rejects_indefinite_l_minus(asm):
    broken = OperatorAssembly(
        ground=asm.ground, l_plus=asm.l_plus, l_minus=-np.eye(asm.grid.n)
    )
    with pytest.raises(ModelError):
        transverse_growth(broken, 0.0)


def test_spectrum_verdicts(asm):
    lam, _ = internal_mode(asm)
    lc = lam**-0.5
    stable = spectrum_for_period(asm, 0.8 * lc)
    assert stable.verdict == "stable"
    assert stable.mu_star == 0.0
    assert stable.unstable_count == 0
    assert stable.critical_period == pytest.approx(lc)

    unstable = spectrum_for_period(asm, 1.25 * lc)
    assert unstable.verdict == "unstable"
    assert unstable.mu_star > 0.0
    assert unstable.unstable_count == 2
    assert unstable.mode_table[0][2] == 0.0
    assert unstable.mode_table[1][2] == unstable.mu_star


def test_spectrum_mode_count(asm):
    lam, _ = internal_mode(asm)
    wide = spectrum_for_period(asm, 3.0 * lam**-0.5)
    # modes n=1,2 sit inside the band (0, sqrt(lambda)); each counts twice
    assert wide.unstable_count == 4
    assert wide.unstable_count <= 1 + 2 * wide.period * math.sqrt(lam)


def test_spectrum_guards_and_curve(asm):
    with pytest.raises(ValueError, match="period"):
        spectrum_for_period(asm, 0.0)
    with pytest.raises(ValueError, match="n_max"):
        spectrum_for_period(asm, 2.0, n_max=0)
    lam, _ = internal_mode(asm)
    st = spectrum_for_period(asm, 1.25 * lam**-0.5, curve_samples=40)
    assert len(st.mu_curve) == 40
    assert st.mu_curve[0] == (0.0, 0.0)
    assert max(a for a, _ in st.mu_curve) == pytest.approx(1.2 * math.sqrt(lam))


def test_coercivity_on_complement(asm, grid):
    # orthogonal to phi the single negative direction is projected out
    assert coercivity_check(asm) > 0.0
    # constraining along an odd vector leaves the even negative mode intact
    odd = np.sin(np.pi * grid.nodes / grid.half_width) / np.cosh(grid.nodes)
    fake = dataclasses.replace(asm.ground, phi=odd)
    tilted = OperatorAssembly(ground=fake, l_plus=asm.l_plus, l_minus=asm.l_minus)
    lam, _ = internal_mode(asm)
    assert coercivity_check(tilted) == pytest.approx(-lam, rel=1e-9)
