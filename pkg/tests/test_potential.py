import json

import numpy as np
import pytest

from nlslab.errors import NoBoundState
from nlslab.grid import Grid1D
from nlslab.potential import (
    DECAY_TOL,
    PotentialSpec,
    check_decay,
    eval_potential,
    linear_ground,
)


@pytest.fixture
def grid():
    return Grid1D(n=512, half_width=16.0)


def test_family_values():
    x = np.array([0.0, 1.0])
    pt = PotentialSpec.poschl_teller(2.0)
    assert pt.evaluate(x)[0] == pytest.approx(-2.0)
    assert pt.evaluate(x)[1] == pytest.approx(-2.0 / np.cosh(1.0) ** 2)
    g = PotentialSpec.gaussian(-1.0, 1.0)
    assert g.evaluate(x)[0] == pytest.approx(-1.0)
    assert g.evaluate(x)[1] == pytest.approx(-np.exp(-1.0))
    # zero amplitude is legal and gives the free line
    assert np.all(PotentialSpec.gaussian(0.0, 1.0).evaluate(x) == 0.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        PotentialSpec.poschl_teller(0.0)
    with pytest.raises(ValueError):
        PotentialSpec.gaussian(-1.0, 0.0)
    with pytest.raises(ValueError):
        PotentialSpec(family="tabulated", samples=())
    with pytest.raises(ValueError, match="increasing"):
        PotentialSpec.tabulated([0.0, 1.0, 1.0], [0.0, -1.0, 0.0])
    with pytest.raises(ValueError, match="even"):
        PotentialSpec.tabulated([-1.0, 0.0, 1.0], [0.0, -1.0, -0.5])
    with pytest.raises(ValueError, match="family"):
        PotentialSpec(family="morse", depth=1.0)


def test_tabulated_interpolation_and_range():
    spec = PotentialSpec.tabulated([-2.0, -1.0, 0.0, 1.0, 2.0], [0.0, -1.0, -2.0, -1.0, 0.0])
    assert spec.evaluate(np.array([0.5]))[0] == pytest.approx(-1.5)
    with pytest.raises(ValueError, match="cover"):
        spec.evaluate(np.array([3.0]))


def test_from_csv(tmp_path):
    path = tmp_path / "well.csv"
    path.write_text("# x, V\n-1.0,0.0\n0.0,-1.0\n1.0,0.0\n")
    spec = PotentialSpec.from_csv(path)
    assert spec.samples == ((-1.0, 0.0), (0.0, -1.0), (1.0, 0.0))


def test_json_roundtrip():
    specs = [
        PotentialSpec.poschl_teller(2.0),
        PotentialSpec.gaussian(-1.0, 1.5),
        PotentialSpec.tabulated([-1.0, 0.0, 1.0], [0.0, -1.0, 0.0]),
    ]
    for spec in specs:
        assert PotentialSpec.from_json(spec.to_json()) == spec
    payload = json.loads(specs[0].to_json())
    assert payload == {"family": "poschl_teller", "depth": 2.0}


def test_linear_ground_depth2(grid):
    lg = linear_ground(PotentialSpec.poschl_teller(2.0), grid)
    assert lg.lambda_star == pytest.approx(1.0, abs=1e-8)
    assert lg.gap > 0
    exact = 1.0 / (np.sqrt(2.0) * np.cosh(grid.nodes))
    # the discrete eigenfunction carries periodic images of size ~e^{-2X}
    assert np.max(np.abs(lg.psi_star - exact)) < 5e-7
    assert grid.spacing * np.sum(lg.psi_star**2) == pytest.approx(1.0, rel=1e-12)
    # repeated calls hit the cache
    assert linear_ground(PotentialSpec.poschl_teller(2.0), grid) is lg


def test_linear_ground_depth6(grid):
    lg = linear_ground(PotentialSpec.poschl_teller(6.0), grid)
    # depth m(m+1) has eigenvalues -(m-j)^2, here m=2: -4 and -1
    assert lg.lambda_star == pytest.approx(4.0, abs=1e-8)
    assert lg.gap == pytest.approx(3.0, abs=1e-7)


def test_linear_ground_translated_table(grid):
    base = eval_potential(PotentialSpec.poschl_teller(2.0), grid)
    shifted = PotentialSpec.tabulated(grid.nodes, np.roll(base, 8))
    lg = linear_ground(shifted, grid)
    assert lg.lambda_star == pytest.approx(1.0, abs=1e-8)
    peak = grid.nodes[np.argmax(lg.psi_star)]
    assert peak == pytest.approx(8 * grid.spacing, abs=grid.spacing / 2)


def test_no_bound_state(grid):
    with pytest.raises(NoBoundState):
        linear_ground(PotentialSpec.gaussian(0.5, 1.0), grid)


def test_decay_guard(grid):
    wide = PotentialSpec.gaussian(-1.0, 30.0)
    assert check_decay(wide, grid) > DECAY_TOL
    with pytest.raises(ValueError, match="decayed"):
        linear_ground(wide, grid)
