"""Line potentials V(x) and the ground state of -d2/dx2 + V.

Supported families:

* ``poschl_teller``: V(x) = -depth / cosh(x)^2.
* ``gaussian``: V(x) = amplitude * exp(-(x/width)^2).
* ``tabulated``: linear interpolation of (x, V) samples, e.g. from a CSV
  file with two columns.

Every potential must be even (possibly about a grid node other than 0 for
tabulated data, so that translated copies of a well remain valid) and must
have decayed below 1e-8 at the grid boundary; the associated Schroedinger
operator must have at least one negative eigenvalue.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
from numpy.typing import NDArray

from .errors import NoBoundState
from .grid import Grid1D

DECAY_TOL = 1e-8
_EVEN_RTOL = 1e-9


@dataclass(frozen=True)
class PotentialSpec:
    """Declarative description of a potential family.

    Use the classmethod constructors; the raw dataclass fields exist so the
    spec is hashable (and therefore cacheable) and JSON-serializable.
    """

    family: str
    depth: float | None = None
    amplitude: float | None = None
    width: float | None = None
    samples: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self) -> None:
        if self.family == "poschl_teller":
            if self.depth is None or not self.depth > 0:
                raise ValueError("poschl_teller requires depth > 0")
        elif self.family == "gaussian":
            if self.amplitude is None or self.width is None or not self.width > 0:
                raise ValueError("gaussian requires amplitude and width > 0")
        elif self.family == "tabulated":
            if not self.samples:
                raise ValueError("tabulated requires samples")
            xs = np.array([s[0] for s in self.samples])
            if np.any(np.diff(xs) <= 0):
                raise ValueError("tabulated sample abscissae must be strictly increasing")
            _check_even_table(np.array([s[1] for s in self.samples]))
        else:
            raise ValueError(f"unknown family {self.family!r}")

    @classmethod
    def poschl_teller(cls, depth: float) -> "PotentialSpec":
        return cls(family="poschl_teller", depth=float(depth))

    @classmethod
    def gaussian(cls, amplitude: float, width: float) -> "PotentialSpec":
        return cls(family="gaussian", amplitude=float(amplitude), width=float(width))

    @classmethod
    def tabulated(cls, xs, vs) -> "PotentialSpec":
        pairs = tuple((float(a), float(b)) for a, b in zip(xs, vs, strict=True))
        return cls(family="tabulated", samples=pairs)

    @classmethod
    def from_csv(cls, path) -> "PotentialSpec":
        xs, vs = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                xs.append(float(row[0]))
                vs.append(float(row[1]))
        return cls.tabulated(xs, vs)

    def to_json(self) -> str:
        payload: dict = {"family": self.family}
        if self.family == "poschl_teller":
            payload["depth"] = self.depth
        elif self.family == "gaussian":
            payload["amplitude"] = self.amplitude
            payload["width"] = self.width
        else:
            payload["samples"] = [list(s) for s in self.samples]
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PotentialSpec":
        payload = json.loads(text)
        family = payload.pop("family")
        if family == "tabulated":
            samples = payload["samples"]
            return cls.tabulated([s[0] for s in samples], [s[1] for s in samples])
        return cls(family=family, **payload)

    def evaluate(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        if self.family == "poschl_teller":
            return -self.depth / np.cosh(x) ** 2
        if self.family == "gaussian":
            return self.amplitude * np.exp(-((x / self.width) ** 2))
        xs = np.array([s[0] for s in self.samples])
        vs = np.array([s[1] for s in self.samples])
        if np.min(x) < xs[0] or np.max(x) > xs[-1]:
            raise ValueError(
                f"tabulated range [{xs[0]}, {xs[-1]}] does not cover requested "
                f"[{np.min(x)}, {np.max(x)}]"
            )
        return np.interp(x, xs, vs)


def _check_even_table(vs: NDArray[np.float64]) -> None:
    """Accept tables even about some sample index (translated wells included)."""
    n = vs.size
    scale = max(1.0, float(np.max(np.abs(vs))))
    idx = np.arange(n)
    for c in range(n):
        if np.allclose(vs[(c + idx) % n], vs[(c - idx) % n], rtol=0, atol=_EVEN_RTOL * scale):
            return
    raise ValueError("tabulated potential is not even about any sample")


def eval_potential(spec: PotentialSpec, grid: Grid1D) -> NDArray[np.float64]:
    """Sample V on the grid nodes."""
    return spec.evaluate(grid.nodes)


def check_decay(spec: PotentialSpec, grid: Grid1D) -> float:
    """Max |V| at the domain boundary; must be < DECAY_TOL for valid use."""
    x = grid.half_width
    return float(np.max(np.abs(spec.evaluate(np.array([-x, x - grid.spacing])))))


@dataclass(frozen=True)
class LinearGround:
    """Lowest eigenpair of H0 = -d2/dx2 + V.

    Attributes:
        lambda_star: -e0 > 0, the depth of the lowest eigenvalue.
        psi_star: L2-normalized positive eigenfunction samples.
        gap: e1 - e0, distance to the next eigenvalue.
        grid: Grid the eigenpair lives on.
        spec: Potential that generated it.
    """

    lambda_star: float
    psi_star: NDArray[np.float64]
    gap: float
    grid: Grid1D
    spec: PotentialSpec


@lru_cache(maxsize=64)
def linear_ground(spec: PotentialSpec, grid: Grid1D) -> LinearGround:
    """Solve the linear ground-state problem by a dense symmetric eigensolve.

    Raises:
        NoBoundState: if the lowest eigenvalue is not negative.
        ValueError: if V has not decayed at the boundary.
    """
    boundary = check_decay(spec, grid)
    if boundary >= DECAY_TOL:
        raise ValueError(f"potential has not decayed at the boundary: |V| = {boundary:.3e}")
    vx = eval_potential(spec, grid)
    ham = -grid.second_derivative_matrix + np.diag(vx)
    w, v = sla.eigh(ham, subset_by_index=(0, 1))
    if w[0] >= 0:
        raise NoBoundState(f"lowest eigenvalue {w[0]:.6e} is not negative")
    psi = v[:, 0] / np.sqrt(grid.spacing)
    if psi[np.argmax(np.abs(psi))] < 0:
        psi = -psi
    return LinearGround(
        lambda_star=float(-w[0]),
        psi_star=psi,
        gap=float(w[1] - w[0]),
        grid=grid,
        spec=spec,
    )
