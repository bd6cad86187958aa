"""Exception types shared across the package.

Every numerical failure mode gets its own class so callers (and the CLI)
can map outcomes to machine-readable error kinds without string matching.
"""


class NlsLabError(Exception):
    """Base class for all package-specific errors."""

    kind = "error"


class DimensionMismatch(NlsLabError):
    """A field's shape does not match the grid it is used with."""

    kind = "dimension_mismatch"


class ModeOutOfRange(NlsLabError):
    """Requested transverse mode index is not resolved by the grid."""

    kind = "mode_out_of_range"


class NoBoundState(NlsLabError):
    """The linear operator -d2/dx2 + V has no negative eigenvalue."""

    kind = "no_bound_state"


class NonConvergence(NlsLabError):
    """Newton iteration failed to reach the requested residual."""

    kind = "non_convergence"

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class TrivialSolution(NlsLabError):
    """Newton collapsed onto the zero solution."""

    kind = "trivial_solution"


class SpectralAssumptionViolated(NlsLabError):
    """L+ does not have exactly one simple negative eigenvalue."""

    kind = "spectral_assumption_violated"


class ModelError(NlsLabError):
    """An operator violates a structural property it must have (e.g. L- >= 0)."""

    kind = "model_error"


class BranchLost(NlsLabError):
    """Bifurcation-branch Newton failed to converge at some amplitude."""

    kind = "branch_lost"


class BlowupDetected(NlsLabError):
    """The evolved field became non-finite."""

    kind = "blowup_detected"

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t
