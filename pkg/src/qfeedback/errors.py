"""Exception hierarchy shared by all qfeedback modules.

Exit-code mapping used by the CLI: usage errors exit 2 (argparse),
ParameterDomainError and its relatives exit 3, AccuracyError exits 4.
"""


class QFeedbackError(Exception):
    """Base class for all errors raised by this package."""


class InvalidOperatorError(QFeedbackError):
    """Matrix fails a structural requirement (non-Hermitian, bad axis, ...)."""


class InvalidStateError(QFeedbackError):
    """Density matrix or Bloch vector violates a state invariant."""


class ParameterDomainError(QFeedbackError):
    """Physical parameter outside its admissible domain."""


class AccuracyError(QFeedbackError):
    """Numerical result failed an internal accuracy estimate."""


class DegenerateSteadyStateError(QFeedbackError):
    """Generator has a non-unique steady state."""

    def __init__(self, null_dim, msg=None):
        self.null_dim = null_dim
        super().__init__(msg or f"steady state not unique (null-space dimension {null_dim})")


class RemovableSingularityError(QFeedbackError):
    """Closed form hits a removable singularity; use the ODE path instead."""


class NearPureStateError(QFeedbackError):
    """Determinant too small for the explicit qubit QFI formula."""


class DegeneratePerturbationError(QFeedbackError):
    """Degenerate eigenvalues with a coupling off-diagonal perturbation."""


class ImpossibleJumpError(QFeedbackError):
    """Jump superoperator applied to a state with vanishing jump probability."""


class UninformativeMeasurementError(QFeedbackError):
    """Cramer-Rao bound requested for non-positive Fisher information."""


class EmptyEnsembleError(QFeedbackError):
    """Ensemble average of zero trajectories."""


class GridMismatchError(QFeedbackError):
    """Trajectory records do not share a common time grid."""
