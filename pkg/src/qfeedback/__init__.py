"""Monitored-qubit feedback dynamics and detection-efficiency estimation.

Simulates a single qubit under Markovian homodyne-based feedback with
inefficient detection, computes the quantum Fisher information of the
detection efficiency, validates the numerics against exact solutions, and
reproduces the associated parameter sweeps as CSV tables and figures.
"""

from .qubit import pauli_self_test as _pauli_self_test

__version__ = "0.1.0"

# Cheap corruption guard: the Pauli algebra must hold before anything else runs.
_pauli_self_test()

from .dynamics import (  # noqa: E402
    EvolutionResult,
    FeedbackSpec,
    General,
    IdentityScaled,
    ModelParams,
    XYPlane,
    ZAxis,
    dissipator,
    effective_damping,
    evolve,
    rhs,
    steady_state,
)
from .qfi import (  # noqa: E402
    QfiResult,
    cramer_rao_bound,
    drho_deta,
    qfi_qubit,
    qfi_spectral,
    sld,
)
from .qubit import (  # noqa: E402
    BlochVector,
    DensityMatrix,
    HermitianOp,
    eig2,
    from_bloch,
    make_state,
    realize,
    to_bloch,
    validate,
)
from .sweep import (  # noqa: E402
    QfiSeries,
    SweepSpec,
    SweepTable,
    detect_balance,
    max_qfi_over_time,
    optimize_feedback,
    qfi_curve,
    sweep_grid,
)
from .trajectories import (  # noqa: E402
    TrajectoryConfig,
    TrajectoryRecord,
    ensemble_mean,
    homodyne_ensemble,
    homodyne_trajectory,
    jump_trajectory,
    superop_g,
    superop_h,
)
