"""Qubit linear algebra: Pauli operators, states, closed-form 2x2 eigensolver.

Basis convention (used everywhere in this package): basis order is
(|1>, |0>), i.e. row/column 0 is the excited state, so rho[0, 0] is the
excited-state population rho_11 and the Bloch z component of |1><1| is +1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidOperatorError, InvalidStateError

# Pauli matrices in the (|1>, |0>) basis.
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |0><1|
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)   # |1><0|
IDENTITY = np.eye(2, dtype=complex)

PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

# Tolerances for the state invariants (roughly 100x accumulated eps).
HERM_TOL = 1e-12
TRACE_TOL = 1e-10
EIG_TOL = 1e-10


def dag(m):
    return m.conj().T


def herm_defect(m) -> float:
    """Max elementwise deviation from Hermiticity."""
    return float(np.max(np.abs(m - dag(m))))


def _as_matrix(rho):
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


@dataclass(frozen=True)
class DensityMatrix:
    """Validated 2x2 qubit density matrix.

    Construction checks Hermiticity, unit trace and positivity; ``eig_tol``
    can be loosened (documented at the call site) for states coming out of a
    numerical integrator.
    """

    matrix: np.ndarray

    def __init__(self, matrix, eig_tol: float = EIG_TOL):
        m = np.array(matrix, dtype=complex, copy=True)
        if m.shape != (2, 2) or not np.all(np.isfinite(m.view(float))):
            raise InvalidStateError("density matrix must be a finite 2x2 complex matrix")
        if herm_defect(m) > HERM_TOL:
            raise InvalidStateError(f"not Hermitian: defect {herm_defect(m):.3e}")
        tr = m[0, 0].real + m[1, 1].real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"trace {tr!r} differs from 1 beyond {TRACE_TOL}")
        lo = min(eig2(0.5 * (m + dag(m)))[0])
        if lo < -eig_tol:
            raise InvalidStateError(f"negative eigenvalue {lo:.3e}")
        object.__setattr__(self, "matrix", m)
        self.matrix.setflags(write=False)

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


@dataclass(frozen=True)
class HermitianOp:
    """Hermitian qubit operator in the form eps1*I + eps2*(a . sigma)."""

    eps1: float
    eps2: float
    axis: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        a = np.asarray(self.axis, dtype=float)
        if a.shape != (3,) or not np.all(np.isfinite(a)):
            raise InvalidOperatorError("axis must be a finite 3-vector")
        if self.eps2 != 0.0 and abs(np.linalg.norm(a) - 1.0) > 1e-12:
            raise InvalidOperatorError(f"axis norm {np.linalg.norm(a)!r} is not 1")


@dataclass(frozen=True)
class BlochVector:
    rx: float
    ry: float
    rz: float

    def __post_init__(self):
        r2 = self.rx**2 + self.ry**2 + self.rz**2
        if not np.isfinite(r2) or r2 > 1.0 + 1e-10:
            raise InvalidStateError(f"Bloch vector norm^2 {r2!r} exceeds 1")

    def norm(self) -> float:
        return float(np.sqrt(self.rx**2 + self.ry**2 + self.rz**2))


def make_state(alpha: float) -> DensityMatrix:
    """Pure state cos(alpha)|0> + sin(alpha)|1> as a projector."""
    if not np.isfinite(alpha):
        raise InvalidStateError("alpha must be finite")
    v = np.array([np.sin(alpha), np.cos(alpha)], dtype=complex)
    return DensityMatrix(np.outer(v, v.conj()))


def realize(op: HermitianOp) -> np.ndarray:
    """Matrix eps1*I + eps2*(a_x sx + a_y sy + a_z sz)."""
    ax, ay, az = op.axis
    return op.eps1 * IDENTITY + op.eps2 * (ax * SIGMA_X + ay * SIGMA_Y + az * SIGMA_Z)


def eig2(m):
    """Closed-form eigendecomposition of a Hermitian 2x2 matrix.

    Returns (eigenvalues descending, eigenvectors as columns), with
    m @ v[:, k] = w[k] * v[:, k].  No iterative solver is involved.
    """
    m = np.asarray(m, dtype=complex)
    if herm_defect(m) > 1e-10:
        raise InvalidOperatorError(f"eig2 needs a Hermitian matrix (defect {herm_defect(m):.3e})")
    a = m[0, 0].real
    d = m[1, 1].real
    b = 0.5 * (m[0, 1] + np.conj(m[1, 0]))  # symmetrized off-diagonal
    mean = 0.5 * (a + d)
    half = 0.5 * (a - d)
    rad = np.hypot(half, abs(b))
    w = np.array([mean + rad, mean - rad])
    if rad == 0.0:
        return w, np.eye(2, dtype=complex)
    # Eigenvector for w[0]: pick the numerically larger pivot.
    if half >= 0.0:
        v0 = np.array([half + rad, np.conj(b)], dtype=complex)
    else:
        v0 = np.array([b, rad - half], dtype=complex)
    v0 /= np.linalg.norm(v0)
    v1 = np.array([-np.conj(v0[1]), np.conj(v0[0])], dtype=complex)
    return w, np.column_stack([v0, v1])


def to_bloch(rho) -> BlochVector:
    m = _as_matrix(rho)
    return BlochVector(
        float(np.trace(m @ SIGMA_X).real),
        float(np.trace(m @ SIGMA_Y).real),
        float(np.trace(m @ SIGMA_Z).real),
    )


def from_bloch(b: BlochVector) -> DensityMatrix:
    m = 0.5 * (IDENTITY + b.rx * SIGMA_X + b.ry * SIGMA_Y + b.rz * SIGMA_Z)
    return DensityMatrix(m)


@dataclass(frozen=True)
class StateDiagnostics:
    herm_defect: float
    trace_defect: float
    min_eigenvalue: float

    @property
    def violations(self):
        out = []
        if self.herm_defect > HERM_TOL:
            out.append("hermiticity")
        if self.trace_defect > TRACE_TOL:
            out.append("trace")
        if self.min_eigenvalue < -EIG_TOL:
            out.append("positivity")
        return out

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(rho) -> StateDiagnostics:
    """Diagnostic report on the three density-matrix invariants."""
    m = _as_matrix(rho)
    hd = herm_defect(m)
    td = abs(float(np.trace(m).real) - 1.0) + abs(float(np.trace(m).imag))
    w, _ = eig2(0.5 * (m + dag(m)))
    return StateDiagnostics(hd, td, float(min(w)))


def pauli_self_test(tol: float = 1e-15):
    """Assert the Pauli algebra; returns the worst observed defect.

    Run at import time of the top-level package as a cheap corruption guard.
    """
    worst = 0.0
    for s in PAULIS:
        worst = max(worst, float(np.max(np.abs(s @ s - IDENTITY))))
    worst = max(worst, float(np.max(np.abs(SIGMA_PLUS @ SIGMA_MINUS - np.diag([1, 0])))))
    worst = max(worst, float(np.max(np.abs(
        SIGMA_X @ SIGMA_Y - SIGMA_Y @ SIGMA_X - 2j * SIGMA_Z))))
    worst = max(worst, float(np.max(np.abs(
        0.5 * (SIGMA_X - 1j * SIGMA_Y) - SIGMA_MINUS))))
    if worst > tol:
        raise InvalidOperatorError(f"Pauli algebra self-test failed: defect {worst:.3e}")
    return worst
