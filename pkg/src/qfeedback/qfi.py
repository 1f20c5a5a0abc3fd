"""Quantum Fisher information of the detection efficiency.

Two independent routes to the QFI (the explicit qubit formula and the
spectral sum), the symmetric logarithmic derivative, the Cramer-Rao bound,
and the eta-derivative of the master-equation flow by finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ModelParams, evolve
from .errors import (
    AccuracyError,
    DegeneratePerturbationError,
    NearPureStateError,
    ParameterDomainError,
    UninformativeMeasurementError,
)
from .qubit import DensityMatrix, dag, eig2

_NEG_CLAMP = 1e-12
_PURE_DET_FLOOR = 1e-12
_EIG_FLOOR = 1e-12


@dataclass(frozen=True)
class QfiResult:
    value: float
    method: str  # qubit-explicit | spectral | sld-trace
    det_rho: float
    fd_step: float = float("nan")


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns

    @classmethod
    def of(cls, rho) -> "SpectralDecomposition":
        m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
        w, v = eig2(m)
        return cls(eigenvalues=w, eigenvectors=v)


@dataclass(frozen=True)
class FdDerivative:
    """Finite-difference d rho / d eta with the stencil actually used."""

    matrix: np.ndarray
    step: float
    stencil: str  # central-richardson | one-sided

    def __array__(self, dtype=None):
        return np.asarray(self.matrix, dtype=dtype)


def _fd_step(eta: float) -> float:
    return max(1e-5, 1e-4 * min(eta, 1.0 - eta, 0.5))


def _flow_endpoint(rho0, p: ModelParams, eta: float, t: float, dt: float):
    return evolve(rho0, p.replace_eta(eta), np.array([0.0, t]), dt=dt).states[-1].matrix


def drho_deta(rho0: DensityMatrix, p: ModelParams, t: float, dt: float = 1e-3) -> FdDerivative:
    """d rho(t) / d eta of the master-equation flow.

    Central difference with one Richardson refinement; falls back to a
    one-sided second-order stencil when eta is too close to the (0, 1]
    boundary for the centered points.
    """
    if not (np.isfinite(t) and t >= 0.0):
        raise ParameterDomainError(f"t must be >= 0, got {t!r}")
    if t == 0.0:
        return FdDerivative(np.zeros((2, 2), dtype=complex), 0.0, "central-richardson")
    eta = p.eta
    h = _fd_step(eta)
    f = lambda e: _flow_endpoint(rho0, p, e, t, dt)
    if eta + h <= 1.0 and eta - h > 0.0:
        d_h = (f(eta + h) - f(eta - h)) / (2.0 * h)
        d_h2 = (f(eta + 0.5 * h) - f(eta - 0.5 * h)) / h
        d = (4.0 * d_h2 - d_h) / 3.0
        stencil = "central-richardson"
    else:
        sign = -1.0 if eta + h > 1.0 else 1.0
        d = sign * (-3.0 * f(eta) + 4.0 * f(eta + sign * h) - f(eta + 2.0 * sign * h)) / (2.0 * h)
        stencil = "one-sided"
    d = 0.5 * (d + dag(d))  # derivative of a Hermitian family is Hermitian
    return FdDerivative(d, h, stencil)


def _clamped(value: float, context: str) -> float:
    if value < -_NEG_CLAMP:
        raise AccuracyError(f"{context} produced {value:.3e} < -{_NEG_CLAMP:g}")
    return max(0.0, float(value))


def qfi_qubit(rho, drho) -> QfiResult:
    """Explicit qubit QFI: Tr[(d rho)^2] + Tr[(rho d rho)^2] / Det(rho)."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    d = np.asarray(drho, dtype=complex)
    det = float(np.linalg.det(m).real)
    if det < _PURE_DET_FLOOR:
        raise NearPureStateError(
            f"Det(rho) = {det:.3e} < {_PURE_DET_FLOOR:g}; use qfi_spectral")
    value = float(np.trace(d @ d).real + np.trace(m @ d @ m @ d).real / det)
    step = drho.step if isinstance(drho, FdDerivative) else float("nan")
    return QfiResult(_clamped(value, "qfi_qubit"), "qubit-explicit", det, step)


def _eigenbasis_blocks(rho, drho):
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    d = np.asarray(drho, dtype=complex)
    w, v = eig2(m)
    g = dag(v) @ d @ v
    return m, w, v, g


def qfi_spectral(rho, drho) -> QfiResult:
    """Spectral QFI: classical eigenvalue term plus the coherence term.

    Eigenvalues below the floor are dropped (the lambda_k > 0 convention);
    first-order perturbation theory supplies d(lambda_k) and <k|d k'>.
    """
    m, w, _, g = _eigenbasis_blocks(rho, drho)
    classical = sum(g[k, k].real ** 2 / w[k] for k in range(2) if w[k] > _EIG_FLOOR)
    coherence = 0.0
    for k in range(2):
        for kp in range(2):
            if k == kp or w[k] + w[kp] <= _EIG_FLOOR:
                continue
            gap = w[kp] - w[k]
            if abs(gap) < 1e-12:
                if abs(g[k, kp]) > 1e-10:
                    raise DegeneratePerturbationError(
                        "degenerate eigenvalues with coupling off-diagonal d rho")
                continue
            overlap = g[k, kp] / gap  # <k | d kp>
            coherence += 2.0 * gap**2 / (w[k] + w[kp]) * abs(overlap) ** 2
    det = float(np.linalg.det(m).real)
    step = drho.step if isinstance(drho, FdDerivative) else float("nan")
    return QfiResult(_clamped(classical + coherence, "qfi_spectral"), "spectral", det, step)


def sld(rho, drho) -> np.ndarray:
    """Symmetric logarithmic derivative L with d rho = (rho L + L rho) / 2."""
    m, w, v, g = _eigenbasis_blocks(rho, drho)
    lt = np.zeros((2, 2), dtype=complex)
    for k in range(2):
        for kp in range(2):
            s = w[k] + w[kp]
            if s > _EIG_FLOOR:
                lt[k, kp] = 2.0 * g[k, kp] / s
    return v @ lt @ dag(v)


def qfi_sld(rho, drho) -> QfiResult:
    """QFI as Tr(rho L^2), the defining trace form."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    l = sld(rho, drho)
    det = float(np.linalg.det(m).real)
    step = drho.step if isinstance(drho, FdDerivative) else float("nan")
    value = float(np.trace(m @ l @ l).real)
    return QfiResult(_clamped(value, "qfi_sld"), "sld-trace", det, step)


def qfi_auto(rho, drho) -> QfiResult:
    """Explicit formula away from pure states, spectral sum near them."""
    try:
        return qfi_qubit(rho, drho)
    except NearPureStateError:
        return qfi_spectral(rho, drho)


def cramer_rao_bound(qfi: float, repetitions: int = 1) -> float:
    """Variance lower bound 1 / (M * QFI) for M independent repetitions."""
    if not (isinstance(repetitions, (int, np.integer)) and repetitions >= 1):
        raise ParameterDomainError(f"repetitions must be a positive integer, got {repetitions!r}")
    if not (np.isfinite(qfi) and qfi > 0.0):
        raise UninformativeMeasurementError(
            f"QFI {qfi!r} is not positive; the variance bound is infinite")
    return 1.0 / (repetitions * qfi)
