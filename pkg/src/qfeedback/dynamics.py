"""Feedback master equation for a homodyne-monitored qubit.

The generator combines the feedback Hamiltonian term, the modified jump
dissipator D(c - iF) and the inefficiency dissipator D(sqrt((1-eta)/eta) F).
With the effective damping rate set to 1 (the default), time is measured in
units of the inverse effective damping rate; for other values the jump
operator is scaled as sqrt(gamma_eff) * sigma_minus and omega is interpreted
as a Rabi frequency in units of gamma_eff.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    AccuracyError,
    DegenerateSteadyStateError,
    ParameterDomainError,
)
from .qubit import (
    IDENTITY,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityMatrix,
    HermitianOp,
    dag,
    realize,
)

# ---------------------------------------------------------------------------
# feedback operators


@dataclass(frozen=True)
class IdentityScaled:
    """F = scale * I (physically equivalent to no feedback)."""

    scale: float = 1.0

    def matrix(self):
        return self.scale * IDENTITY


@dataclass(frozen=True)
class XYPlane:
    """F = lam * (sin(beta) sigma_x + cos(beta) sigma_y)."""

    lam: float
    beta: float

    def matrix(self):
        return self.lam * (np.sin(self.beta) * SIGMA_X + np.cos(self.beta) * SIGMA_Y)


@dataclass(frozen=True)
class ZAxis:
    """F = lam * sigma_z."""

    lam: float

    def matrix(self):
        return self.lam * SIGMA_Z


@dataclass(frozen=True)
class General:
    """Arbitrary Hermitian feedback eps1*I + eps2*(a . sigma)."""

    op: HermitianOp

    def matrix(self):
        return realize(self.op)


FeedbackSpec = Union[IdentityScaled, XYPlane, ZAxis, General]

NO_FEEDBACK = IdentityScaled(0.0)


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the monitored-qubit generator."""

    eta: float
    feedback: FeedbackSpec = NO_FEEDBACK
    omega: float = 0.0
    gamma_eff: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.eta) and 0.0 < self.eta <= 1.0):
            raise ParameterDomainError(f"eta must be in (0, 1], got {self.eta!r}")
        if not (np.isfinite(self.gamma_eff) and self.gamma_eff > 0.0):
            raise ParameterDomainError(f"gamma_eff must be positive, got {self.gamma_eff!r}")
        if not (np.isfinite(self.omega) and self.omega >= 0.0):
            raise ParameterDomainError(f"omega must be finite and >= 0, got {self.omega!r}")

    def replace_eta(self, eta: float) -> "ModelParams":
        return ModelParams(eta=eta, feedback=self.feedback,
                           omega=self.omega, gamma_eff=self.gamma_eff)


# ---------------------------------------------------------------------------
# generator


def dissipator(c, rho):
    """Lindblad dissipator D(c)rho = c rho c+ - {c+ c, rho}/2."""
    c = np.asarray(c, dtype=complex)
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    cdc = dag(c) @ c
    return c @ m @ dag(c) - 0.5 * (cdc @ m + m @ cdc)


def _rhs_matrix(m, p: ModelParams):
    """Generator applied to an arbitrary (not necessarily unit-trace) matrix."""
    f = p.feedback.matrix()
    c = np.sqrt(p.gamma_eff) * SIGMA_MINUS
    h = p.omega * p.gamma_eff * SIGMA_X + 0.5 * (SIGMA_PLUS @ f + f @ SIGMA_MINUS)
    out = -1j * (h @ m - m @ h) + dissipator(c - 1j * f, m)
    if p.eta < 1.0:
        out = out + dissipator(np.sqrt((1.0 - p.eta) / p.eta) * f, m)
    return out


def rhs(rho, p: ModelParams):
    """Right-hand side of the inefficient-detection feedback master equation."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    return _rhs_matrix(m, p)


_BASIS = (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z)


def bloch_generator(p: ModelParams):
    """Real 4x4 matrix M with d/dt (tr, rx, ry, rz) = M (tr, rx, ry, rz).

    Coordinates are x_j = Tr(rho B_j) for B = (I, sx, sy, sz); the generator
    is linear, so M is exact.  The trace row is computed, not forced to zero,
    so trace drift of any integration built on M stays observable.
    """
    m = np.empty((4, 4))
    for k, bk in enumerate(_BASIS):
        out = _rhs_matrix(0.5 * bk, p)
        for j, bj in enumerate(_BASIS):
            m[j, k] = np.trace(bj @ out).real
    return m


def _rk4_step_matrix(m, h):
    """One-step update matrix of classical RK4 for the linear system x' = Mx."""
    hm = h * m
    u = np.eye(4) + hm
    term = hm
    for k in (2.0, 3.0, 4.0):
        term = (term @ hm) / k
        u = u + term
    return u


def state_to_coords(rho) -> np.ndarray:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    return np.array([np.trace(b @ m).real for b in _BASIS])


def coords_to_matrix(x) -> np.ndarray:
    return 0.5 * (x[0] * IDENTITY + x[1] * SIGMA_X + x[2] * SIGMA_Y + x[3] * SIGMA_Z)


@dataclass(frozen=True)
class IntegratorInfo:
    dt: float
    method: str
    error_rate: float  # step-halving estimate, per unit time


@dataclass(frozen=True)
class EvolutionResult:
    times: np.ndarray
    states: list
    params: ModelParams
    info: IntegratorInfo

    def bloch(self) -> np.ndarray:
        """(n, 3) array of Bloch components along the grid."""
        return np.array([state_to_coords(s)[1:] for s in self.states])


# Positivity slack for integrator output; RK4 at the default step keeps the
# defect orders of magnitude below this.
_EVOLVE_EIG_TOL = 1e-9
_ERROR_RATE_LIMIT = 1e-8


def evolve(rho0: DensityMatrix, p: ModelParams, t_grid, dt: float = 1e-3) -> EvolutionResult:
    """Integrate the master equation with fixed-step classical RK4.

    The flow is linear, so the RK4 update is applied through its one-step
    matrix (propagated between grid points by matrix powers, which is the
    same iteration up to rounding).  A parallel half-step integration gives
    the error estimate; the half-step states are the ones reported.  No
    trace renormalization is applied.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or t_grid[0] != 0.0:
        raise ParameterDomainError("t_grid must be a non-empty 1-d grid starting at 0")
    if t_grid.size > 1 and np.any(np.diff(t_grid) <= 0.0):
        raise ParameterDomainError("t_grid must be strictly increasing")
    if not (np.isfinite(dt) and dt > 0.0):
        raise ParameterDomainError(f"dt must be positive, got {dt!r}")
    if t_grid.size > 1 and dt > np.min(np.diff(t_grid)) * (1 + 1e-12):
        raise ParameterDomainError("dt must not exceed the grid spacing")

    m = bloch_generator(p)
    x_full = state_to_coords(rho0)
    x_half = x_full.copy()
    states = [rho0]
    max_rate = 0.0
    for t_prev, t_next in zip(t_grid[:-1], t_grid[1:]):
        span = t_next - t_prev
        n = max(1, int(round(span / dt)))
        h = span / n
        u = _rk4_step_matrix(m, h)
        u_half = _rk4_step_matrix(m, 0.5 * h)
        x_full = np.linalg.matrix_power(u, n) @ x_full
        x_half = np.linalg.matrix_power(u_half @ u_half, n) @ x_half
        rate = float(np.max(np.abs(x_full - x_half))) / t_next
        max_rate = max(max_rate, rate)
        if rate > _ERROR_RATE_LIMIT:
            raise AccuracyError(
                f"step-halving error estimate {rate:.3e}/unit time at t={t_next:g} "
                f"exceeds {_ERROR_RATE_LIMIT:g}; decrease dt (currently {dt:g})")
        states.append(DensityMatrix(coords_to_matrix(x_half), eig_tol=_EVOLVE_EIG_TOL))
    info = IntegratorInfo(dt=dt, method="rk4-fixed", error_rate=max_rate)
    return EvolutionResult(times=t_grid, states=states, params=p, info=info)


def steady_state(p: ModelParams) -> DensityMatrix:
    """Stationary state from the linear system M x = 0 with unit trace.

    Solved in Bloch coordinates, so the result carries no integration error.
    """
    m = bloch_generator(p)
    a = m[1:, 1:]
    b = m[1:, 0]
    svals = np.linalg.svd(a, compute_uv=False)
    null_dim = int(np.sum(svals < 1e-10 * max(1.0, svals[0])))
    if null_dim > 0:
        raise DegenerateSteadyStateError(null_dim)
    r = np.linalg.solve(a, -b)
    rho = DensityMatrix(coords_to_matrix(np.concatenate(([1.0], r))))
    resid = float(np.max(np.abs(rhs(rho, p))))
    if resid > 1e-12:
        raise AccuracyError(f"steady-state residual {resid:.3e} exceeds 1e-12")
    return rho


def effective_damping(g: float, kappa: float) -> float:
    """Effective damping rate g**2 / kappa of the adiabatically eliminated cavity."""
    if not (np.isfinite(g) and g >= 0.0):
        raise ParameterDomainError(f"coupling g must be >= 0, got {g!r}")
    if not (np.isfinite(kappa) and kappa > 0.0):
        raise ParameterDomainError(f"cavity decay kappa must be > 0, got {kappa!r}")
    return g * g / kappa
