"""Closed-form solutions of the feedback master equation.

These are the exact density matrices for the three feedback families and the
asymptotic QFI of the detection efficiency, used as independent oracles for
the numerical modules.  All expressions are evaluated in overflow-safe form
(decaying exponentials only), so they remain finite at arbitrarily late
times.

Arbitration status (checked once against the master-equation integration and
frozen into the test suite):

* the XY-family density matrix, the -sigma_y density matrix and the sigma_z
  density matrix are authoritative as printed;
* the published XY-family QFI formula carries a typo in one denominator
  factor, (Theta - lambda^2)^2 instead of (Theta + lambda^2)^2; the corrected
  grouping is exactly the classical Fisher information of the diagonal state
  and is what :func:`qfi_xy_excited` evaluates.  The as-printed variant is
  kept for the validation report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterDomainError, RemovableSingularityError
from .qubit import DensityMatrix


def _check_domain(t, eta):
    if not (np.isfinite(t) and t >= 0.0):
        raise ParameterDomainError(f"t must be >= 0, got {t!r}")
    if not (np.isfinite(eta) and 0.0 < eta <= 1.0):
        raise ParameterDomainError(f"eta must be in (0, 1], got {eta!r}")


@dataclass(frozen=True)
class AnalyticAux:
    """Scalars shared by the closed forms (naive, overflow-prone versions)."""

    chi: float
    tau: float
    gamma_z: float
    Y: float
    Lambda: float
    Theta: float
    D2: float


def analytic_aux(t, eta, lam, beta) -> AnalyticAux:
    _check_domain(t, eta)
    Y = 2.0 * eta * lam * np.cos(beta)
    D2 = eta + 2.0 * lam**2 + Y
    chi = np.exp(t * D2 / eta)
    return AnalyticAux(
        chi=chi,
        tau=np.exp(2.0 * t / eta),
        gamma_z=np.exp(2.0 * t * lam**2 / eta),
        Y=Y,
        Lambda=eta - chi * eta + 4.0 * eta * t + 6.0 * t * lam**2 + 2.0 * t * Y,
        Theta=eta + lam**2 + Y,
        D2=D2,
    )


def xy_excited_population(t, eta, lam, beta) -> float:
    """Excited population rho_11(t) for F in the XY plane, |1> initial."""
    _check_domain(t, eta)
    Y = 2.0 * eta * lam * np.cos(beta)
    D2 = eta + 2.0 * lam**2 + Y
    Theta = eta + lam**2 + Y
    u = np.exp(-t * D2 / eta)
    return float(lam**2 / D2 + Theta * u / D2)


def rho_xy_excited(t, eta, lam, beta) -> DensityMatrix:
    """Exact state for F = lam (sin b sx + cos b sy) from |1>; diagonal."""
    p = xy_excited_population(t, eta, lam, beta)
    return DensityMatrix(np.diag([p, 1.0 - p]).astype(complex))


def qfi_xy_excited(t, eta, lam, beta) -> float:
    """Exact QFI of eta for the XY family from |1> (corrected grouping).

    Equals (d_eta p)^2 / (p (1 - p)) for the diagonal closed-form state;
    defined as 0 at t = 0 by continuity.
    """
    _check_domain(t, eta)
    if t == 0.0 or lam == 0.0:
        return 0.0
    c = np.cos(beta)
    Y = 2.0 * eta * lam * c
    D2 = eta + 2.0 * lam**2 + Y
    Theta = eta + lam**2 + Y
    dD2 = 1.0 + 2.0 * lam * c  # also d(Theta)/d(eta)
    u = np.exp(-t * D2 / eta)
    du = 2.0 * t * lam**2 * u / eta**2
    p = lam**2 / D2 + Theta * u / D2
    dp = (-lam**2 * dD2 / D2**2
          + (dD2 * u + Theta * du) / D2
          - Theta * u * dD2 / D2**2)
    denom = p * (1.0 - p)
    if denom <= 0.0:
        return 0.0
    return float(dp * dp / denom)


def qfi_xy_as_printed(t, eta, lam, beta) -> float:
    """The published XY-family QFI formula, evaluated verbatim.

    Non-authoritative: differs from the exact QFI by the constant factor
    ((Theta + lam^2) / (Theta - lam^2))^2.  Kept for the arbitration record;
    overflows for large t * D2 / eta.
    """
    a = analytic_aux(t, eta, lam, beta)
    if t == 0.0:
        return 0.0
    num = lam**4 * (eta**2 * (1.0 - a.chi + 2.0 * t)
                    + 6.0 * eta * t * lam**2 + 4.0 * t * lam**4
                    + a.Y * a.Lambda) ** 2
    den = ((a.chi - 1.0) * eta**4 * a.Theta * (a.Theta - lam**2) ** 2
           * (eta + (1.0 + a.chi) * lam**2 + a.Y))
    return float(num / den)


def rho_minus_sy(t, eta, alpha) -> DensityMatrix:
    """Exact state for F = -sigma_y from cos(a)|0> + sin(a)|1>."""
    _check_domain(t, eta)
    # exponents t(eta-2)/eta and t(3/2 - 2/eta) are <= 0 for eta <= 1
    decay = np.exp(t * (eta - 2.0) / eta)
    p = (2.0 - (eta - (eta - 2.0) * np.cos(2.0 * alpha)) * decay) / (2.0 * (2.0 - eta))
    od = 0.5 * np.exp(t * (1.5 - 2.0 / eta)) * np.sin(2.0 * alpha)
    return DensityMatrix(np.array([[p, od], [od, 1.0 - p]], dtype=complex))


def rho_z(t, eta, lam, alpha) -> DensityMatrix:
    """Exact state for F = lam sigma_z from cos(a)|0> + sin(a)|1>.

    The printed expression has a removable singularity on eta = 4 lam^2;
    callers hitting it are redirected to the ODE path.
    """
    _check_domain(t, eta)
    if abs(eta - 4.0 * lam**2) < 1e-9:
        raise RemovableSingularityError(
            f"eta = 4 lam^2 (eta={eta!r}, lam={lam!r}): closed form singular, "
            "integrate the master equation instead")
    s2 = np.sin(alpha) ** 2
    p = np.exp(-t) * s2
    re = 0.5 * np.exp(-t * (0.5 + 2.0 * lam**2 / eta)) * np.sin(2.0 * alpha)
    im = -(8.0 * (np.exp(-t * (0.5 + 2.0 * lam**2 / eta)) - np.exp(-t))
           * eta * lam * s2) / (2.0 * (eta - 4.0 * lam**2))
    od = re + 1j * im
    return DensityMatrix(np.array([[p, od], [np.conj(od), 1.0 - p]], dtype=complex))


def qfi_steady(eta, lam, beta) -> float:
    """Asymptotic (dynamic-balance) QFI of eta for the XY feedback family."""
    if not (np.isfinite(eta) and 0.0 < eta <= 1.0):
        raise ParameterDomainError(f"eta must be in (0, 1], got {eta!r}")
    Y = 2.0 * eta * lam * np.cos(beta)
    num = lam**2 * (1.0 + 2.0 * lam * np.cos(beta)) ** 2
    den = (eta + lam**2 + Y) * (eta + 2.0 * lam**2 + Y) ** 2
    return float(num / den)
