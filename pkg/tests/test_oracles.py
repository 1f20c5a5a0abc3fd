import numpy as np
import pytest

from qfeedback import oracles
from qfeedback.dynamics import ModelParams, XYPlane, ZAxis, steady_state
from qfeedback.errors import ParameterDomainError, RemovableSingularityError


def test_initial_conditions():
    rho = oracles.rho_xy_excited(0.0, 0.5, 1.0, np.pi)
    assert np.allclose(rho.matrix, np.diag([1.0, 0.0]))
    for alpha in (0.0, np.pi / 4, np.pi / 2):
        v = np.array([np.sin(alpha), np.cos(alpha)])
        proj = np.outer(v, v)
        assert np.allclose(oracles.rho_minus_sy(0.0, 0.7, alpha).matrix, proj, atol=1e-15)
        assert np.allclose(oracles.rho_z(0.0, 0.7, 1.0, alpha).matrix, proj, atol=1e-15)


def test_xy_population_spot_value():
    # rho_11(t=1) at eta=0.5, lam=1, beta=pi, where exp(t D2/eta) = e^3
    expected = (1.0 + 0.5 * np.exp(-3.0)) / 1.5
    assert oracles.xy_excited_population(1.0, 0.5, 1.0, np.pi) == pytest.approx(
        expected, abs=1e-15)
    assert expected == pytest.approx(0.6832624, abs=1e-6)


def test_minus_sy_spot_values():
    rho = oracles.rho_minus_sy(1.0, 0.5, np.pi / 4)
    assert rho.matrix[0, 0].real == pytest.approx(0.65837, abs=1e-5)
    assert rho.matrix[0, 1].real == pytest.approx(0.041043, abs=1e-6)
    assert rho.matrix[0, 1].imag == 0.0


def test_z_spot_values():
    rho = oracles.rho_z(1.0, 0.5, 1.0, np.pi / 4)
    assert rho.matrix[0, 0].real == pytest.approx(np.exp(-1.0) / 2.0, abs=1e-12)
    assert rho.matrix[0, 1].real == pytest.approx(0.0055545, abs=1e-7)
    assert rho.matrix[0, 1].imag == pytest.approx(-0.1019344, abs=1e-6)


def test_z_singular_line_refused():
    with pytest.raises(RemovableSingularityError):
        oracles.rho_z(1.0, 0.4, np.sqrt(0.1), np.pi / 4)
    # just off the line is fine
    oracles.rho_z(1.0, 0.4, np.sqrt(0.1) + 1e-3, np.pi / 4)


def test_qfi_xy_matches_population_fisher_information():
    # the corrected QFI equals the classical Fisher information of the
    # diagonal state, checked against a numerical eta-derivative of p(t)
    h = 1e-6
    for (t, eta, lam, beta) in [(1.0, 0.5, 1.0, np.pi), (2.0, 0.3, 0.5, 0.0),
                                (0.7, 0.9, 1.5, np.pi / 2)]:
        p = oracles.xy_excited_population(t, eta, lam, beta)
        dp = (oracles.xy_excited_population(t, eta + h, lam, beta)
              - oracles.xy_excited_population(t, eta - h, lam, beta)) / (2.0 * h)
        expected = dp * dp / (p * (1.0 - p))
        assert oracles.qfi_xy_excited(t, eta, lam, beta) == pytest.approx(
            expected, rel=1e-6)


def test_qfi_xy_edge_cases():
    assert oracles.qfi_xy_excited(0.0, 0.5, 1.0, np.pi) == 0.0
    assert oracles.qfi_xy_excited(1.0, 0.5, 0.0, np.pi) == 0.0
    # late-time limit is the asymptotic value
    assert oracles.qfi_xy_excited(80.0, 0.5, 1.0, np.pi) == pytest.approx(
        8.0 / 9.0, rel=1e-10)


def test_qfi_as_printed_is_off_by_constant_factor():
    # the published grouping differs by ((Theta + lam^2)/(Theta - lam^2))^2
    t, eta, lam, beta = 2.0, 0.5, 1.0, np.pi
    theta = eta + lam**2 + 2.0 * eta * lam * np.cos(beta)
    factor = ((theta + lam**2) / (theta - lam**2)) ** 2
    printed = oracles.qfi_xy_as_printed(t, eta, lam, beta)
    corrected = oracles.qfi_xy_excited(t, eta, lam, beta)
    assert printed == pytest.approx(factor * corrected, rel=1e-10)
    assert factor == pytest.approx(9.0, rel=1e-12)


def test_qfi_steady_values_and_domain():
    assert oracles.qfi_steady(0.5, 1.0, np.pi) == pytest.approx(8.0 / 9.0, rel=1e-12)
    assert oracles.qfi_steady(0.5, 1.0, np.pi / 2) == pytest.approx(1.0 / 9.375, rel=1e-12)
    assert oracles.qfi_steady(0.9, 1.0, np.pi) == pytest.approx(1.0 / 0.121, rel=1e-12)
    # at beta = pi, lam = 1 the formula collapses to 1 / ((1-eta)(2-eta)^2)
    for eta in (0.3, 0.6, 0.85):
        assert oracles.qfi_steady(eta, 1.0, np.pi) == pytest.approx(
            1.0 / ((1.0 - eta) * (2.0 - eta) ** 2), rel=1e-12)
    with pytest.raises(ParameterDomainError):
        oracles.qfi_steady(0.0, 1.0, np.pi)
    with pytest.raises(ParameterDomainError):
        oracles.qfi_steady(1.2, 1.0, np.pi)


def test_domain_checks():
    with pytest.raises(ParameterDomainError):
        oracles.rho_xy_excited(-1.0, 0.5, 1.0, np.pi)
    with pytest.raises(ParameterDomainError):
        oracles.rho_minus_sy(1.0, 0.0, 0.3)


def test_late_time_closed_forms_match_steady_state():
    t = 60.0
    for eta in (0.3, 0.9):
        for (lam, beta) in [(1.0, np.pi), (0.5, 0.0), (1.5, np.pi / 2)]:
            ss = steady_state(ModelParams(eta=eta, feedback=XYPlane(lam=lam, beta=beta)))
            cf = oracles.rho_xy_excited(t, eta, lam, beta)
            assert np.max(np.abs(ss.matrix - cf.matrix)) < 1e-8
        ss = steady_state(ModelParams(eta=eta, feedback=ZAxis(lam=1.0)))
        cf = oracles.rho_z(t, eta, 1.0, np.pi / 4)
        assert np.max(np.abs(ss.matrix - cf.matrix)) < 1e-8


def test_overflow_safety_at_extreme_times():
    # closed forms stay finite far beyond where the naive exponentials overflow
    rho = oracles.rho_xy_excited(1e4, 0.5, 1.0, np.pi)
    assert np.all(np.isfinite(rho.matrix.view(float)))
    assert np.isfinite(oracles.qfi_xy_excited(1e4, 0.5, 1.0, np.pi))
    rho = oracles.rho_minus_sy(1e4, 0.3, np.pi / 4)
    assert np.all(np.isfinite(rho.matrix.view(float)))
