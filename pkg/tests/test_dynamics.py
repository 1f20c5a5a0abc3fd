import numpy as np
import pytest

from qfeedback import oracles
from qfeedback.dynamics import (
    NO_FEEDBACK,
    General,
    IdentityScaled,
    ModelParams,
    XYPlane,
    ZAxis,
    bloch_generator,
    coords_to_matrix,
    dissipator,
    effective_damping,
    evolve,
    rhs,
    state_to_coords,
    steady_state,
    _rk4_step_matrix,
)
from qfeedback.errors import AccuracyError, ParameterDomainError
from qfeedback.qubit import (
    SIGMA_MINUS,
    SIGMA_X,
    DensityMatrix,
    HermitianOp,
    dag,
    herm_defect,
    make_state,
)


def _random_state(rng):
    r = rng.normal(size=3)
    r *= rng.uniform(0.0, 1.0) / np.linalg.norm(r)
    m = 0.5 * (np.eye(2) + r[0] * np.array([[0, 1], [1, 0]])
               + r[1] * np.array([[0, -1j], [1j, 0]]) + r[2] * np.diag([1.0, -1.0]))
    return DensityMatrix(m)


def _random_params(rng):
    fam = rng.integers(4)
    lam = float(rng.uniform(-2.0, 2.0))
    if fam == 0:
        fb = XYPlane(lam=lam, beta=float(rng.uniform(0.0, 2.0 * np.pi)))
    elif fam == 1:
        fb = ZAxis(lam=lam)
    elif fam == 2:
        fb = IdentityScaled(lam)
    else:
        a = rng.normal(size=3)
        fb = General(HermitianOp(eps1=lam, eps2=float(rng.uniform(0, 2)),
                                 axis=tuple(a / np.linalg.norm(a))))
    return ModelParams(eta=float(rng.uniform(0.05, 1.0)), feedback=fb,
                       omega=float(rng.uniform(0.0, 1.0)))


def test_rhs_preserves_trace_and_hermiticity():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        rho = _random_state(rng)
        out = rhs(rho, _random_params(rng))
        assert abs(np.trace(out)) < 1e-13
        assert herm_defect(out) < 1e-13


def test_dissipator_definition():
    rng = np.random.default_rng(5)
    c = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = _random_state(rng)
    m = rho.matrix
    cdc = dag(c) @ c
    assert np.allclose(dissipator(c, rho),
                       c @ m @ dag(c) - 0.5 * (cdc @ m + m @ cdc), atol=1e-14)


def test_identity_feedback_is_no_feedback():
    rng = np.random.default_rng(9)
    for lam in (-2.0, 0.5, 3.0):
        for _ in range(20):
            rho = _random_state(rng)
            eta = float(rng.uniform(0.05, 1.0))
            a = rhs(rho, ModelParams(eta=eta, feedback=IdentityScaled(lam)))
            b = rhs(rho, ModelParams(eta=eta, feedback=NO_FEEDBACK))
            assert np.max(np.abs(a - b)) < 1e-12


def test_unit_efficiency_drops_extra_dissipator():
    rng = np.random.default_rng(13)
    rho = _random_state(rng)
    p = ModelParams(eta=1.0, feedback=XYPlane(lam=1.3, beta=0.7), omega=0.2)
    f = p.feedback.matrix()
    c = SIGMA_MINUS
    h = p.omega * SIGMA_X + 0.5 * (dag(SIGMA_MINUS) @ f + f @ SIGMA_MINUS)
    m = rho.matrix
    expected = -1j * (h @ m - m @ h) + dissipator(c - 1j * f, m)
    assert np.allclose(rhs(rho, p), expected, atol=1e-14)


def test_params_validation():
    for eta in (0.0, -0.2, 1.5, float("nan")):
        with pytest.raises(ParameterDomainError):
            ModelParams(eta=eta)
    with pytest.raises(ParameterDomainError):
        ModelParams(eta=0.5, gamma_eff=0.0)
    with pytest.raises(ParameterDomainError):
        ModelParams(eta=0.5, omega=-1.0)
    p = ModelParams(eta=0.5, feedback=ZAxis(1.0), omega=0.3)
    q = p.replace_eta(0.7)
    assert q.eta == 0.7 and q.feedback == p.feedback and q.omega == 0.3


def test_bloch_generator_matches_rhs():
    rng = np.random.default_rng(17)
    for _ in range(50):
        p = _random_params(rng)
        m = bloch_generator(p)
        rho = _random_state(rng)
        x = state_to_coords(rho)
        lhs = coords_to_matrix(m @ x)
        assert np.allclose(lhs, rhs(rho, p), atol=1e-13)


def test_integrator_fourth_order_signature():
    # one-step matrix iterated to t = 1 against the closed form; halving the
    # step must shrink the error by at least 2^4 = 16 (allowing 12 for noise)
    p = ModelParams(eta=0.5, feedback=XYPlane(lam=1.0, beta=np.pi))
    m = bloch_generator(p)
    x0 = state_to_coords(make_state(np.pi / 2))
    exact = oracles.xy_excited_population(1.0, 0.5, 1.0, np.pi)

    def err(h):
        u = _rk4_step_matrix(m, h)
        x = np.linalg.matrix_power(u, int(round(1.0 / h))) @ x0
        return abs(0.5 * (x[0] + x[3]) - exact)

    e_coarse, e_fine = err(0.05), err(0.025)
    assert e_coarse / e_fine >= 12.0


def test_evolve_matches_oracle_and_reports_error_rate():
    p = ModelParams(eta=0.5, feedback=XYPlane(lam=1.0, beta=np.pi))
    res = evolve(make_state(np.pi / 2), p, np.array([0.0, 1.0, 2.0]))
    for t, s in zip(res.times, res.states):
        cf = oracles.rho_xy_excited(float(t), 0.5, 1.0, np.pi)
        assert np.max(np.abs(s.matrix - cf.matrix)) < 1e-9
    assert res.info.method == "rk4-fixed"
    assert 0.0 <= res.info.error_rate <= 1e-8
    assert res.states[1].matrix[0, 0].real == pytest.approx(0.6832624, abs=1e-6)


def test_evolve_grid_validation():
    p = ModelParams(eta=0.5)
    rho0 = make_state(0.3)
    with pytest.raises(ParameterDomainError):
        evolve(rho0, p, np.array([1.0, 2.0]))  # must start at 0
    with pytest.raises(ParameterDomainError):
        evolve(rho0, p, np.array([0.0, 2.0, 1.0]))  # not increasing
    with pytest.raises(ParameterDomainError):
        evolve(rho0, p, np.array([0.0, 0.5, 1.0]), dt=0.6)  # dt > spacing
    with pytest.raises(ParameterDomainError):
        evolve(rho0, p, np.array([0.0, 1.0]), dt=-1e-3)


def test_evolve_accuracy_guard_trips_on_coarse_step():
    p = ModelParams(eta=0.5, feedback=XYPlane(lam=1.0, beta=np.pi))
    with pytest.raises(AccuracyError):
        evolve(make_state(np.pi / 2), p, np.array([0.0, 1.0]), dt=0.05)


def test_steady_state_values_and_residual():
    p = ModelParams(eta=0.5, feedback=XYPlane(lam=1.0, beta=np.pi))
    rho = steady_state(p)
    assert rho.matrix[0, 0].real == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert np.max(np.abs(rhs(rho, p))) <= 1e-12
    # long-time flow lands on the same state
    res = evolve(make_state(0.2), p, np.array([0.0, 60.0]))
    assert np.max(np.abs(res.states[-1].matrix - rho.matrix)) < 1e-8
    # no feedback: ground state
    rho0 = steady_state(ModelParams(eta=0.8))
    assert rho0.matrix[1, 1].real == pytest.approx(1.0, abs=1e-12)


def test_effective_damping():
    assert effective_damping(2.0, 8.0) == pytest.approx(0.5)
    with pytest.raises(ParameterDomainError):
        effective_damping(-1.0, 1.0)
    with pytest.raises(ParameterDomainError):
        effective_damping(1.0, 0.0)
