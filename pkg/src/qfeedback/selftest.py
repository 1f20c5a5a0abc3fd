"""Release-gate self test: fast invariant checks with a pass/fail report.

Covers the Pauli algebra, oracle/ODE agreement for every closed form, the
identity-feedback null result, and the agreement of the QFI routes.  Any
failure is reported with the observed defect; all groups must pass.
"""

from __future__ import annotations

import numpy as np

from . import oracles
from .dynamics import IdentityScaled, ModelParams, XYPlane, ZAxis, evolve, rhs, steady_state
from .qfi import drho_deta, qfi_qubit, qfi_spectral, qfi_sld
from .qubit import DensityMatrix, make_state, pauli_self_test


class CheckGroup:
    def __init__(self, name):
        self.name = name
        self.defect = 0.0
        self.detail = ""
        self.passed = True

    def observe(self, defect, limit, detail=""):
        defect = float(defect)
        if defect > self.defect:
            self.defect = defect
            self.detail = detail
        if defect > limit:
            self.passed = False


def run_selftest(dt: float = 1e-3, report=print) -> bool:
    """Run all invariant groups; returns True when everything passes."""
    groups = []

    g = CheckGroup("pauli-algebra")
    try:
        g.observe(pauli_self_test(), 1e-15)
    except Exception as exc:  # corrupted constants raise
        g.passed = False
        g.detail = str(exc)
    groups.append(g)

    g = CheckGroup("oracle-ode-agreement")
    t_pts = [0.5, 1.0, 2.0]
    grid = np.array([0.0] + t_pts)
    for eta in (0.3, 0.9):
        p = ModelParams(eta=eta, feedback=XYPlane(lam=1.0, beta=np.pi))
        res = evolve(make_state(np.pi / 2), p, grid, dt=dt)
        for i, t in enumerate(t_pts, start=1):
            cf = oracles.rho_xy_excited(t, eta, 1.0, np.pi)
            g.observe(np.max(np.abs(res.states[i].matrix - cf.matrix)), 1e-6,
                      f"xy eta={eta} t={t}")
        res = evolve(make_state(np.pi / 4), ModelParams(eta=eta, feedback=XYPlane(1.0, np.pi)),
                     grid, dt=dt)
        for i, t in enumerate(t_pts, start=1):
            cf = oracles.rho_minus_sy(t, eta, np.pi / 4)
            g.observe(np.max(np.abs(res.states[i].matrix - cf.matrix)), 1e-6,
                      f"-sy eta={eta} t={t}")
        res = evolve(make_state(np.pi / 4), ModelParams(eta=eta, feedback=ZAxis(lam=1.0)),
                     grid, dt=dt)
        for i, t in enumerate(t_pts, start=1):
            cf = oracles.rho_z(t, eta, 1.0, np.pi / 4)
            g.observe(np.max(np.abs(res.states[i].matrix - cf.matrix)), 1e-6,
                      f"z eta={eta} t={t}")
    groups.append(g)

    g = CheckGroup("identity-feedback-null")
    rng = np.random.default_rng(20240824)
    for lam in (-2.0, 0.5, 1.0, 3.0):
        for eta in (0.3, 0.9):
            r = rng.normal(size=3)
            r *= rng.uniform(0, 1) / np.linalg.norm(r)
            rho = DensityMatrix(0.5 * (np.eye(2) + r[0] * np.array([[0, 1], [1, 0]])
                                       + r[1] * np.array([[0, -1j], [1j, 0]])
                                       + r[2] * np.diag([1, -1])))
            a = rhs(rho, ModelParams(eta=eta, feedback=IdentityScaled(lam)))
            b = rhs(rho, ModelParams(eta=eta, feedback=IdentityScaled(0.0)))
            g.observe(np.max(np.abs(a - b)), 1e-12, f"lam={lam} eta={eta}")
    groups.append(g)

    g = CheckGroup("qfi-route-agreement")
    for _ in range(50):
        r = rng.normal(size=3)
        r *= rng.uniform(0.05, 0.9) / np.linalg.norm(r)
        rho = DensityMatrix(0.5 * (np.eye(2) + r[0] * np.array([[0, 1], [1, 0]])
                                   + r[1] * np.array([[0, -1j], [1j, 0]])
                                   + r[2] * np.diag([1, -1])))
        d = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        d = 0.5 * (d + d.conj().T)
        d -= 0.5 * np.trace(d).real * np.eye(2)
        fa = qfi_qubit(rho, d).value
        fb = qfi_spectral(rho, d).value
        fc = qfi_sld(rho, d).value
        scale = max(fa, 1e-12)
        g.observe(abs(fa - fb) / scale, 1e-8)
        g.observe(abs(fa - fc) / scale, 1e-8)
    groups.append(g)

    g = CheckGroup("steady-balance-qfi")
    for (eta, lam, beta, expect) in [(0.5, 1.0, np.pi, 8.0 / 9.0),
                                     (0.9, 1.0, np.pi, oracles.qfi_steady(0.9, 1.0, np.pi))]:
        p = ModelParams(eta=eta, feedback=XYPlane(lam=lam, beta=beta))
        d = drho_deta(make_state(np.pi / 2), p, 60.0, dt=dt)
        rho = evolve(make_state(np.pi / 2), p, np.array([0.0, 60.0]), dt=dt).states[-1]
        f = qfi_qubit(rho, d).value
        g.observe(abs(f - expect) / expect, 1e-4, f"eta={eta}")
        ss = steady_state(p)
        g.observe(np.max(np.abs(ss.matrix - rho.matrix)), 1e-8, f"steady eta={eta}")
    groups.append(g)

    all_ok = True
    for g in groups:
        status = "PASS" if g.passed else "FAIL"
        tail = f" ({g.detail})" if (g.detail and not g.passed) else ""
        report(f"[{status}] {g.name}: worst defect {g.defect:.3e}{tail}")
        all_ok = all_ok and g.passed
    return all_ok
