"""One-command reproduction of the published parameter-sweep data sets.

Each figure id maps to one or more CSV tables (one per panel) built from the
model's stated parameter values: eta in {0.3, 0.5, 0.7, 0.9} for the
four-panel figures, lambda = 1 for the efficiency/angle sweep, the excited
state as initial state for the time-evolution figures.  A manifest file
lists every parameter of every emitted table.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ModelParams, XYPlane, ZAxis
from .errors import ParameterDomainError
from .sweep import SweepSpec, max_qfi_over_time, qfi_curve, sweep_grid
from .qubit import make_state

PANEL_ETAS = (0.3, 0.5, 0.7, 0.9)
FIGURE_IDS = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8")


@dataclass(frozen=True)
class PanelTable:
    filename: str
    columns: list
    rows: list
    params: dict  # echoed into the manifest
    kind: str  # curves | grid (figure-rendering hint)


def _curve_grid(t_max, n):
    return np.linspace(0.0, t_max, n)


def _fig2(grid_n, t_max, dt):
    """QFI vs time for the XY family at lambda = 1, four feedback angles."""
    betas = [0.0, np.pi / 2, np.pi, 3 * np.pi / 2]
    labels = ["qfi_beta_0", "qfi_beta_pi_2", "qfi_beta_pi", "qfi_beta_3pi_2"]
    t = _curve_grid(t_max, grid_n)
    rho0 = make_state(np.pi / 2)
    tables = []
    for k, eta in enumerate(PANEL_ETAS, start=1):
        cols = [t]
        for beta in betas:
            p = ModelParams(eta=eta, feedback=XYPlane(lam=1.0, beta=beta))
            cols.append(qfi_curve(rho0, p, t, dt=dt, alpha=np.pi / 2).values)
        rows = [list(vals) for vals in zip(*cols)]
        tables.append(PanelTable(
            filename=f"fig2_panel{k}.csv", columns=["t"] + labels, rows=rows,
            params={"eta": eta, "lambda": 1.0, "alpha": np.pi / 2,
                    "beta": "0,pi/2,pi,3pi/2", "feedback": "xy",
                    "t_max": t_max, "grid_n": grid_n, "dt": dt},
            kind="curves"))
    return tables


def _alpha_time_grid(fig, feedback_of, grid_n, t_max, dt):
    alphas = np.linspace(0.0, np.pi / 2, grid_n)
    t = _curve_grid(t_max, grid_n)
    tables = []
    for k, eta in enumerate(PANEL_ETAS, start=1):
        rows = []
        for alpha in alphas:
            p = ModelParams(eta=eta, feedback=feedback_of())
            series = qfi_curve(make_state(alpha), p, t, dt=dt, alpha=alpha)
            rows.extend([[alpha, tv, fv] for tv, fv in zip(t, series.values)])
        tables.append(PanelTable(
            filename=f"{fig}_panel{k}.csv", columns=["alpha", "t", "qfi"], rows=rows,
            params={"eta": eta, "lambda": 1.0,
                    "feedback": "xy(beta=pi)" if fig == "fig3" else "z",
                    "t_max": t_max, "grid_n": grid_n, "dt": dt},
            kind="grid"))
    return tables


def _fig3(grid_n, t_max, dt):
    """QFI against initial-state angle and time for F = -sigma_y."""
    return _alpha_time_grid("fig3", lambda: XYPlane(lam=1.0, beta=np.pi),
                            grid_n, t_max, dt)


def _fig8(grid_n, t_max, dt):
    """QFI against initial-state angle and time for F = sigma_z."""
    return _alpha_time_grid("fig8", lambda: ZAxis(lam=1.0), grid_n, t_max, dt)


def _fig4(grid_n, t_max, dt):
    """Dynamic-balance QFI over the (lambda, beta) feedback plane."""
    lam_grid = np.linspace(0.0, 2.0, grid_n)
    beta_grid = np.linspace(0.0, 2.0 * np.pi, grid_n)
    tables = []
    for k, eta in enumerate(PANEL_ETAS, start=1):
        spec = SweepSpec(axes=(("lambda", lam_grid), ("beta", beta_grid)),
                         quantity="qfi_steady", fixed={"feedback": "xy", "eta": eta})
        table = sweep_grid(spec, dt=dt)
        rows = [[c["lambda"], c["beta"], v] for c, v in table.rows()]
        tables.append(PanelTable(
            filename=f"fig4_panel{k}.csv", columns=["lambda", "beta", "qfi"], rows=rows,
            params={"eta": eta, "feedback": "xy", "grid_n": grid_n}, kind="grid"))
    return tables


def _fig5(grid_n, t_max, dt):
    """Dynamic-balance QFI against efficiency and feedback angle at lambda = 1."""
    eta_grid = np.linspace(0.1, 0.9, grid_n)
    beta_grid = np.linspace(0.0, 2.0 * np.pi, grid_n)
    spec = SweepSpec(axes=(("eta", eta_grid), ("beta", beta_grid)),
                     quantity="qfi_steady", fixed={"feedback": "xy", "lambda": 1.0})
    table = sweep_grid(spec, dt=dt)
    rows = [[c["eta"], c["beta"], v] for c, v in table.rows()]
    return [PanelTable(filename="fig5_panel1.csv", columns=["eta", "beta", "qfi"],
                       rows=rows, params={"lambda": 1.0, "feedback": "xy",
                                          "grid_n": grid_n}, kind="grid")]


def _fig6(grid_n, t_max, dt):
    """QFI vs time for F = sigma_z at the four panel efficiencies."""
    t = _curve_grid(t_max, grid_n)
    rho0 = make_state(np.pi / 2)
    cols = [t]
    labels = []
    for eta in PANEL_ETAS:
        p = ModelParams(eta=eta, feedback=ZAxis(lam=1.0))
        cols.append(qfi_curve(rho0, p, t, dt=dt, alpha=np.pi / 2).values)
        labels.append(f"qfi_eta_{eta:g}".replace(".", "p"))
    rows = [list(vals) for vals in zip(*cols)]
    return [PanelTable(filename="fig6_panel1.csv", columns=["t"] + labels, rows=rows,
                       params={"lambda": 1.0, "alpha": np.pi / 2, "feedback": "z",
                               "t_max": t_max, "grid_n": grid_n, "dt": dt},
                       kind="curves")]


def _fig7(grid_n, t_max, dt):
    """Maximum-over-time QFI against feedback strength for F = lambda sigma_z."""
    lam_grid = np.linspace(0.2, 2.0, 10)
    rho0 = make_state(np.pi / 2)
    rows = []
    for lam in lam_grid:
        p = ModelParams(eta=0.5, feedback=ZAxis(lam=float(lam)))
        t_star, f_star = max_qfi_over_time(rho0, p, t_max, grid_n=64, dt=dt)
        rows.append([float(lam), t_star, f_star])
    return [PanelTable(filename="fig7_panel1.csv", columns=["lambda", "t_star", "max_qfi"],
                       rows=rows, params={"eta": 0.5, "alpha": np.pi / 2, "feedback": "z",
                                          "t_max": t_max, "dt": dt}, kind="curves")]


_BUILDERS = {"fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "fig5": _fig5,
             "fig6": _fig6, "fig7": _fig7, "fig8": _fig8}


def build_figure(fig_id: str, grid_n: int = 81, t_max: float = 10.0,
                 dt: float = 1e-3) -> list:
    """Tables for one figure id; raises for unknown ids."""
    if fig_id not in _BUILDERS:
        raise ParameterDomainError(
            f"unknown figure id {fig_id!r}; choose from {', '.join(FIGURE_IDS)}")
    return _BUILDERS[fig_id](grid_n, t_max, dt)
