"""QFI-versus-time curves, balance detection, grid sweeps and feedback tuning.

Everything here is a deterministic pure evaluation over parameter grids, so
results do not depend on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import oracles
from .dynamics import ModelParams, XYPlane, ZAxis, evolve, steady_state
from .errors import ParameterDomainError, QFeedbackError
from .qfi import FdDerivative, _fd_step, qfi_auto
from .qubit import DensityMatrix, dag, make_state

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class QfiSeries:
    times: np.ndarray
    values: np.ndarray
    params: ModelParams
    alpha: float
    method: str = "fd-flow"

    def __post_init__(self):
        if np.any(np.asarray(self.values) < -1e-12):
            raise ParameterDomainError("QFI series has values below the clamp tolerance")


def _fd_states_over_grid(rho0, p, t_grid, dt):
    """rho(t) and d rho/d eta (t) along the grid, by Richardson-refined FD."""
    eta = p.eta
    h = _fd_step(eta)
    runs = {}

    def states(e):
        if e not in runs:
            runs[e] = [s.matrix for s in evolve(rho0, p.replace_eta(e), t_grid, dt=dt).states]
        return runs[e]

    base = states(eta)
    if eta + h <= 1.0 and eta - h > 0.0:
        sp_, sm_ = states(eta + h), states(eta - h)
        sp2, sm2 = states(eta + 0.5 * h), states(eta - 0.5 * h)
        derivs = []
        for i in range(len(t_grid)):
            d_h = (sp_[i] - sm_[i]) / (2.0 * h)
            d_h2 = (sp2[i] - sm2[i]) / h
            d = (4.0 * d_h2 - d_h) / 3.0
            derivs.append(0.5 * (d + dag(d)))
        stencil = "central-richardson"
    else:
        sign = -1.0 if eta + h > 1.0 else 1.0
        s1, s2 = states(eta + sign * h), states(eta + 2.0 * sign * h)
        derivs = []
        for i in range(len(t_grid)):
            d = sign * (-3.0 * base[i] + 4.0 * s1[i] - s2[i]) / (2.0 * h)
            derivs.append(0.5 * (d + dag(d)))
        stencil = "one-sided"
    return base, [FdDerivative(d, h, stencil) for d in derivs]


def qfi_curve(rho0: DensityMatrix, p: ModelParams, t_grid, dt: float = 1e-3,
              alpha: float = float("nan")) -> QfiSeries:
    """QFI of eta along a time grid: evolve, differentiate, apply the qubit QFI."""
    t_grid = np.asarray(t_grid, dtype=float)
    states, derivs = _fd_states_over_grid(rho0, p, t_grid, dt)
    values = np.array([qfi_auto(s, d).value for s, d in zip(states, derivs)])
    return QfiSeries(times=t_grid, values=values, params=p, alpha=alpha)


def qfi_at(rho0: DensityMatrix, p: ModelParams, t: float, dt: float = 1e-3) -> float:
    """QFI of eta at a single time."""
    if t == 0.0:
        return 0.0
    states, derivs = _fd_states_over_grid(rho0, p, np.array([0.0, t]), dt)
    return qfi_auto(states[-1], derivs[-1]).value


def detect_balance(series: QfiSeries, rel_tol: float = 1e-6, window: int = 10):
    """First time the trailing-window relative change of F stays below rel_tol.

    Returns the balance time, or None when the series never settles.
    """
    n = len(series.values)
    if window < 1 or window >= n:
        raise ParameterDomainError(f"window must be in [1, {n - 1}], got {window!r}")
    v = np.asarray(series.values, dtype=float)
    scale = np.maximum(np.abs(v), 1e-300)
    rel = np.abs(np.diff(v)) / scale[1:]
    for i in range(window, n):
        if np.max(rel[i - window:i]) <= rel_tol:
            return float(series.times[i])
    return None


def max_qfi_over_time(rho0: DensityMatrix, p: ModelParams, t_max: float,
                      grid_n: int = 64, dt: float = 1e-3, refine_tol: float = 1e-8):
    """(t_star, f_star): maximum of the QFI curve on (0, t_max].

    Dense-grid scan followed by golden-section refinement of the bracketing
    interval.  An identically zero curve reports the first grid point.
    """
    if not (np.isfinite(t_max) and t_max > 0.0):
        raise ParameterDomainError(f"t_max must be positive, got {t_max!r}")
    if grid_n < 16:
        raise ParameterDomainError(f"grid_n must be >= 16, got {grid_n!r}")
    t_grid = np.linspace(0.0, t_max, grid_n)
    series = qfi_curve(rho0, p, t_grid, dt=dt)
    k = int(np.argmax(series.values))
    if series.values[k] <= 0.0:
        return float(t_grid[1]), 0.0
    a = t_grid[max(k - 1, 0)]
    b = t_grid[min(k + 1, grid_n - 1)]
    f = lambda t: qfi_at(rho0, p, t, dt=dt)
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > refine_tol * max(1.0, b):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
    t_star = 0.5 * (a + b)
    return float(t_star), float(max(f(t_star), series.values[k]))


# ---------------------------------------------------------------------------
# grid sweeps


@dataclass(frozen=True)
class SweepSpec:
    """Axes (name, strictly increasing grid) plus fixed parameters."""

    axes: tuple  # ((name, ndarray), ...)
    quantity: str  # qfi_t | qfi_steady | max_qfi
    fixed: dict = field(default_factory=dict)

    _AXIS_NAMES = ("eta", "lambda", "beta", "alpha", "t")
    _QUANTITIES = ("qfi_t", "qfi_steady", "max_qfi")

    def __post_init__(self):
        if self.quantity not in self._QUANTITIES:
            raise ParameterDomainError(f"unknown quantity {self.quantity!r}")
        if not self.axes:
            raise ParameterDomainError("sweep needs at least one axis")
        for name, grid in self.axes:
            if name not in self._AXIS_NAMES:
                raise ParameterDomainError(f"unknown axis {name!r}")
            g = np.asarray(grid, dtype=float)
            if g.size == 0 or (g.size > 1 and np.any(np.diff(g) <= 0.0)):
                raise ParameterDomainError(f"axis {name!r} grid must be non-empty and increasing")


@dataclass(frozen=True)
class SweepTable:
    spec: SweepSpec
    values: np.ndarray  # row-major over the axis product; NaN marks a gap
    missing: tuple  # ((flat_index, reason), ...)

    def rows(self):
        """Yield (coordinate dict, value) in row-major order."""
        names = [n for n, _ in self.spec.axes]
        grids = [np.asarray(g, dtype=float) for _, g in self.spec.axes]
        flat = self.values.reshape(-1)
        for i, idx in enumerate(np.ndindex(*[g.size for g in grids])):
            coords = {n: float(g[j]) for n, g, j in zip(names, grids, idx)}
            yield coords, float(flat[i])


def _feedback_from(family: str, lam: float, beta: float):
    if family == "xy":
        return XYPlane(lam=lam, beta=beta)
    if family == "z":
        return ZAxis(lam=lam)
    raise ParameterDomainError(f"sweeps support feedback families 'xy' and 'z', got {family!r}")


def _steady_qfi_point(eta, family, lam, beta, dt):
    if family == "xy":
        return oracles.qfi_steady(eta, lam, beta)
    # generic route: finite difference of the steady state itself
    h = _fd_step(eta)
    fb = _feedback_from(family, lam, beta)
    s = lambda e: steady_state(ModelParams(eta=e, feedback=fb)).matrix
    if eta + h <= 1.0 and eta - h > 0.0:
        d = (s(eta + h) - s(eta - h)) / (2.0 * h)
    else:
        sign = -1.0 if eta + h > 1.0 else 1.0
        d = sign * (-3.0 * s(eta) + 4.0 * s(eta + sign * h) - s(eta + 2.0 * sign * h)) / (2.0 * h)
    rho = steady_state(ModelParams(eta=eta, feedback=fb))
    return qfi_auto(rho, FdDerivative(0.5 * (d + dag(d)), h, "central")).value


def sweep_grid(spec: SweepSpec, dt: float = 1e-3) -> SweepTable:
    """Evaluate the requested quantity on the full axis product.

    Per-point failures become NaN entries with a recorded reason instead of
    aborting the sweep.  When the quantity is qfi_t and `t` is an axis, whole
    QFI curves are computed at once.
    """
    names = [n for n, _ in spec.axes]
    grids = [np.asarray(g, dtype=float) for _, g in spec.axes]
    shape = tuple(g.size for g in grids)
    values = np.full(shape, np.nan)
    missing = []

    fixed = dict(spec.fixed)
    family = fixed.get("feedback", "xy")
    defaults = {"eta": fixed.get("eta"), "lambda": fixed.get("lambda", 1.0),
                "beta": fixed.get("beta", np.pi), "alpha": fixed.get("alpha", np.pi / 2),
                "t": fixed.get("t")}

    t_axis = names.index("t") if ("t" in names and spec.quantity == "qfi_t") else None
    outer_axes = [i for i in range(len(names)) if i != t_axis]
    outer_shape = tuple(shape[i] for i in outer_axes)

    for outer_idx in np.ndindex(*outer_shape) if outer_shape else [()]:
        point = dict(defaults)
        full_idx = [slice(None)] * len(names)
        for pos, ax in zip(outer_idx, outer_axes):
            point[names[ax]] = float(grids[ax][pos])
            full_idx[ax] = pos
        try:
            fb = _feedback_from(family, point["lambda"], point["beta"])
            if spec.quantity == "qfi_t":
                p = ModelParams(eta=point["eta"], feedback=fb)
                rho0 = make_state(point["alpha"])
                if t_axis is not None:
                    t_grid = grids[t_axis]
                    start_at_zero = t_grid[0] == 0.0
                    g = t_grid if start_at_zero else np.concatenate(([0.0], t_grid))
                    series = qfi_curve(rho0, p, g, dt=dt, alpha=point["alpha"])
                    vals = series.values if start_at_zero else series.values[1:]
                    values[tuple(full_idx)] = vals
                else:
                    if point["t"] is None:
                        raise ParameterDomainError("qfi_t needs a time axis or fixed t")
                    values[tuple(full_idx)] = qfi_at(rho0, p, point["t"], dt=dt)
            elif spec.quantity == "qfi_steady":
                values[tuple(full_idx)] = _steady_qfi_point(
                    point["eta"], family, point["lambda"], point["beta"], dt)
            else:  # max_qfi
                p = ModelParams(eta=point["eta"], feedback=fb)
                rho0 = make_state(point["alpha"])
                t_max = fixed.get("t_max", 10.0)
                grid_n = fixed.get("grid_n", 64)
                values[tuple(full_idx)] = max_qfi_over_time(
                    rho0, p, t_max, grid_n=grid_n, dt=dt)[1]
        except QFeedbackError as exc:
            flat = np.ravel_multi_index(
                tuple(0 if isinstance(s, slice) else s for s in full_idx), shape)
            missing.append((int(flat), f"{type(exc).__name__}: {exc}"))
    return SweepTable(spec=spec, values=values, missing=tuple(missing))


# ---------------------------------------------------------------------------
# feedback optimization


@dataclass(frozen=True)
class OptimizeResult:
    best: dict
    value: float
    table: SweepTable


def _golden_max(f, a, b, tol):
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
    x = 0.5 * (a + b)
    return x, f(x)


def optimize_feedback(eta: float, family: str, objective: str = "steady_qfi",
                      lam_range=(0.0, 2.0), beta_range=(0.0, 2.0 * np.pi),
                      grid_n: int = 81, alpha: float = np.pi / 2,
                      t_max: float = 10.0, dt: float = 1e-3,
                      refine_passes: int = 3) -> OptimizeResult:
    """Exhaustive grid search plus cyclic per-axis golden-section refinement.

    Deterministic for fixed grids.  For the XY family the search is over
    (lambda, beta); for the Z family over lambda alone.
    """
    if objective not in ("steady_qfi", "max_t_qfi"):
        raise ParameterDomainError(f"unknown objective {objective!r}")
    if not (0.0 <= lam_range[0] < lam_range[1] <= 4.0):
        raise ParameterDomainError(f"lambda range must lie within [0, 4], got {lam_range!r}")
    if not (0.0 <= beta_range[0] < beta_range[1] <= 2.0 * np.pi):
        raise ParameterDomainError(f"beta range must lie within [0, 2 pi], got {beta_range!r}")

    def score(lam, beta):
        if objective == "steady_qfi":
            return _steady_qfi_point(eta, family, lam, beta, dt)
        fb = _feedback_from(family, lam, beta)
        return max_qfi_over_time(make_state(alpha), ModelParams(eta=eta, feedback=fb),
                                 t_max, dt=dt)[1]

    lam_grid = np.linspace(lam_range[0], lam_range[1], grid_n)
    if family == "xy":
        beta_grid = np.linspace(beta_range[0], beta_range[1], grid_n)
        axes = (("lambda", lam_grid), ("beta", beta_grid))
    else:
        beta_grid = np.array([0.0])
        axes = (("lambda", lam_grid),)
    spec = SweepSpec(axes=axes, quantity=objective.replace("max_t_qfi", "max_qfi")
                     .replace("steady_qfi", "qfi_steady"),
                     fixed={"feedback": family, "eta": eta, "alpha": alpha,
                            "t_max": t_max})
    table = sweep_grid(spec, dt=dt)
    vals = np.nan_to_num(table.values, nan=-np.inf)
    flat_best = int(np.argmax(vals))
    idx = np.unravel_index(flat_best, vals.shape)
    lam = float(lam_grid[idx[0]])
    beta = float(beta_grid[idx[1]]) if family == "xy" else 0.0
    best_val = float(vals[idx])

    dl = lam_grid[1] - lam_grid[0] if lam_grid.size > 1 else 0.0
    db = beta_grid[1] - beta_grid[0] if beta_grid.size > 1 else 0.0
    for _ in range(refine_passes):
        if dl > 0.0:
            a = max(lam_range[0], lam - dl)
            b = min(lam_range[1], lam + dl)
            lam, best_val = _golden_max(lambda x: score(x, beta), a, b, 1e-10 * max(1.0, b))
        if family == "xy" and db > 0.0:
            a = max(beta_range[0], beta - db)
            b = min(beta_range[1], beta + db)
            beta, best_val = _golden_max(lambda x: score(lam, x), a, b, 1e-10 * max(1.0, b))
    best = {"lambda": lam}
    if family == "xy":
        best["beta"] = beta
    return OptimizeResult(best=best, value=best_val, table=table)
