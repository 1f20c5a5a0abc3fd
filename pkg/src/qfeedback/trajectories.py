"""Stochastic unravelings of the perfect-detection feedback master equation.

Jump (photodetection) and diffusive (homodyne) conditioned dynamics whose
ensemble averages reduce to the deterministic master equation.  Both
unravelings are for unit detection efficiency; the inefficient case only
exists as the deterministic equation handled by :mod:`qfeedback.dynamics`.

The diffusive scheme propagates the (linear) deterministic drift with the
same one-step RK4 update used by the deterministic integrator and adds the
Wiener term in Euler-Maruyama fashion, so a forced-zero-noise trajectory
reproduces the deterministic flow to rounding rather than to first order.
After each step the trace is renormalized and any radial excess outside the
Bloch ball (a pure-discretization second-order artifact of the Euler noise
term) is projected away; ensemble means therefore carry a weak bias of
order dt.
The drift is assembled from the conditioned-equation form
(-i[H, rho] + D(c) rho - i[F, c rho + rho c+] + D(F) rho), an independent
route from the ensemble generator it must agree with.

Trajectory i draws its noise from a generator seeded by
SeedSequence(master_seed, spawn_key=(i,)), so ensembles are reproducible and
independent of batching or evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ModelParams, _rk4_step_matrix, coords_to_matrix, state_to_coords
from .errors import (
    AccuracyError,
    EmptyEnsembleError,
    GridMismatchError,
    ImpossibleJumpError,
    ParameterDomainError,
)
from .qubit import (
    IDENTITY,
    SIGMA_MINUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityMatrix,
    dag,
)

_BASIS = (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z)

_JUMP_PROB_CAP = 0.1
# Pre-projection excess of |r|^2 beyond the Bloch ball that marks the step as
# under-resolved.  The Euler noise kick leaves the ball by ~ dW^2 per step even
# when resolved (removed by the projection below); an excess this large means
# single increments are no longer small.
_BALL_EXCESS_LIMIT = 0.2


@dataclass(frozen=True)
class TrajectoryConfig:
    dt: float
    steps: int
    seed: int
    local_osc: float = 0.0  # jump unraveling only
    ntraj: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0.0):
            raise ParameterDomainError(f"dt must be positive, got {self.dt!r}")
        if self.steps < 1:
            raise ParameterDomainError("steps must be >= 1")
        if self.dt * self.steps > 20.0:
            raise ParameterDomainError("dt * steps must not exceed 20")
        if self.ntraj < 1:
            raise ParameterDomainError("ntraj must be >= 1")

    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.steps + 1)


@dataclass(frozen=True)
class TrajectoryRecord:
    """One conditioned trajectory: states, measurement record, noise, seed."""

    kind: str  # homodyne | jump
    times: np.ndarray
    states: np.ndarray  # (steps + 1, 2, 2) complex
    photocurrent: np.ndarray  # (steps,)
    noise: np.ndarray  # dW per step, or dN (0/1) per step for jumps
    seed: int
    index: int


# ---------------------------------------------------------------------------
# superoperators


def superop_g(r, rho):
    """Jump superoperator G[R]rho = R rho R+ / Tr[R rho R+] - rho."""
    r = np.asarray(r, dtype=complex)
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    num = r @ m @ dag(r)
    norm = float(np.trace(num).real)
    if norm <= 1e-14:
        raise ImpossibleJumpError(f"jump probability vanishes (Tr = {norm:.3e})")
    return num / norm - m


def superop_h(r, rho):
    """Measurement superoperator H[R]rho = R rho + rho R+ - Tr[R rho + rho R+] rho."""
    r = np.asarray(r, dtype=complex)
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    lin = r @ m + m @ dag(r)
    return lin - np.trace(lin).real * m


# ---------------------------------------------------------------------------
# Bloch-coordinate machinery (shared by both unravelings)


def _linear_map_matrix(fn):
    """Real 4x4 matrix of a Hermiticity-preserving linear map on 2x2 matrices."""
    m = np.empty((4, 4))
    for k, bk in enumerate(_BASIS):
        out = fn(0.5 * bk)
        for j, bj in enumerate(_BASIS):
            m[j, k] = np.trace(bj @ out).real
    return m


def _matvec(u, x):
    """(N, 4) @ (4, 4)^T with a fixed summation order, batch-size invariant."""
    cols = []
    for j in range(4):
        cols.append(u[j, 0] * x[:, 0] + u[j, 1] * x[:, 1]
                    + u[j, 2] * x[:, 2] + u[j, 3] * x[:, 3])
    return np.stack(cols, axis=1)


def _traj_rng(seed: int, index: int):
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(entropy=seed, spawn_key=(index,))))


def _check_unit_efficiency(p: ModelParams):
    if p.eta != 1.0:
        raise ParameterDomainError(
            "trajectory unravelings are defined for eta = 1 only "
            f"(got eta = {p.eta!r}); use dynamics.evolve for eta < 1")


def _dissipator_of(c):
    cdc = dag(c) @ c
    return lambda m: c @ m @ dag(c) - 0.5 * (cdc @ m + m @ cdc)


def _homodyne_maps(p: ModelParams):
    """Drift generator and measurement map of the conditioned equation."""
    f = p.feedback.matrix()
    c = np.sqrt(p.gamma_eff) * SIGMA_MINUS
    h = p.omega * p.gamma_eff * SIGMA_X
    dc = _dissipator_of(c)
    df = _dissipator_of(f)

    def drift(m):
        return (-1j * (h @ m - m @ h) + dc(m)
                - 1j * (f @ (c @ m + m @ dag(c)) - (c @ m + m @ dag(c)) @ f)
                + df(m))

    r = c - 1j * f
    meas = _linear_map_matrix(lambda m: r @ m + m @ dag(r))
    xquad = _linear_map_matrix(lambda m: (c + dag(c)) @ m)[0]  # Tr[x rho] row
    return _linear_map_matrix(drift), meas, xquad


def _project_to_ball(x, dt):
    """Scale Bloch vectors that left the unit ball back onto its surface.

    The Euler noise term pushes an exactly pure state out of the ball by the
    second-order amount ~ dW^2 every step; the exact conditioned flow keeps it
    on the surface, so the radial excess is pure discretization error and is
    removed here (the angular update is untouched).  An excess beyond
    _BALL_EXCESS_LIMIT means the increments themselves are not small and the
    step is rejected as too coarse.
    """
    r2 = x[:, 1] ** 2 + x[:, 2] ** 2 + x[:, 3] ** 2
    if np.any(r2 > 1.0 + _BALL_EXCESS_LIMIT):
        raise AccuracyError(
            f"conditioned state left the Bloch ball by more than "
            f"{_BALL_EXCESS_LIMIT:g}; decrease dt (currently {dt:g})")
    scale = np.where(r2 > 1.0, 1.0 / np.sqrt(np.maximum(r2, 1.0)), 1.0)
    x[:, 1] *= scale
    x[:, 2] *= scale
    x[:, 3] *= scale
    return x


def _run_homodyne_batch(x0, p, cfg, dw_batch, keep_paths):
    """Advance a batch of conditioned Bloch vectors through all steps.

    Returns (paths or None, photocurrents, per-step batch sums used for
    ensemble statistics): sums has shape (steps + 1, 2, 4) holding sum(x)
    and sum(x^2) over the batch at every time.
    """
    n = dw_batch.shape[0]
    drift_m, meas, xrow = _homodyne_maps(p)
    u = _rk4_step_matrix(drift_m, cfg.dt)
    x = np.tile(x0, (n, 1))
    paths = np.empty((n, cfg.steps + 1, 4)) if keep_paths else None
    current = np.empty((n, cfg.steps))
    sums = np.empty((cfg.steps + 1, 2, 4))
    if keep_paths:
        paths[:, 0] = x
    sums[0, 0] = x.sum(axis=0)
    sums[0, 1] = (x * x).sum(axis=0)
    for k in range(cfg.steps):
        dw = dw_batch[:, k]
        current[:, k] = (xrow[0] * x[:, 0] + xrow[1] * x[:, 1]
                         + xrow[2] * x[:, 2] + xrow[3] * x[:, 3]) + dw / cfg.dt
        x = _matvec(u, x)
        v = _matvec(meas, x)
        x = x + dw[:, None] * (v - v[:, 0:1] * x)
        x = x / x[:, 0:1]
        x = _project_to_ball(x, cfg.dt)
        if keep_paths:
            paths[:, k + 1] = x
        sums[k + 1, 0] = x.sum(axis=0)
        sums[k + 1, 1] = (x * x).sum(axis=0)
    return paths, current, sums


def _coords_to_states(path):
    return np.array([coords_to_matrix(x) for x in path])


def homodyne_trajectory(rho0: DensityMatrix, p: ModelParams, cfg: TrajectoryConfig,
                        index: int = 0, noise=None) -> TrajectoryRecord:
    """One diffusive (homodyne) conditioned trajectory.

    ``noise`` overrides the Wiener increments (e.g. an all-zero array to
    isolate the deterministic part); by default they are drawn from the
    per-trajectory seeded generator.
    """
    _check_unit_efficiency(p)
    if noise is None:
        dw = _traj_rng(cfg.seed, index).normal(0.0, np.sqrt(cfg.dt), cfg.steps)
    else:
        dw = np.asarray(noise, dtype=float)
        if dw.shape != (cfg.steps,):
            raise ParameterDomainError(f"noise must have shape ({cfg.steps},)")
    paths, current, _ = _run_homodyne_batch(
        state_to_coords(rho0), p, cfg, dw[None, :], keep_paths=True)
    return TrajectoryRecord(
        kind="homodyne", times=cfg.times(), states=_coords_to_states(paths[0]),
        photocurrent=current[0], noise=dw, seed=cfg.seed, index=index)


@dataclass(frozen=True)
class EnsembleResult:
    """Ensemble mean of conditioned trajectories with standard errors."""

    times: np.ndarray
    mean_bloch: np.ndarray  # (n_times, 3)
    stderr_bloch: np.ndarray  # (n_times, 3)
    ntraj: int

    def mean_state(self, i) -> np.ndarray:
        return coords_to_matrix(np.concatenate(([1.0], self.mean_bloch[i])))


def _sums_to_ensemble(times, sums, n) -> EnsembleResult:
    mean = sums[:, 0, 1:] / n
    if n > 1:
        var = (sums[:, 1, 1:] - n * mean**2) / (n - 1)
        se = np.sqrt(np.maximum(var, 0.0) / n)
    else:
        se = np.zeros_like(mean)
    return EnsembleResult(times=times, mean_bloch=mean, stderr_bloch=se, ntraj=n)


def homodyne_ensemble(rho0: DensityMatrix, p: ModelParams, cfg: TrajectoryConfig,
                      chunk: int = 2048) -> EnsembleResult:
    """Ensemble statistics over cfg.ntraj trajectories without storing them.

    Batches are processed in chunks; per-trajectory seeding makes every
    individual path exactly independent of the chunk size, and the
    accumulated statistics independent of it up to summation rounding.
    """
    _check_unit_efficiency(p)
    x0 = state_to_coords(rho0)
    total = np.zeros((cfg.steps + 1, 2, 4))
    for start in range(0, cfg.ntraj, chunk):
        count = min(chunk, cfg.ntraj - start)
        dw = np.empty((count, cfg.steps))
        for i in range(count):
            dw[i] = _traj_rng(cfg.seed, start + i).normal(0.0, np.sqrt(cfg.dt), cfg.steps)
        _, _, sums = _run_homodyne_batch(x0, p, cfg, dw, keep_paths=False)
        total += sums
    return _sums_to_ensemble(cfg.times(), total, cfg.ntraj)


def ensemble_mean(records) -> EnsembleResult:
    """Elementwise ensemble mean of explicit records, with standard errors."""
    records = list(records)
    if not records:
        raise EmptyEnsembleError("no trajectories to average")
    times = records[0].times
    for r in records[1:]:
        if r.times.shape != times.shape or not np.array_equal(r.times, times):
            raise GridMismatchError("trajectory records disagree on the time grid")
    blochs = np.array([[state_to_coords(m)[1:] for m in r.states] for r in records])
    n = len(records)
    mean = blochs.mean(axis=0)
    if n > 1:
        se = blochs.std(axis=0, ddof=1) / np.sqrt(n)
    else:
        se = np.zeros_like(mean)
    return EnsembleResult(times=times, mean_bloch=mean, stderr_bloch=se, ntraj=n)


# ---------------------------------------------------------------------------
# jump unraveling


def jump_trajectory(rho0: DensityMatrix, p: ModelParams, cfg: TrajectoryConfig,
                    index: int = 0) -> TrajectoryRecord:
    """One photodetection trajectory with local-oscillator amplitude cfg.local_osc.

    Per step the jump fires with probability Tr[(w^2 + w x + c+ c) rho] dt;
    a jump applies G[c + w], otherwise the no-jump drift H[-iH - w c - c+c/2]
    advances the state (Euler step).
    """
    _check_unit_efficiency(p)
    w = cfg.local_osc
    c = np.sqrt(p.gamma_eff) * SIGMA_MINUS
    h = p.omega * p.gamma_eff * SIGMA_X
    a = -1j * h - w * c - 0.5 * (dag(c) @ c)
    drift_lin = _linear_map_matrix(lambda m: a @ m + m @ dag(a))
    jump_lin = _linear_map_matrix(lambda m: (c + w * IDENTITY) @ m @ dag(c + w * IDENTITY))
    rate_row = _linear_map_matrix(
        lambda m: (w**2 * IDENTITY + w * (c + dag(c)) + dag(c) @ c) @ m)[0]

    rng = _traj_rng(cfg.seed, index)
    x = state_to_coords(rho0)[None, :]
    path = np.empty((cfg.steps + 1, 4))
    path[0] = x[0]
    events = np.zeros(cfg.steps)
    current = np.empty(cfg.steps)
    for k in range(cfg.steps):
        prob = float(rate_row @ x[0]) * cfg.dt
        if prob > _JUMP_PROB_CAP:
            raise AccuracyError(
                f"per-step jump probability {prob:.3f} exceeds {_JUMP_PROB_CAP}; decrease dt")
        current[k] = prob / cfg.dt
        if rng.random() < prob:
            num = _matvec(jump_lin, x)
            if num[0, 0] <= 1e-14:
                raise ImpossibleJumpError("jump drawn from a dark state")
            x = num / num[0, 0]
            events[k] = 1.0
        else:
            v = _matvec(drift_lin, x)
            x = x + cfg.dt * (v - v[:, 0:1] * x)
            x = x / x[:, 0:1]
        path[k + 1] = x[0]
    return TrajectoryRecord(
        kind="jump", times=cfg.times(), states=_coords_to_states(path),
        photocurrent=current, noise=events, seed=cfg.seed, index=index)
