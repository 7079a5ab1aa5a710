"""Time integration to the stationary state and convergence-time measurement.

Both the quantum walk (density matrix) and the classical reference walk
(probability vector) are advanced with the same fixed-step classic
Runge-Kutta scheme and judged by the same diagonal norm

    ||rho(t) - rho*|| = sqrt( sum_i (rho_ii(t) - rho*_ii)^2 )

so their convergence times are directly comparable. The convergence time
tau is defined against the final stationary state, which is unknown while
integrating; we therefore run a two-pass scheme: first locate the
stationary state (successive-difference trigger plus a confirmation
window), then scan the stored checkpoints for the earliest time at which
the state enters the epsilon-ball and never leaves it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lindblad import DenseLiouvillian, LindbladGenerator, apply_split

TRACE_DRIFT_LIMIT = 1e-6
ZERO_EIGENVALUE_TOL = 1e-9


class IntegrationError(RuntimeError):
    """Numerical instability detected during time integration."""


class SpectralDegeneracyError(ValueError):
    """More than one near-zero eigenvalue: the stationary state is not unique."""


@dataclass(frozen=True)
class IntegrationConfig:
    dt: float = 0.01
    epsilon: float = 1e-8
    max_time: float = 1e6
    check_stride: int = 10

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_time <= self.dt:
            raise ValueError("max_time must exceed dt")
        if self.check_stride < 1:
            raise ValueError("check_stride must be >= 1")


@dataclass
class StationaryResult:
    rho_star: np.ndarray
    tau: float
    steps: int
    converged: bool
    trace_drift: float
    herm_defect: float
    checkpoint_times: np.ndarray
    checkpoint_dists: np.ndarray

    @property
    def scores(self) -> np.ndarray:
        """Occupation probabilities diag(rho*)."""
        return np.real(np.diagonal(self.rho_star)).copy()


@dataclass
class ClassicalResult:
    p_star: np.ndarray
    tau: float
    steps: int
    converged: bool
    checkpoint_times: np.ndarray
    checkpoint_dists: np.ndarray


class _ConvergenceTracker:
    """Shared two-pass bookkeeping over diagonal checkpoints.

    feed() returns True once the stationary state is confirmed. Afterwards
    finish() computes tau = earliest checkpoint time from which the
    epsilon-ball around the final diagonal is never left.
    """

    def __init__(self, diag0: np.ndarray, epsilon: float, window: float):
        self.eps = epsilon
        self.window = window
        self.times = [0.0]
        self.diags = [diag0.copy()]
        self.candidate: np.ndarray | None = None

    def feed(self, t: float, diag: np.ndarray) -> bool:
        prev = self.diags[-1]
        self.times.append(t)
        self.diags.append(diag.copy())
        if self.candidate is not None:
            if _norm(diag - self.candidate) < self.eps:
                return True
            self.candidate = None
        if _norm(diag - prev) < self.eps * self.window:
            self.candidate = diag.copy()
        return False

    def finish(self, diag_star: np.ndarray):
        dists = np.array([_norm(d - diag_star) for d in self.diags])
        outside = np.nonzero(dists >= self.eps)[0]
        tau = 0.0 if outside.size == 0 else self.times[outside[-1] + 1]
        return tau, np.array(self.times), dists


def _norm(x: np.ndarray) -> float:
    return float(np.sqrt(np.sum(x * x)))


def _rk4_matrix(gen: LindbladGenerator, re, im, dt: float, steps: int):
    for _ in range(steps):
        k1r, k1i = apply_split(gen, re, im)
        k2r, k2i = apply_split(gen, re + (0.5 * dt) * k1r, im + (0.5 * dt) * k1i)
        k3r, k3i = apply_split(gen, re + (0.5 * dt) * k2r, im + (0.5 * dt) * k2i)
        k4r, k4i = apply_split(gen, re + dt * k3r, im + dt * k3i)
        re = re + (dt / 6.0) * (k1r + 2.0 * (k2r + k3r) + k4r)
        im = im + (dt / 6.0) * (k1i + 2.0 * (k2i + k3i) + k4i)
    return re, im


def integrate_to_stationary(
    gen: LindbladGenerator,
    cfg: IntegrationConfig = IntegrationConfig(),
    rho0: np.ndarray | None = None,
    observer=None,
) -> StationaryResult:
    """Integrate d(rho)/dt to the stationary state and measure tau.

    Starts from the maximally mixed state rho = I/n unless ``rho0`` is
    given. Advances with fixed-step classic Runge-Kutta, checkpointing the
    diagonal every ``check_stride`` steps. Trace and Hermiticity are
    monitored at every checkpoint; drift beyond 1e-6 raises IntegrationError
    (the scheme is then unstable for this dt). If ``observer`` is given it
    is called as observer(t, rho) at every checkpoint.

    Returns converged=False (tau=nan) when max_time is exhausted.
    """
    n = gen.n
    if rho0 is None:
        re = np.eye(n) / n
        im = np.zeros((n, n))
    else:
        if rho0.shape != (n, n):
            raise ValueError("rho0 has wrong shape")
        re = np.ascontiguousarray(np.real(rho0), dtype=float)
        im = np.ascontiguousarray(np.imag(rho0), dtype=float)

    window = cfg.dt * cfg.check_stride
    tracker = _ConvergenceTracker(np.diagonal(re), cfg.epsilon, window)
    trace_drift = abs(np.trace(re) - 1.0)
    herm_defect = max(np.abs(re - re.T).max(), np.abs(im + im.T).max())
    if observer is not None:
        observer(0.0, re + 1j * im)

    steps = 0
    converged = False
    while steps * cfg.dt < cfg.max_time:
        re, im = _rk4_matrix(gen, re, im, cfg.dt, cfg.check_stride)
        steps += cfg.check_stride
        t = steps * cfg.dt
        diag = np.diagonal(re)
        if not np.all(np.isfinite(diag)):
            raise IntegrationError("state diverged (non-finite entries); reduce dt")
        trace_drift = max(trace_drift, abs(diag.sum() - 1.0))
        if trace_drift > TRACE_DRIFT_LIMIT:
            raise IntegrationError(
                f"trace drifted by {trace_drift:.2e} at t={t:.2f}; reduce dt"
            )
        herm_defect = max(
            herm_defect, np.abs(re - re.T).max(), np.abs(im + im.T).max()
        )
        if observer is not None:
            observer(t, re + 1j * im)
        if tracker.feed(t, diag):
            converged = True
            break

    tau, times, dists = tracker.finish(np.diagonal(re))
    return StationaryResult(
        rho_star=re + 1j * im,
        tau=tau if converged else math.nan,
        steps=steps,
        converged=converged,
        trace_drift=float(trace_drift),
        herm_defect=float(herm_defect),
        checkpoint_times=times,
        checkpoint_dists=dists,
    )


def classical_stationary(
    g: np.ndarray, epsilon: float = 1e-10, max_iterations: int = 10 ** 6
) -> np.ndarray:
    """Stationary distribution of a column-stochastic matrix by power iteration.

    Iterates p <- G p from the uniform vector until the successive L1
    difference drops below epsilon. Requires strictly positive off-diagonal
    coupling (a Google matrix) for guaranteed convergence; plain transition
    matrices converge only when irreducible and aperiodic.
    """
    n = g.shape[0]
    p = np.full(n, 1.0 / n)
    for _ in range(max_iterations):
        p_next = g @ p
        if np.abs(p_next - p).sum() < epsilon:
            return p_next / p_next.sum()
        p = p_next
    raise RuntimeError(f"power iteration did not converge in {max_iterations} iterations")


def classical_convergence_time(
    g: np.ndarray, cfg: IntegrationConfig = IntegrationConfig()
) -> ClassicalResult:
    """Convergence time of the continuous classical walk dp/dt = (G - I) p.

    Uses the same integrator, step, epsilon, and diagonal norm as
    integrate_to_stationary, starting from the uniform vector, so the
    returned tau is the classical denominator for every speedup ratio.
    """
    n = g.shape[0]
    m = g - np.eye(n)
    p = np.full(n, 1.0 / n)
    window = cfg.dt * cfg.check_stride
    tracker = _ConvergenceTracker(p, cfg.epsilon, window)
    dt = cfg.dt

    steps = 0
    converged = False
    while steps * dt < cfg.max_time:
        for _ in range(cfg.check_stride):
            k1 = m @ p
            k2 = m @ (p + (0.5 * dt) * k1)
            k3 = m @ (p + (0.5 * dt) * k2)
            k4 = m @ (p + dt * k3)
            p = p + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        steps += cfg.check_stride
        if not np.all(np.isfinite(p)):
            raise IntegrationError("state diverged (non-finite entries); reduce dt")
        if abs(p.sum() - 1.0) > TRACE_DRIFT_LIMIT:
            raise IntegrationError("probability mass drifted; reduce dt")
        if tracker.feed(steps * dt, p):
            converged = True
            break

    tau, times, dists = tracker.finish(p)
    return ClassicalResult(
        p_star=p,
        tau=tau if converged else math.nan,
        steps=steps,
        converged=converged,
        checkpoint_times=times,
        checkpoint_dists=dists,
    )


def spectral_tau(dl: DenseLiouvillian) -> float:
    """Convergence-time bound 1/|Re lambda_1| from the generator spectrum.

    lambda_1 is the nonzero eigenvalue with the largest (least negative)
    real part; the zero eigenvalue must be unique within 1e-9, otherwise
    the stationary state is degenerate and SpectralDegeneracyError is
    raised (e.g. q=1 on a disconnected graph).
    """
    eigenvalues = np.linalg.eigvals(dl.matrix)
    near_zero = np.abs(eigenvalues) < ZERO_EIGENVALUE_TOL
    n_zero = int(near_zero.sum())
    if n_zero != 1:
        raise SpectralDegeneracyError(
            f"expected exactly one zero eigenvalue, found {n_zero}; "
            "the generator is not relaxing (is the rate matrix all-to-all?)"
        )
    nonzero = eigenvalues[~near_zero]
    lambda_1 = nonzero[np.argmax(nonzero.real)]
    return 1.0 / abs(lambda_1.real)
