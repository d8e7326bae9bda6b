"""Post-run analysis: rotation geometry, superposition balance, ensemble
statistics, and the run-time-versus-accuracy exponential fit."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import generator_stack

__all__ = [
    "BlochDecomposition",
    "EnsembleStats",
    "FitResult",
    "PreparedState",
    "balance_condition_check",
    "bloch_decompose",
    "ensemble_stats",
    "fit_exponential",
    "hold_last",
    "mean_fitness_curves",
    "prepared_state",
    "quantile_bins",
]

DEGENERATE_SIN = 1e-9
DEGENERATE_AMPLITUDE = 1e-12


@dataclass(frozen=True)
class BlochDecomposition:
    """A 2x2 unitary as cos(theta) I - i sin(theta) (axis . sigma).

    The rotation moves Bloch vectors by ``2 * theta`` about ``axis``.
    ``residual`` is the max-norm gap between the reconstruction and the
    phase-stripped input; ``degenerate`` marks near-zero rotations where the
    axis is conventional (0, 0, 1).
    """

    theta: float
    axis: np.ndarray
    residual: float
    degenerate: bool


@dataclass(frozen=True)
class PreparedState:
    """Polar form of a qubit state: alpha |0> + e^{i phi} sqrt(1-alpha^2) |1>.

    ``degenerate`` marks states on a pole, where the relative phase is
    meaningless and reported as 0.
    """

    alpha: float
    phi: float
    degenerate: bool


@dataclass(frozen=True)
class FitResult:
    """Parameters of q = a * exp(-b * eps) + c with linearized standard errors."""

    a: float
    b: float
    c: float
    a_err: float
    b_err: float
    c_err: float
    rss: float
    converged: bool
    n_iter: int


@dataclass(frozen=True)
class EnsembleStats:
    """Cross-run statistics.

    Per-generation arrays are indexed from generation 1; ``counts[g]`` is the
    number of runs that lasted at least ``g+1`` generations (shorter runs drop
    out of later samples).  Alpha statistics summarize the supplied prepared
    states; the histogram counts runs per termination generation.
    """

    mean_fitness: np.ndarray
    std_fitness: np.ndarray
    counts: np.ndarray
    alpha_mean: float
    alpha_std: float
    n_alpha: int
    qc_values: np.ndarray
    qc_counts: np.ndarray


def _check_unitary_2x2(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {u.shape}")
    if np.max(np.abs(u.conj().T @ u - np.eye(2))) > 1e-10:
        raise ValueError("matrix is not unitary within tolerance")
    return u


def bloch_decompose(u: np.ndarray) -> BlochDecomposition:
    """Rotation angle and axis of a 2x2 unitary, ignoring global phase.

    The phase is stripped with the principal square root of the determinant;
    the angle is folded into [0, pi] with the axis sign absorbing the rest.
    """
    u = _check_unitary_2x2(u)
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    su = u / np.sqrt(det)
    cos_t = min(1.0, max(-1.0, float((su[0, 0] + su[1, 1]).real) / 2.0))
    theta = math.acos(cos_t)
    sin_t = math.sin(theta)
    sigma = generator_stack(2)
    if sin_t > DEGENERATE_SIN:
        traces = np.einsum("ij,kji->k", su, sigma)
        axis = -traces.imag / (2.0 * sin_t)
        axis = axis / np.linalg.norm(axis)
        degenerate = False
    else:
        axis = np.array([0.0, 0.0, 1.0])
        degenerate = True
    recon = cos_t * np.eye(2) - 1j * sin_t * np.einsum("k,kij->ij", axis, sigma)
    residual = float(np.max(np.abs(recon - su)))
    return BlochDecomposition(theta=theta, axis=axis, residual=residual, degenerate=degenerate)


def prepared_state(u1: np.ndarray, psi_in: np.ndarray) -> PreparedState:
    """Polar form of the state the first unitary prepares from ``psi_in``."""
    u1 = _check_unitary_2x2(u1)
    psi = np.asarray(psi_in, dtype=complex)
    if psi.shape != (2,):
        raise ValueError(f"expected a qubit state, got shape {psi.shape}")
    s = u1 @ psi
    a0 = abs(s[0])
    a1 = abs(s[1])
    alpha = min(a0, 1.0)
    if a0 < DEGENERATE_AMPLITUDE or a1 < DEGENERATE_AMPLITUDE:
        return PreparedState(alpha=alpha, phi=0.0, degenerate=True)
    raw = math.atan2(s[1].imag, s[1].real) - math.atan2(s[0].imag, s[0].real)
    phi = math.pi - (math.pi - raw) % (2.0 * math.pi)  # wrap into (-pi, pi]
    return PreparedState(alpha=alpha, phi=phi, degenerate=False)


def balance_condition_check(ps: PreparedState, tol: float) -> bool:
    """Is the prepared state within ``tol`` of the equal-weight equator?"""
    return abs(ps.alpha - 1.0 / math.sqrt(2.0)) <= tol


def hold_last(series: np.ndarray, horizon: int) -> np.ndarray:
    """Extend a per-generation series to ``horizon`` entries by repeating the
    final value (a terminated run keeps reporting its settled fitness)."""
    s = np.asarray(series, dtype=float)
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if s.size >= horizon:
        return s[:horizon].copy()
    return np.concatenate([s, np.full(horizon - s.size, s[-1])])


def mean_fitness_curves(records, horizon: int):
    """Ensemble mean and standard deviation of the mean-fitness curves,
    holding each run's last value out to ``horizon`` generations."""
    if not records:
        raise ValueError("need at least one run")
    m = np.stack([hold_last(r.mean_fitness, horizon) for r in records])
    return m.mean(axis=0), m.std(axis=0)


def ensemble_stats(records, analyses=()) -> EnsembleStats:
    """Aggregate many runs (and optionally their prepared states).

    Statistics are permutation-invariant in the record order.
    """
    records = list(records)
    if not records:
        raise ValueError("need at least one run record")
    g_max = max(r.q_c for r in records)
    mean = np.empty(g_max)
    std = np.empty(g_max)
    counts = np.empty(g_max, dtype=np.int64)
    for g in range(g_max):
        # sorted reduction keeps the statistics permutation-invariant bit for bit
        vals = np.sort([r.mean_fitness[g] for r in records if r.q_c > g])
        counts[g] = vals.size
        mean[g] = vals.mean()
        std[g] = vals.std()
    alphas = np.sort([ps.alpha for ps in analyses])
    if alphas.size:
        alpha_mean = float(alphas.mean())
        alpha_std = float(alphas.std())
    else:
        alpha_mean = math.nan
        alpha_std = math.nan
    qc_values, qc_counts = np.unique([r.q_c for r in records], return_counts=True)
    return EnsembleStats(
        mean_fitness=mean,
        std_fitness=std,
        counts=counts,
        alpha_mean=alpha_mean,
        alpha_std=alpha_std,
        n_alpha=int(alphas.size),
        qc_values=qc_values,
        qc_counts=qc_counts,
    )


def quantile_bins(eps: np.ndarray, q: np.ndarray, n_bins: int = 20):
    """Bin (eps, q) points into equal-count bins by eps and return bin means.

    Bin sizes differ by at most one; empty bins (when ``n_bins`` exceeds the
    point count) are dropped.
    """
    eps = np.asarray(eps, dtype=float)
    q = np.asarray(q, dtype=float)
    if eps.shape != q.shape or eps.ndim != 1:
        raise ValueError("eps and q must be 1-d arrays of equal length")
    if n_bins < 1:
        raise ValueError(f"n_bins must be >= 1, got {n_bins}")
    order = np.argsort(eps, kind="stable")
    eps_out, q_out = [], []
    for chunk in np.array_split(order, n_bins):
        if chunk.size:
            eps_out.append(eps[chunk].mean())
            q_out.append(q[chunk].mean())
    return np.array(eps_out), np.array(q_out)


def _model(params: np.ndarray, eps: np.ndarray) -> np.ndarray:
    a, b, c = params
    return a * np.exp(-b * eps) + c


def fit_exponential(eps, q, init=None, max_iter: int = 200) -> FitResult:
    """Least-squares fit of q = a * exp(-b * eps) + c by damped Gauss-Newton.

    Initialization: ``c0`` slightly below the smallest q, then a log-linear
    regression of ``log(q - c0)`` on eps for ``(a0, b0)``; pass ``init`` to
    override.  Damping starts at 1e-3, grows tenfold when a step increases
    the residual and shrinks tenfold when it decreases; iteration stops when
    the relative residual change drops below 1e-10 (or the residual hits the
    rounding floor).  Singular normal equations or hitting the iteration cap
    yield a flagged, not raised, non-converged result.  Standard errors come
    from the linearized covariance at the solution.
    """
    eps = np.asarray(eps, dtype=float)
    q = np.asarray(q, dtype=float)
    if eps.shape != q.shape or eps.ndim != 1:
        raise ValueError("eps and q must be 1-d arrays of equal length")
    if eps.size < 4:
        raise ValueError(f"need at least 4 points, got {eps.size}")
    if np.any(eps < 0):
        raise ValueError("eps values must be non-negative")
    if np.all(eps == eps[0]):
        raise ValueError("eps values must not all be equal")

    if init is None:
        margin = max(0.05 * (q.max() - q.min()), 1e-6)
        c0 = q.min() - margin
        slope, intercept = np.polyfit(eps, np.log(q - c0), 1)
        params = np.array([math.exp(intercept), -slope, c0])
    else:
        params = np.asarray(init, dtype=float).copy()
        if params.shape != (3,):
            raise ValueError("init must supply (a, b, c)")

    r = q - _model(params, eps)
    rss = float(r @ r)
    floor = eps.size * (1e-13 * max(1.0, float(np.max(np.abs(q))))) ** 2
    lam = 1e-3
    converged = rss <= floor
    n_iter = 0
    singular = False
    while not converged and n_iter < max_iter:
        n_iter += 1
        decay = np.exp(-params[1] * eps)
        jac = np.column_stack([decay, -params[0] * eps * decay, np.ones_like(eps)])
        normal = jac.T @ jac
        damped = normal + lam * np.diag(np.diag(normal))
        try:
            step = np.linalg.solve(damped, jac.T @ r)
        except np.linalg.LinAlgError:
            singular = True
            break
        trial = params + step
        r_trial = q - _model(trial, eps)
        rss_trial = float(r_trial @ r_trial)
        if not np.isfinite(rss_trial) or rss_trial > rss:
            lam *= 10.0
            continue
        rel_change = abs(rss - rss_trial) / max(rss, 1e-300)
        params, r, rss = trial, r_trial, rss_trial
        lam /= 10.0
        if rel_change < 1e-10 or rss <= floor:
            converged = True

    a, b, c = (float(v) for v in params)
    errs = (math.nan, math.nan, math.nan)
    if not singular:
        decay = np.exp(-b * eps)
        jac = np.column_stack([decay, -a * eps * decay, np.ones_like(eps)])
        dof = eps.size - 3
        try:
            cov = rss / dof * np.linalg.inv(jac.T @ jac)
            diag = np.diag(cov)
            if np.all(diag >= 0):
                errs = tuple(float(math.sqrt(v)) for v in diag)
        except np.linalg.LinAlgError:
            pass
    return FitResult(
        a=a, b=b, c=c,
        a_err=errs[0], b_err=errs[1], c_err=errs[2],
        rss=rss, converged=bool(converged), n_iter=n_iter,
    )
