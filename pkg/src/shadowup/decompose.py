"""Split a value plane into smooth illumination and detail reflectance.

The illumination is the minimizer of a weighted least-squares objective:
data fidelity to the value plane plus an edge-aware smoothness penalty on
forward differences. The normal equations give a symmetric positive
definite system solved iteratively, matrix-free.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, InvalidInputError

# Offset inside the log that sets the gradient scale for the weights.
LOG_EPS = 1e-3
# Illumination is kept at or above this so reflectance stays bounded.
ILLUMINATION_FLOOR = 1e-4


@dataclass(frozen=True)
class SolverConfig:
    lam: float = 0.5
    epsilon: float = 1e-3
    tolerance: float = 1e-5
    max_iters: int = 500

    def __post_init__(self):
        if self.lam < 0.0:
            raise InvalidInputError(f"lam must be >= 0, got {self.lam}")
        if not self.epsilon > 0.0:
            raise InvalidInputError(f"epsilon must be > 0, got {self.epsilon}")
        if not 0.0 < self.tolerance < 1.0:
            raise InvalidInputError(f"tolerance must be in (0, 1), got {self.tolerance}")
        if self.max_iters < 1:
            raise InvalidInputError(f"max_iters must be >= 1, got {self.max_iters}")


@dataclass(frozen=True)
class Decomposition:
    """Result of splitting a value plane, with solver diagnostics."""

    illumination: np.ndarray
    reflectance: np.ndarray
    residual: float
    iterations: int
    residual_history: np.ndarray = field(repr=False)


class IlluminationSystem:
    """Matrix-free operator x -> x + lam * div(w * grad(x)).

    Symmetric positive definite for any nonnegative weights: identity
    plus a weighted graph Laplacian on the pixel grid. Constants are
    fixed points of the operator.
    """

    def __init__(self, wx: np.ndarray, wy: np.ndarray, lam: float):
        self.wx = wx
        self.wy = wy
        self.lam = lam

    def apply(self, x: np.ndarray) -> np.ndarray:
        out = x.copy()
        gx = self.wx * (x[:, 1:] - x[:, :-1])
        out[:, :-1] -= self.lam * gx
        out[:, 1:] += self.lam * gx
        gy = self.wy * (x[1:, :] - x[:-1, :])
        out[:-1, :] -= self.lam * gy
        out[1:, :] += self.lam * gy
        return out


def smoothness_weights(values: np.ndarray, epsilon: float):
    """Edge-stopping weights 1 / (|grad log| + epsilon) per axis.

    Large log-domain gradients get small weights, so edges are preserved
    while flat regions are smoothed hard.
    """
    logv = np.log(values + LOG_EPS)
    wx = 1.0 / (np.abs(logv[:, 1:] - logv[:, :-1]) + epsilon)
    wy = 1.0 / (np.abs(logv[1:, :] - logv[:-1, :]) + epsilon)
    return wx, wy


def total_variation(values: np.ndarray) -> float:
    """Sum of absolute forward differences along both axes."""
    values = np.asarray(values, dtype=np.float64)
    return float(
        np.abs(np.diff(values, axis=0)).sum() + np.abs(np.diff(values, axis=1)).sum()
    )


def solve_spd(apply_op, b: np.ndarray, x0: np.ndarray, tolerance: float, max_iters: int):
    """Iteratively solve A x = b for a symmetric positive definite operator.

    Uses the conjugate residual recurrence, which minimizes the residual
    2-norm over the growing Krylov space. The returned history of relative
    residual norms is therefore non-increasing by construction.

    Args:
        apply_op: callable computing A x for an array x.
        b: right-hand side.
        x0: starting iterate.
        tolerance: relative residual norm at which to stop.
        max_iters: iteration budget.

    Returns:
        (solution, residual_history) where residual_history[k] is
        ||b - A x_k|| / ||b|| after k iterations.

    Raises:
        ConvergenceError: if the budget is exhausted first; carries the
            last iterate as .partial.
    """
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros_like(b), np.zeros(1)

    x = x0.astype(np.float64, copy=True)
    r = b - apply_op(x)
    history = [float(np.linalg.norm(r)) / b_norm]
    if history[0] <= tolerance:
        return x, np.asarray(history)

    p = r.copy()
    ar = apply_op(r)
    ap = ar.copy()
    rho = float(np.vdot(r, ar))
    for _ in range(max_iters):
        ap_sq = float(np.vdot(ap, ap))
        if ap_sq == 0.0:
            break
        alpha = rho / ap_sq
        x += alpha * p
        r -= alpha * ap
        history.append(float(np.linalg.norm(r)) / b_norm)
        if history[-1] <= tolerance:
            return x, np.asarray(history)
        ar = apply_op(r)
        rho_next = float(np.vdot(r, ar))
        beta = rho_next / rho
        rho = rho_next
        p = r + beta * p
        ap = ar + beta * ap

    if history[-1] <= tolerance:
        return x, np.asarray(history)
    raise ConvergenceError(
        f"solver did not reach tolerance {tolerance:g} within {max_iters} "
        f"iterations (residual {history[-1]:.3e})",
        residual=history[-1],
        iterations=len(history) - 1,
        partial=x,
    )


def decompose(value_plane: np.ndarray, config: SolverConfig = SolverConfig()) -> Decomposition:
    """Decompose a [0, 1] value plane into illumination times reflectance.

    The product of the two output planes reproduces the input to floating
    point rounding: reflectance is defined as value / illumination after
    the illumination is floored and forced to dominate the value plane.
    """
    v = np.asarray(value_plane, dtype=np.float64)
    if v.ndim != 2:
        raise InvalidInputError(f"expected a 2-D value plane, got shape {v.shape}")
    if not np.all(np.isfinite(v)) or (v.size and (v.min() < 0.0 or v.max() > 1.0)):
        raise InvalidInputError("value plane must be finite and within [0, 1]")

    wx, wy = smoothness_weights(v, config.epsilon)
    system = IlluminationSystem(wx, wy, config.lam)
    try:
        solution, history = solve_spd(
            system.apply, v, v, config.tolerance, config.max_iters
        )
    except ConvergenceError as exc:
        exc.partial = _finish(v, exc.partial, exc.residual, exc.iterations, None)
        raise
    return _finish(v, solution, float(history[-1]), len(history) - 1, history)


def _finish(v, solution, residual, iterations, history) -> Decomposition:
    illumination = np.clip(np.maximum(solution, v), ILLUMINATION_FLOOR, 1.0)
    reflectance = np.clip(v / illumination, 0.0, 1.0)
    if history is None:
        history = np.asarray([residual])
    return Decomposition(
        illumination=illumination,
        reflectance=reflectance,
        residual=residual,
        iterations=iterations,
        residual_history=np.asarray(history),
    )
