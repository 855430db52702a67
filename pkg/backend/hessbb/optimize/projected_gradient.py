"""Box-constrained minimization of smooth convex functions."""

import logging
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import OptimizeResult

logger = logging.getLogger(__name__)

ARMIJO = 1e-4
SHRINK = 0.5
MIN_STEP, MAX_STEP = 1e-10, 1e10

FunAndGrad = Callable[[np.ndarray], Tuple[float, np.ndarray]]


def projection(x: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    return np.clip(x, lower, upper)


def projected_gradient_norm(x: np.ndarray, grad: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> float:
    return float(np.linalg.norm(x - projection(x - grad, lower, upper)))


def minimize_box(
    fun: FunAndGrad,
    lower: Sequence[float],
    upper: Sequence[float],
    x0: Optional[Sequence[float]] = None,
    max_iter: int = 100_000,
    tol: float = 1e-9,
) -> OptimizeResult:
    """Projected gradient with a Barzilai-Borwein trial step and Armijo backtracking.

    fun returns (value, gradient). Stops when the projected-gradient norm is at most
    tol * (1 + |value|), when the line search can no longer make progress, or at
    max_iter (success=False).
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    x = projection(np.asarray(x0, dtype=float) if x0 is not None else 0.5 * (lower + upper), lower, upper)
    f, g = fun(x)
    step = 1.0
    x_prev = g_prev = None

    for k in range(1, max_iter + 1):
        if projected_gradient_norm(x, g, lower, upper) <= tol * (1.0 + abs(f)):
            return OptimizeResult(x=x, fun=f, jac=g, nit=k - 1, success=True, status=0,
                                  message="projected gradient below tolerance")

        if x_prev is not None:
            s, y = x - x_prev, g - g_prev
            sy = float(np.dot(s, y))
            step = float(np.clip(np.dot(s, s) / sy, MIN_STEP, MAX_STEP)) if sy > 0.0 else 1.0

        t = step
        while True:
            candidate = projection(x - t * g, lower, upper)
            f_new, g_new = fun(candidate)
            if f_new <= f + ARMIJO * float(np.dot(g, candidate - x)):
                break
            t *= SHRINK
            if t < 1e-20:
                # no representable decrease left along the projected arc
                return OptimizeResult(x=x, fun=f, jac=g, nit=k, success=True, status=1,
                                      message="line search stalled")

        x_prev, g_prev = x, g
        x, f, g = candidate, f_new, g_new

    logger.warning("⚠️ projected gradient hit the iteration cap (%d)", max_iter)
    return OptimizeResult(x=x, fun=f, jac=g, nit=max_iter, success=False, status=2,
                          message="iteration cap reached")
