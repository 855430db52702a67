import logging
import warnings
from typing import Union

import numpy as np
from scipy.stats import qmc

from ..core.expr import Expr, to_numpy
from ..core.interval import Box
from ..models import AnalysisSettings, Sampler
from ..symbolic.diff import hessian_sym

logger = logging.getLogger(__name__)

UNDERESTIMATION_TOL = 1e-9
CONVEXITY_TOL = 1e-7


def sample_points(box: Box, count: int, seed: int = 0, sampler: Union[Sampler, str] = Sampler.HALTON) -> np.ndarray:
    """count scrambled low-discrepancy points of the box, shape (count, n)."""
    if Sampler(sampler) is Sampler.SOBOL:
        engine = qmc.Sobol(d=box.dim, scramble=True, seed=seed)
    else:
        engine = qmc.Halton(d=box.dim, scramble=True, seed=seed)
    with warnings.catch_warnings():
        # Sobol balance warning for counts that are not powers of two
        warnings.simplefilter("ignore", UserWarning)
        unit = engine.random(count)
    lower, upper = np.array(box.lower()), np.array(box.upper())
    return lower + unit * (upper - lower)


def verify_underestimation(f: Expr, g: Expr, box: Box, samples: int = 10_000, seed: int = 0,
                           sampler: Union[Sampler, str] = Sampler.HALTON) -> bool:
    """f(x) >= g(x) - 1e-9 at every sampled point."""
    X = sample_points(box, samples, seed, sampler).T
    F, G = to_numpy(f)(X), to_numpy(g)(X)
    ok = bool(np.all(F >= G - UNDERESTIMATION_TOL))
    if not ok:
        worst = int(np.argmax(G - F))
        logger.debug("underestimation fails at %s by %g", X[:, worst].tolist(), G[worst] - F[worst])
    return ok


def min_sampled_eigenvalue(g: Expr, box: Box, samples: int = 1_000, seed: int = 0,
                           sampler: Union[Sampler, str] = Sampler.HALTON) -> float:
    n = box.dim
    X = sample_points(box, samples, seed, sampler).T
    hessian = hessian_sym(g, n, simplified=False)
    stack = np.empty((X.shape[1], n, n))
    for i in range(n):
        for j in range(i, n):
            stack[:, i, j] = stack[:, j, i] = to_numpy(hessian[i, j])(X)
    return float(np.min(np.linalg.eigvalsh(stack)))


def verify_convexity_sampled(g: Expr, box: Box, samples: int = 1_000, seed: int = 0,
                             sampler: Union[Sampler, str] = Sampler.HALTON) -> bool:
    """Numeric Hessian of g has minimum eigenvalue >= -1e-7 at every sampled point."""
    return min_sampled_eigenvalue(g, box, samples, seed, sampler) >= -CONVEXITY_TOL


class VerifierNode:
    def __init__(self, settings: AnalysisSettings):
        self.settings = settings

    def process(self, state):
        s = self.settings
        f, g, box = state["objective"], state["underestimator"], state["box"]
        under = verify_underestimation(f, g, box, s.samples, s.seed, s.sampler)
        convex = verify_convexity_sampled(g, box, s.convexity_samples, s.seed, s.sampler)
        messages = []
        if not under:
            messages.append(f"g exceeds f at sampled points ({s.label()})")
        if not convex:
            messages.append(f"g is not convex at sampled points ({s.label()})")
        for message in messages:
            logger.warning("⚠️ %s", message)
        return {"verified_underestimation": under, "verified_convexity": convex, "warnings": messages}
