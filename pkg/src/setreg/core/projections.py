#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Cyclic projections and their observed convergence rate

x_{k+1} = P_{Ω_{(k mod m)+1}}(x_k).  The rate is read off a least-squares line through
log residuals over the second half of the run; residuals below 1e-13 are treated as
converged and left out of the fit.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import stats

from .config import EstimatorParams
from .exceptions import PreconditionError
from .moduli import DEFAULT_THRESHOLD, ModulusEstimate, zeta
from .scene import Scene
from ..services.parallel import ordered_map
from ..utils.logger import get_logger, log_function_call

logger = get_logger(__name__)

__all__ = ["RateFit", "Trajectory", "RateReport", "cyclic_project", "fit_rate", "rate_vs_zeta"]

RESIDUAL_FLOOR = 1e-13
SUBLINEAR_R2 = 0.9
SUBLINEAR_Q = 0.99
# a linear rate is expected to satisfy q < 1 − RATE_MARGIN·ζ²
RATE_MARGIN = 0.1


@dataclass(frozen=True)
class RateFit:
    """Geometric factor per cycle of m projections"""
    q: float
    r_squared: float
    tail_window: int
    sublinear: bool
    converged: bool = False

    def to_dict(self) -> Dict:
        return {"q": self.q, "r_squared": self.r_squared, "tail_window": self.tail_window,
                "sublinear": self.sublinear, "converged": self.converged}


@dataclass
class Trajectory:
    points: np.ndarray
    residuals: np.ndarray
    rate_fit: RateFit

    @property
    def iters(self) -> int:
        return len(self.points) - 1

    def rows(self) -> List[List[float]]:
        """iter, coordinates, residual"""
        return [[k] + list(map(float, x)) + [float(r)]
                for k, (x, r) in enumerate(zip(self.points, self.residuals))]

    def to_dict(self) -> Dict:
        return {
            "start": self.points[0].tolist(),
            "iters": self.iters,
            "final_residual": float(self.residuals[-1]),
            "rate_fit": self.rate_fit.to_dict(),
        }


def fit_rate(residuals: Sequence[float], m: int) -> RateFit:
    """Log-linear fit on the last half of the residuals; q is the factor per m steps"""
    residuals = np.asarray(residuals, dtype=float)
    tail = residuals[len(residuals) // 2:]
    usable = tail > RESIDUAL_FLOOR
    window = int(usable.sum())
    if window < 2:
        # the run reached the floating-point floor
        return RateFit(0.0, 1.0, window, False, converged=True)
    k = np.flatnonzero(usable)
    fit = stats.linregress(k, np.log(tail[usable]))
    r2 = float(fit.rvalue ** 2) if np.isfinite(fit.rvalue) else 1.0
    q = float(min(max(math.exp(m * fit.slope), 0.0), 1.0))
    return RateFit(q, r2, window, r2 < SUBLINEAR_R2 or q > SUBLINEAR_Q)


def cyclic_project(scene: Scene, start, iters: int,
                   p: Optional[EstimatorParams] = None) -> Trajectory:
    """Run ``iters`` cyclic projections from ``start``

    Residuals are d(x_k, ∩Ωᵢ), exact through the declared intersection or from the
    grid oracle otherwise.
    """
    if iters < 1:
        raise PreconditionError("iters must be >= 1")
    p = p or EstimatorParams()
    x = np.asarray(start, dtype=float).reshape(-1)
    if x.size != scene.dim:
        raise PreconditionError(f"start must have {scene.dim} coordinates")
    points = [x]
    for k in range(iters):
        x = scene.sets[k % scene.m].project(x)
        points.append(x)
    points = np.array(points)

    reach = float(np.linalg.norm(points - scene.xbar, axis=1).max())
    grid = p.oracle_grid.scaled(max(reach, p.rho_min))
    residuals, found = scene.intersection_distance(points, grid)
    if not np.all(found):
        logger.warning("交集距离预言机未找到部分迭代点的最近点")
    return Trajectory(points, residuals, fit_rate(residuals, scene.m))


@dataclass
class RateReport:
    zeta: ModulusEstimate
    trajectories: List[Trajectory]
    threshold: float
    bound: Optional[float]
    holds: Optional[bool]

    def to_dict(self) -> Dict:
        return {
            "zeta": self.zeta.value,
            "threshold": self.threshold,
            "bound": self.bound,
            "holds": self.holds,
            "trajectories": [t.to_dict() for t in self.trajectories],
        }


@log_function_call(logger)
def rate_vs_zeta(scene: Scene, p: EstimatorParams, starts: Sequence, iters: int,
                 threshold: float = DEFAULT_THRESHOLD) -> RateReport:
    """Fitted rates next to the ζ estimate

    For a convex scene with ζ above the threshold every fitted q must stay below
    1 − 0.1·ζ²; otherwise no assertion is made and ``holds`` is None.
    """
    starts = [np.asarray(s, dtype=float) for s in starts]
    if not starts:
        raise PreconditionError("at least one start point is required")
    estimate = zeta(scene, p)
    trajectories = ordered_map(lambda s: cyclic_project(scene, s, iters, p), starts, p.workers)

    bound = holds = None
    if scene.is_convex and estimate.value > threshold:
        bound = 1.0 - RATE_MARGIN * estimate.value ** 2
        holds = all(t.rate_fit.q < bound for t in trajectories)
        if not holds:
            logger.warning(f"拟合收敛率超出界限 {bound:.4f}")
    logger.info(f"收敛率对比: ζ={estimate.value:.4g} "
                f"q={[round(t.rate_fit.q, 4) for t in trajectories]}")
    return RateReport(estimate, trajectories, threshold, bound, holds)
