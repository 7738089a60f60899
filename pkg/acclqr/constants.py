"""Certified constants of the LQR objective on a sublevel set.

All constants are valid on S_α, the set of stabilizing gains with cost
at most α. Matrix norms are spectral norms except for the ‖C‖_F factor
in the smoothness constant.
"""
from dataclasses import asdict, dataclass
import logging
import math
from typing import Any, Dict, Optional

import numpy as np

from acclqr.exceptions import InvalidAlpha, ZeroInput
from acclqr.problem import LqrProblem


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConstantsBundle:
    """Constants of f on the sublevel set of value alpha.

    Attributes:
        alpha: The sublevel value.
        xi: Gradient-size constant used in the smoothness bound.
        zeta: Bound on ‖K‖_F over the sublevel set.
        kappa1, kappa2, kappa3, kappa4: Intermediate constants of
                the Hessian Lipschitz bound.
        L1: Smoothness constant.
        L2: Lipschitz constant of the Hessian.
        mu: PL constant, if an optimal cost was given.
        kappa_cond: L1 / mu, if mu is available.
        f_star: The optimal cost used for mu, if any.
    """
    alpha: float
    xi: float
    zeta: float
    kappa1: float
    kappa2: float
    kappa3: float
    kappa4: float
    L1: float
    L2: float
    mu: Optional[float] = None
    kappa_cond: Optional[float] = None
    f_star: Optional[float] = None

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def constants(
        problem: LqrProblem, alpha: float,
        f_star: Optional[float] = None) -> ConstantsBundle:
    """Evaluates the certified constants at sublevel value alpha.

    Args:
        problem: The problem.
        alpha: The sublevel value, positive.
        f_star: A positive estimate of the optimal cost, needed for
                the PL constant mu.

    Raises:
        InvalidAlpha: If alpha is not positive.
        ZeroInput: If B is zero.
    """
    if not alpha > 0.0:
        raise InvalidAlpha('Sublevel value must be positive, got {}'.format(
            alpha))
    p = problem
    norm_b = float(np.linalg.norm(p.B, 2))
    if norm_b == 0.0:
        raise ZeroInput('The input matrix B is zero')
    if f_star is not None and not f_star > 0.0:
        raise ValueError('f_star must be positive, got {}'.format(f_star))

    norm_a = float(np.linalg.norm(p.A, 2))
    norm_c = float(np.linalg.norm(p.C, 2))
    fro_c = float(np.linalg.norm(p.C))
    sig_min = float(np.linalg.eigvalsh(p.Sigma)[0])
    q_min = float(np.linalg.eigvalsh(p.Q)[0])
    r_eigs = np.linalg.eigvalsh(p.R)
    r_min = float(r_eigs[0])
    r_max = float(r_eigs[-1])
    norm_r = float(np.linalg.norm(p.R, 2))

    zeta = 2.0 * norm_b * alpha / (sig_min * r_min) + norm_a / norm_b
    bc_term = norm_b * norm_c * alpha / sig_min
    kappa1 = (2.0 / q_min) * (bc_term + norm_c ** 2 * norm_r * zeta)
    kappa2 = kappa1
    kappa3 = (2.0 / q_min) * (
            (kappa1 + kappa2) * bc_term + norm_c ** 2 * norm_r)
    kappa4 = (2.0 / q_min) * (2.0 * kappa2 * bc_term + norm_c ** 2 * norm_r)

    ratio = alpha * norm_b / (sig_min * q_min)
    xi = (math.sqrt(p.n) * alpha / sig_min) * (
            ratio + math.sqrt(ratio ** 2 + r_max))
    l1 = (2.0 * alpha / q_min) * (r_max * norm_c ** 2 + norm_b * fro_c * xi)
    l2 = (2.0 * norm_b * norm_c * alpha ** 2 / (q_min * sig_min)
          * (2.0 * kappa3 + kappa4))

    mu = None   # type: Optional[float]
    kappa_cond = None   # type: Optional[float]
    if f_star is not None:
        mu = (r_min * sig_min ** 2 * q_min
              / (8.0 * f_star * (norm_a + norm_b ** 2 * alpha
                                 / (sig_min * r_min)) ** 2))
        kappa_cond = l1 / mu

    bundle = ConstantsBundle(
            alpha=alpha, xi=xi, zeta=zeta, kappa1=kappa1, kappa2=kappa2,
            kappa3=kappa3, kappa4=kappa4, L1=l1, L2=l2, mu=mu,
            kappa_cond=kappa_cond, f_star=f_star)
    logger.debug('Constants at alpha={}: L1={}, L2={}, mu={}'.format(
        alpha, l1, l2, mu))
    return bundle
