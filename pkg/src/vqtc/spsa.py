"""Simultaneous perturbation stochastic approximation (SPSA)."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .params import ParamStore

log = logging.getLogger(__name__)

Loss = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class SpsaConfig:
    """
    Gain schedules ``a_t = a / (A + t + 1)**alpha`` and
    ``c_t = c / (t + 1)**gamma``; ``A`` defaults to ``max_iters / 10``.
    """

    a: float = 0.05
    c: float = 0.06
    A: float | None = None
    alpha: float = 0.602
    gamma: float = 0.101
    max_iters: int = 100
    seed: int = 0
    batch_size: int | None = None
    eval_every: int = 10

    def __post_init__(self):
        if not (self.a > 0 and self.c > 0):
            raise ValueError("SPSA gains a and c must be positive")
        if not (0 < self.alpha <= 1 and 0 < self.gamma <= 1):
            raise ValueError("alpha and gamma must lie in (0, 1]")
        if self.max_iters < 0 or self.eval_every < 1:
            raise ValueError("max_iters must be >= 0 and eval_every >= 1")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be positive")

    @property
    def stability(self) -> float:
        return self.max_iters / 10 if self.A is None else self.A

    def gains(self, t: int) -> tuple[float, float]:
        a_t = self.a / (self.stability + t + 1) ** self.alpha
        c_t = self.c / (t + 1) ** self.gamma
        return a_t, c_t


def perturbation(seed: int, t: int, size: int) -> np.ndarray:
    """
    The ``±1`` direction used at iteration ``t``; a pure function of ``(seed, t)``.
    Entry ``i`` does not depend on ``size``, so extending the parameter
    vector leaves the leading directions unchanged.
    """
    rng = np.random.default_rng([seed, t])
    return np.where(rng.random(size) < 0.5, 1.0, -1.0)


def spsa_gradient(theta: np.ndarray, loss: Loss, t: int, cfg: SpsaConfig,
                  delta: np.ndarray | None = None) -> tuple[np.ndarray, float, float]:
    """Two-sided estimate ``[L(θ + cΔ) - L(θ - cΔ)] / (2 c Δ_i)``."""
    _, c_t = cfg.gains(t)
    if delta is None:
        delta = perturbation(cfg.seed, t, theta.size)
    pair = getattr(loss, "pair", None)
    if pair is not None:
        plus, minus = pair(theta + c_t * delta, theta - c_t * delta)
    else:
        plus, minus = loss(theta + c_t * delta), loss(theta - c_t * delta)
    return (plus - minus) / (2 * c_t * delta), plus, minus


def spsa_update(theta: np.ndarray, loss: Loss, t: int, cfg: SpsaConfig) -> np.ndarray:
    ghat, plus, minus = spsa_gradient(theta, loss, t, cfg)
    if not (math.isfinite(plus) and math.isfinite(minus)):
        log.warning("SPSA step %d rejected: non-finite loss (%r, %r)", t, plus, minus)
        return theta
    a_t, _ = cfg.gains(t)
    return theta - a_t * ghat


def spsa_step(params: ParamStore, loss: Loss, cfg: SpsaConfig) -> ParamStore:
    """One SPSA iteration at ``params.iteration``; returns a new store."""
    t = params.iteration
    theta = spsa_update(params.vector(), loss, t, cfg)
    return params.with_vector(theta, iteration=t + 1)


def minimize(loss: Loss, theta0: np.ndarray, cfg: SpsaConfig) -> np.ndarray:
    theta = np.asarray(theta0, dtype=float)
    for t in range(cfg.max_iters):
        theta = spsa_update(theta, loss, t, cfg)
    return theta
