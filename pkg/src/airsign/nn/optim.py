"""RMSprop with momentum.

Update rule per parameter element:
    v   <- rho * v + (1 - rho) * g^2
    mom <- mu * mom + lr * g / (sqrt(v) + eps)
    p   <- p - mom
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeError, ValidationError


@dataclass(frozen=True)
class OptimizerConfig:
    lr: float = 1e-4
    rho: float = 0.9
    eps: float = 1e-8
    momentum: float = 0.9
    batch_size: int = 128
    max_epochs: int = 100

    def __post_init__(self):
        if self.lr <= 0:
            raise ValidationError("lr must be > 0")
        if not (0.0 <= self.rho < 1.0):
            raise ValidationError("rho must be in [0, 1)")
        if self.eps <= 0:
            raise ValidationError("eps must be > 0")
        if not (0.0 <= self.momentum < 1.0):
            raise ValidationError("momentum must be in [0, 1)")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise ValidationError("batch_size and max_epochs must be >= 1")


class RMSprop:
    """Owns the per-parameter state; parameters are updated in place."""

    def __init__(self, params: list, cfg: OptimizerConfig):
        self.cfg = cfg
        self.sq_avg = [np.zeros_like(p) for p in params]
        self.mom = [np.zeros_like(p) for p in params]
        self._shapes = [p.shape for p in params]

    def step(self, params: list, grads: list) -> None:
        if len(params) != len(self._shapes) or len(grads) != len(self._shapes):
            raise ShapeError("parameter/gradient count mismatch")
        c = self.cfg
        for p, g, v, m, shape in zip(params, grads, self.sq_avg, self.mom,
                                     self._shapes):
            if p.shape != shape or g.shape != shape:
                raise ShapeError(f"expected shape {shape}, got {p.shape}/{g.shape}")
            v *= c.rho
            v += (1.0 - c.rho) * g * g
            m *= c.momentum
            m += c.lr * g / (np.sqrt(v) + c.eps)
            p -= m
