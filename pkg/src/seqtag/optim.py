"""Optimizers, learning-rate decay, and gradient clipping.

Both optimizers mutate parameter data in place and keep their own state
buffers aligned with the parameter list they were built with.
"""

from __future__ import annotations

import math

import numpy as np

from .autodiff import Tensor
from .errors import ConfigError


def lr_schedule(lr_initial: float, epoch: int) -> float:
    """Learning rate after the given number of completed epochs under the
    recurrence lr_k = lr_{k-1} / (1 + 0.05 k), k starting at 1."""
    if epoch < 0:
        raise ConfigError("epoch must be non-negative")
    lr = lr_initial
    for k in range(1, epoch + 1):
        lr = lr / (1.0 + 0.05 * k)
    return lr


def clip_gradients(params: list[Tensor], clip_norm: float) -> float:
    """Scale all gradients so their global L2 norm is at most clip_norm.

    Returns the pre-clip global norm.
    """
    if clip_norm <= 0:
        raise ConfigError("clip_norm must be positive")
    total = 0.0
    for p in params:
        total += float(np.sum(p.grad * p.grad))
    norm = math.sqrt(total)
    if norm > clip_norm:
        factor = clip_norm / norm
        for p in params:
            p.grad *= factor
    return norm


class SGDMomentum:
    """v <- momentum * v + grad; param <- param - lr * v."""

    def __init__(self, params: list[Tensor], momentum: float = 0.9):
        if not 0.0 <= momentum < 1.0:
            raise ConfigError("momentum must be in [0, 1)")
        self.params = list(params)
        self.momentum = momentum
        self.velocity = [np.zeros_like(p.data) for p in self.params]

    def step(self, lr: float):
        for p, v in zip(self.params, self.velocity):
            v *= self.momentum
            v += p.grad
            p.data -= lr * v

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()


class AdamDecoupled:
    """Adaptive-moment update with bias correction and decoupled weight
    decay applied directly to the parameters."""

    def __init__(self, params: list[Tensor], betas=(0.9, 0.999),
                 eps: float = 1e-8, weight_decay: float = 0.01):
        b1, b2 = betas
        if not (0.0 <= b1 < 1.0 and 0.0 <= b2 < 1.0):
            raise ConfigError("betas must be in [0, 1)")
        if eps <= 0:
            raise ConfigError("eps must be positive")
        if weight_decay < 0:
            raise ConfigError("weight decay must be non-negative")
        self.params = list(params)
        self.betas = (b1, b2)
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self, lr: float):
        b1, b2 = self.betas
        self.t += 1
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for p, m, v in zip(self.params, self.m, self.v):
            g = p.grad
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            update = (m / c1) / (np.sqrt(v / c2) + self.eps)
            if self.weight_decay:
                update = update + self.weight_decay * p.data
            p.data -= lr * update

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()
