"""Bias-corrected adaptive gradient updates for the network parameters."""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor


def adam_step(param: np.ndarray, grad: np.ndarray, state: dict, lr: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> None:
    """One in-place update of ``param``; ``state`` holds m, v and the step count."""
    if not state:
        state["m"] = np.zeros_like(param)
        state["v"] = np.zeros_like(param)
        state["t"] = 0
    state["t"] += 1
    t = state["t"]
    m = state["m"]
    v = state["v"]
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)
    param -= (lr * m_hat / (np.sqrt(v_hat) + eps)).astype(param.dtype, copy=False)


class Adam:
    """Tracks per-tensor moment state and applies adam_step to each leaf."""

    def __init__(self, tensors: list[Tensor], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.tensors = list(tensors)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self._state = [dict() for _ in self.tensors]

    def step(self):
        for t, st in zip(self.tensors, self._state):
            if t.grad is None:
                continue
            adam_step(t.data, t.grad, st, self.lr, self.beta1, self.beta2, self.eps)

    def zero_grad(self):
        for t in self.tensors:
            t.grad = None
