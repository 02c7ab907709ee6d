"""Tiny first-order ascent optimizers shared by the SGD estimators."""

from __future__ import annotations

import numpy as np

_ADAM_BETA1 = 0.9
_ADAM_BETA2 = 0.999
_ADAM_EPS = 1e-8


class PlainSgd:
    """theta <- theta + lr * grad (ascent)."""

    def step(self, params: dict, grads: dict, lr: float) -> dict:
        return {k: params[k] + lr * grads[k] for k in params}


class Adam:
    """Adam with bias correction, applied as an ascent method."""

    def __init__(self):
        self.m: dict = {}
        self.v: dict = {}
        self.t = 0

    def step(self, params: dict, grads: dict, lr: float) -> dict:
        self.t += 1
        out = {}
        for k, g in grads.items():
            m = _ADAM_BETA1 * self.m.get(k, 0.0) + (1.0 - _ADAM_BETA1) * g
            v = _ADAM_BETA2 * self.v.get(k, 0.0) + (1.0 - _ADAM_BETA2) * g * g
            self.m[k] = m
            self.v[k] = v
            m_hat = m / (1.0 - _ADAM_BETA1**self.t)
            v_hat = v / (1.0 - _ADAM_BETA2**self.t)
            out[k] = params[k] + lr * m_hat / (np.sqrt(v_hat) + _ADAM_EPS)
        return out


def make_optimizer(name: str):
    if name == "adam":
        return Adam()
    if name == "sgd":
        return PlainSgd()
    raise ValueError(f"unknown optimizer {name!r}; expected 'adam' or 'sgd'")
