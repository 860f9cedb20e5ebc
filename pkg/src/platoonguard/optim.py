"""Adam with decoupled weight decay (AdamW).

Update rule, per parameter tensor theta with gradient g at step t >= 1:

    m_t = beta1 * m_{t-1} + (1 - beta1) * g
    v_t = beta2 * v_{t-1} + (1 - beta2) * g^2
    m_hat = m_t / (1 - beta1^t)
    v_hat = v_t / (1 - beta2^t)
    theta = theta - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * theta

The decay term uses the *pre-update* theta and is not part of the gradient
(decoupled), so it acts even when g = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lstm import zero_grads


@dataclass
class AdamWConfig:
    learning_rate: float = 0.001
    weight_decay: float = 0.004
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


@dataclass
class AdamWState:
    m: object  # LstmParams-shaped first moments
    v: object  # LstmParams-shaped second moments
    t: int = 0


def init_adamw(params):
    return AdamWState(m=zero_grads(params), v=zero_grads(params), t=0)


def adamw_step(params, grads, state, config):
    """One in-place AdamW update over every parameter tensor."""
    state.t += 1
    t = state.t
    b1, b2 = config.beta1, config.beta2
    lr, wd, eps = config.learning_rate, config.weight_decay, config.epsilon
    bc1 = 1.0 - b1 ** t
    bc2 = 1.0 - b2 ** t
    for theta, g, m, v in zip(params.tensors(), grads.tensors(), state.m.tensors(), state.v.tensors()):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        m_hat = m / bc1
        v_hat = v / bc2
        theta -= lr * wd * theta + lr * m_hat / (np.sqrt(v_hat) + eps)
    return params
