"""Adam optimizer over named parameter dicts, written functionally.

Parameters are immutable tensors, so a step returns fresh tensors along
with the advanced optimizer state instead of mutating anything.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor


@dataclass
class AdamState:
    """First/second moment accumulators and the shared step counter."""

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def adam_step(
    params: dict[str, Tensor],
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float = 0.001,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[dict[str, Tensor], AdamState]:
    """One bias-corrected Adam update for every parameter named in `grads`.

    Parameters without a gradient entry are carried over untouched.
    """
    t = state.t + 1
    new_state = AdamState(dict(state.m), dict(state.v), t)
    new_params = dict(params)
    for name, grad in grads.items():
        p = params[name]
        g = np.asarray(grad, dtype=np.float64)
        if g.shape != p.shape:
            raise ValueError(
                f"gradient for '{name}' has shape {g.shape}, parameter is {p.shape}"
            )
        m = beta1 * state.m.get(name, 0.0) + (1.0 - beta1) * g
        v = beta2 * state.v.get(name, 0.0) + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        new_state.m[name] = m
        new_state.v[name] = v
        new_params[name] = Tensor(
            p.data - lr * m_hat / (np.sqrt(v_hat) + eps),
            requires_grad=p.requires_grad,
        )
    return new_params, new_state
