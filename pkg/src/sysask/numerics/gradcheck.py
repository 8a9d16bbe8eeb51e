"""Finite-difference verification oracle for autodiff gradients.

Deliberately independent of the tape: it only calls the forward function
and perturbs raw parameter arrays.
"""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, backward


def grad_check(f, params: dict[str, Tensor], h: float = 1e-5) -> float:
    """Compare autodiff gradients of scalar `f()` against central differences.

    `f` must be a zero-argument callable returning a scalar Tensor whose
    value depends on `params`. Returns the max relative error over all
    parameter entries.
    """
    for p in params.values():
        p.zero_grad()
    loss = f()
    backward(loss)
    analytic = {name: (np.zeros_like(p.values) if p.grad is None else p.grad.copy())
                for name, p in params.items()}

    worst = 0.0
    for name, p in params.items():
        flat = p.values.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            fp = float(f().values)
            flat[i] = orig - h
            fm = float(f().values)
            flat[i] = orig
            numeric = (fp - fm) / (2.0 * h)
            a = analytic[name].reshape(-1)[i]
            denom = max(abs(a), abs(numeric), 1e-8)
            worst = max(worst, abs(a - numeric) / denom)
    for p in params.values():
        p.zero_grad()
    return worst
