"""AdamW with linear learning-rate decay, plus a finite-difference gradient check.

All model parameters live in plain float64 numpy arrays grouped in a
dict; the optimizer mutates them in place.  Gradients are computed
analytically by the callers, so :func:`check_gradient` is the safety net
that every loss implementation is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import NumericError

Params = dict[str, np.ndarray]
Grads = Mapping[str, np.ndarray]


@dataclass
class AdamW:
    """Decoupled weight decay Adam with a linear schedule to zero.

    The effective learning rate at step t (1-based) is
    ``lr * (total_steps - (t - 1)) / total_steps`` so the first step
    uses the full ``lr`` and the step after ``total_steps`` would use 0.
    """

    params: Params
    lr: float = 1e-3
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    weight_decay: float = 0.01
    total_steps: int = 1
    step_count: int = field(default=0, init=False)

    def __post_init__(self) -> None:
        if self.total_steps < 1:
            raise ValueError("total_steps must be >= 1")
        self._m = {k: np.zeros_like(v) for k, v in self.params.items()}
        self._v = {k: np.zeros_like(v) for k, v in self.params.items()}

    @property
    def current_lr(self) -> float:
        """Learning rate that the *next* call to :meth:`step` will use."""
        t = self.step_count + 1
        frac = max(self.total_steps - (t - 1), 0) / self.total_steps
        return self.lr * frac

    def step(self, grads: Grads) -> None:
        for key, grad in grads.items():
            if not np.all(np.isfinite(grad)):
                raise NumericError(f"non-finite gradient for parameter {key!r}")
        lr_t = self.current_lr
        self.step_count += 1
        beta1, beta2 = self.betas
        t = self.step_count
        for key, grad in grads.items():
            m = self._m[key]
            v = self._v[key]
            m *= beta1
            m += (1 - beta1) * grad
            v *= beta2
            v += (1 - beta2) * grad * grad
            m_hat = m / (1 - beta1**t)
            v_hat = v / (1 - beta2**t)
            p = self.params[key]
            p -= lr_t * m_hat / (np.sqrt(v_hat) + self.eps)
            p -= lr_t * self.weight_decay * p


def check_gradient(
    loss_and_grad_fn: Callable[[Params], tuple[float, Grads]],
    params: Params,
    rng: np.random.Generator,
    n_samples: int = 20,
    h: float = 1e-5,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    For each sampled coordinate the relative error is
    ``|analytic - numeric| / max(1, |numeric|)``; the returned value is
    the maximum over all sampled coordinates of all parameters.
    """
    _, grads = loss_and_grad_fn(params)
    worst = 0.0
    for key, p in params.items():
        flat = p.reshape(-1)
        n_coords = min(n_samples, flat.size)
        coords = rng.choice(flat.size, size=n_coords, replace=False)
        for idx in coords:
            orig = flat[idx]
            flat[idx] = orig + h
            loss_plus, _ = loss_and_grad_fn(params)
            flat[idx] = orig - h
            loss_minus, _ = loss_and_grad_fn(params)
            flat[idx] = orig
            numeric = (loss_plus - loss_minus) / (2 * h)
            analytic = np.asarray(grads[key]).reshape(-1)[idx]
            err = abs(analytic - numeric) / max(1.0, abs(numeric))
            worst = max(worst, err)
    return worst
