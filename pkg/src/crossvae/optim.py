"""RMSProp: per-element squared-gradient accumulator with rsqrt scaling."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .params import ParamStore


@dataclass
class RmspropState:
    lr: float = 1e-3
    rho: float = 0.9
    eps: float = 1e-8
    v: dict[str, np.ndarray] = field(default_factory=dict)


def init_rmsprop(store: ParamStore, lr=1e-3, rho=0.9, eps=1e-8) -> RmspropState:
    return RmspropState(lr, rho, eps, {name: np.zeros_like(p.value) for name, p in store.items()})


def rmsprop_step(store: ParamStore, state: RmspropState) -> None:
    """v <- rho*v + (1-rho)*g^2; theta <- theta - lr*g / (sqrt(v) + eps), in place."""
    for name, p in store.items():
        v = state.v.get(name)
        if v is None or v.shape != p.value.shape:
            got = None if v is None else v.shape
            raise ShapeError(
                f"rmsprop state for {name!r} has shape {got}, parameter has {p.value.shape}"
            )
        g = p.grad
        v *= state.rho
        v += (1.0 - state.rho) * g * g
        p.value -= state.lr * g / (np.sqrt(v) + state.eps)
