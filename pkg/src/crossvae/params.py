"""Named parameter tensors with paired gradient storage."""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError


@dataclass
class Param:
    value: np.ndarray
    grad: np.ndarray


class ParamStore:
    """Insertion-ordered map of name -> (value, gradient of the same shape).

    Gradient accumulation and optimizer steps mutate the stored arrays in
    place; forward/backward code only reads values and adds into gradients.
    """

    def __init__(self):
        self._params: dict[str, Param] = {}

    def add(self, name: str, value: np.ndarray) -> np.ndarray:
        if name in self._params:
            raise ShapeError(f"parameter {name!r} registered twice")
        value = np.asarray(value)
        self._params[name] = Param(value, np.zeros_like(value))
        return value

    def __contains__(self, name):
        return name in self._params

    def __len__(self):
        return len(self._params)

    def names(self):
        return list(self._params)

    def items(self):
        return self._params.items()

    def value(self, name: str) -> np.ndarray:
        return self._params[name].value

    def grad(self, name: str) -> np.ndarray:
        return self._params[name].grad

    def set_value(self, name: str, value: np.ndarray) -> None:
        p = self._params[name]
        value = np.asarray(value, dtype=p.value.dtype)
        if value.shape != p.value.shape:
            raise ShapeError(
                f"parameter {name!r}: expected shape {p.value.shape}, got {value.shape}"
            )
        p.value[...] = value

    def add_grad(self, name: str, g: np.ndarray) -> None:
        p = self._params[name]
        if np.shape(g) != p.value.shape:
            raise ShapeError(
                f"gradient for {name!r}: expected shape {p.value.shape}, got {np.shape(g)}"
            )
        p.grad += g

    def zero_grads(self) -> None:
        for p in self._params.values():
            p.grad[...] = 0.0


def glorot_uniform(rng: np.random.Generator, shape, fan_in: int, fan_out: int, dtype=np.float64):
    """Uniform init in +-sqrt(6 / (fan_in + fan_out))."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)
