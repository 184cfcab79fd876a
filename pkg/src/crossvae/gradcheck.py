"""Finite-difference gradient checker for the layer primitives.

The op under test must follow the layers.py contract: ``op(*inputs)`` returns
``(output, backward)`` where output is an ndarray or a tuple of ndarrays and
``backward`` maps output-shaped seed gradients to one gradient per array
input (a bare array is accepted for single-input ops).
"""

import numpy as np

from .errors import ValidationError


def grad_check(op, inputs, eps=1e-5, max_elements=None, rng=None, skip_nonsmooth=False):
    """Max relative error between analytic gradients and central differences.

    The scalar under test is the sum of all outputs. Per checked element the
    error is |g_a - g_n| / max(1e-8, |g_a| + |g_n|). Inputs are probed in
    double precision. When ``max_elements`` is set, at most that many elements
    per input are probed (a seeded random subset); otherwise all elements.

    With ``skip_nonsmooth``, every element is probed at eps and eps/2; when
    the two central differences disagree beyond finite-difference error
    levels, the function is not locally smooth there (a ReLU kink or an
    argmax flip crossed the probe interval) and the element is excluded.
    The test is independent of the analytic gradient, so a wrong analytic
    gradient at a smooth point is still caught.
    """
    inputs = [np.array(a, dtype=np.float64) for a in inputs]

    def scalar():
        out = op(*inputs)[0]
        if isinstance(out, tuple):
            return sum(float(np.sum(o)) for o in out)
        return float(np.sum(out))

    out, backward = op(*inputs)
    outs = out if isinstance(out, tuple) else (out,)
    seeds = tuple(np.ones_like(np.asarray(o)) for o in outs)
    grads = backward(*seeds)
    if isinstance(grads, np.ndarray):
        grads = (grads,)
    if len(grads) != len(inputs):
        raise ValidationError(
            f"grad_check: op returned {len(grads)} gradients for {len(inputs)} inputs"
        )
    for i, g in enumerate(grads):
        if not np.all(np.isfinite(g)):
            raise ValidationError(f"grad_check: non-finite analytic gradient for input {i}")

    max_err = 0.0
    for i, (a, g) in enumerate(zip(inputs, grads)):
        g = np.asarray(g)
        flat_positions = np.arange(a.size)
        if max_elements is not None and a.size > max_elements:
            r = rng if rng is not None else np.random.default_rng(0)
            flat_positions = r.choice(a.size, size=max_elements, replace=False)
            flat_positions.sort()
        flat = a.reshape(-1)
        gflat = g.reshape(-1)

        def central(pos, h):
            orig = flat[pos]
            flat[pos] = orig + h
            up = scalar()
            flat[pos] = orig - h
            down = scalar()
            flat[pos] = orig
            return (up - down) / (2.0 * h)

        for pos in flat_positions:
            g_n = central(pos, eps)
            if skip_nonsmooth:
                g_half = central(pos, eps / 2.0)
                if abs(g_n - g_half) > max(1e-4 * (abs(g_n) + abs(g_half)), 1e-6):
                    continue
            g_a = float(gflat[pos])
            err = abs(g_a - g_n) / max(1e-8, abs(g_a) + abs(g_n))
            if err > max_err:
                max_err = err
    return max_err
