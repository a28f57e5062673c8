"""First- and second-order averaging of the periodic standard form,
plus the reference closed-form averaged functions.

The quadrature is the uniform-grid mean over one period, which for a
smooth 2pi-periodic integrand is the trapezoidal rule and converges
spectrally; the integrands here are trigonometric polynomials of low
degree, so the default grids are already exact to roundoff. The inner
antiderivative needed at second order is taken in Fourier space for
the same reason: dividing the nonzero harmonics by ik integrates trig
polynomials exactly, where running prefix sums would cap the whole
field at quadrature-order accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import FirstOrderNotZero, InvalidFamily, InvalidInput

_PROBES = ((1.0, 0.0), (2.0, 1.0), (0.5, -1.5), (3.0, 5.0), (1.7, -3.2))
TWO_PI = 2.0 * np.pi


@dataclass
class AveragedField:
    order: int
    eval: Callable
    grid_size: int

    def __call__(self, r, w):
        return self.eval(r, w)


def _check_grid(grid_size: int, minimum: int):
    if grid_size < minimum or grid_size & (grid_size - 1):
        raise InvalidInput(
            "grid_size must be a power of two >= %d, got %r" % (minimum, grid_size)
        )


def _pointwise(fn):
    """Wrap a (theta-grid x points) kernel into an (r, w) evaluator
    accepting scalars or arrays of matching shape."""

    def eval_at(r, w):
        shape = np.broadcast_shapes(np.shape(r), np.shape(w))
        r_arr = np.broadcast_to(np.asarray(r, dtype=float), shape).ravel()
        w_arr = np.broadcast_to(np.asarray(w, dtype=float), shape).ravel()
        if r_arr.size == 0:
            return np.zeros((2,) + shape)
        out = fn(r_arr, w_arr)
        return out.reshape((2,) + shape)

    return eval_at


def average_first(field, grid_size: int = 512) -> AveragedField:
    """f0(r,w): the mean of the epsilon^1 part of the field over one
    period of theta."""
    _check_grid(grid_size, 64)
    thetas = TWO_PI * np.arange(grid_size) / grid_size

    def kernel(r, w):
        f1 = field.first(thetas[:, None], r[None, :], w[None, :])
        return f1.mean(axis=1)

    return AveragedField(order=1, eval=_pointwise(kernel), grid_size=grid_size)


def _antiderivative(samples: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """Cumulative integral from theta = 0 along axis 1 of samples on a
    uniform periodic grid, via the Fourier antiderivative; the nonzero
    mean contributes a linear ramp, so the endpoint value over a full
    period need not vanish."""
    n = samples.shape[1]
    hat = np.fft.fft(samples, axis=1)
    k = np.fft.fftfreq(n, d=1.0 / n)  # integer wavenumbers
    divisor = 1j * k
    divisor[0] = 1.0
    y_hat = hat / divisor.reshape((1, n) + (1,) * (samples.ndim - 2))
    y_hat[:, 0] = 0.0
    if n % 2 == 0:
        y_hat[:, n // 2] = 0.0
    periodic = np.fft.ifft(y_hat, axis=1).real
    periodic -= periodic[:, :1]
    mean = hat[:, 0].real / n
    ramp = thetas.reshape((1, n) + (1,) * (samples.ndim - 2))
    return periodic + mean[:, None] * ramp


def average_second(field, grid_size: int = 512) -> AveragedField:
    """Second-order averaged field: the mean over theta of
    dF1/d(r,w) . y1 + F2, where y1 is the cumulative integral of F1.

    Requires the first-order average to vanish (the structure the
    merged-branch unfolding guarantees); probed numerically up front.
    """
    _check_grid(grid_size, 128)
    thetas = TWO_PI * np.arange(grid_size) / grid_size

    probe_r = np.array([p[0] for p in _PROBES])
    probe_w = np.array([p[1] for p in _PROBES])
    f0 = field.first(thetas[:, None], probe_r[None, :], probe_w[None, :]).mean(axis=1)
    worst = float(np.max(np.abs(f0)))
    if worst > 1e-8:
        raise FirstOrderNotZero(
            "first-order average is %.3e at the probe points; "
            "second-order averaging needs it to vanish" % worst
        )

    def kernel(r, w):
        f1, f2 = field.first_and_second(thetas[:, None], r[None, :], w[None, :])
        y1 = _antiderivative(f1, thetas)
        jac = field.first_jacobian(thetas[:, None], r[None, :], w[None, :])
        term = jac[:, 0] * y1[0][None] + jac[:, 1] * y1[1][None]
        return (term + f2).mean(axis=1)

    return AveragedField(order=2, eval=_pointwise(kernel), grid_size=grid_size)


def closed_form_f_origin(family) -> Callable:
    """The reference closed forms (f1, f2) for the first-order average
    of an origin family, evaluated verbatim."""
    a0, a2 = family.abar0, family.abar2
    b0, b2 = family.beta0, family.beta2
    om = family.omega
    om2, om4, om5 = om ** 2, om ** 4, om ** 5

    def eval_at(r, w):
        r = np.asarray(r, dtype=float)
        w = np.asarray(w, dtype=float)
        f1 = r * (b2 * om4 - 2.0 * a0 * a0 * a2 * w * (om2 - 1.0)
                  - a0 * b0 * om2 * (om2 - 1.0)) / (2.0 * om5)
        f2 = -a0 * (2.0 * w * b0 * om2 + a0 * a2 * (2.0 * w * w + r * r * om2)) \
            / (2.0 * om5)
        return np.stack(np.broadcast_arrays(f1, f2))

    return eval_at


def closed_form_g_pminus(family) -> Callable:
    """The reference closed forms (g1, g2) for the second-order average
    of a merged-branch family, evaluated verbatim (including their 2pi
    normalization); reference only, the quadrature pipeline is the
    authority."""
    if not family.abar1 * family.zeta0 < 0.0:
        raise InvalidFamily("requires abar1*zeta0 < 0")
    a0, a1 = family.abar0, family.abar1
    al2, z0, z2 = family.alpha2, family.zeta0, family.zeta2
    om = family.omega
    om2, om4, om6, om7 = om ** 2, om ** 4, om ** 6, om ** 7
    s = np.sqrt(-a1 * z0)

    def eval_at(r, w):
        r = np.asarray(r, dtype=float)
        w = np.asarray(w, dtype=float)
        g1 = (np.pi * r / (4.0 * om)) * (
            4.0 * z2 + (a0 * (om2 - 1.0) / (a1 * om6)) * (
                4.0 * a0 * a1 * w * (al2 + 6.0 * s) * om2
                + 4.0 * (2.0 * a1 * z0 - al2 * s) * om4
                - 3.0 * a0 * a0 * a1 * a1 * (4.0 * w * w + 3.0 * r * r * om2)
            )
        )
        g2 = (a0 * np.pi / (2.0 * a1 * om7)) * (
            4.0 * w * (2.0 * a1 * z0 - al2 * s) * om4
            - 2.0 * a0 * a0 * a1 * a1 * w * (2.0 * w * w + 3.0 * r * r * om2)
            + a0 * a1 * (al2 + 6.0 * s) * om2 * (2.0 * w * w + r * r * om2)
        )
        return np.stack(np.broadcast_arrays(g1, g2))

    return eval_at
