"""Truncated power series (jets) in a small parameter eps.

A jet stores an explicit valuation v and three coefficients, representing

    eps^v * (c0 + c1*eps + c2*eps^2),

which is the minimum truncation order needed to read off first- and
second-order terms of composed coordinate changes. Coefficients may be
scalars or numpy arrays of a common broadcastable shape, so a single jet
can carry a whole grid of evaluation points through the arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DivisionByZeroJet,
    NegativeLeading,
    NegativeValuation,
    OddValuation,
)

ORDER = 2
_TINY = 1e-300  # coefficients at or below this magnitude count as exact zeros


def _is_tiny(c):
    return bool(np.all(np.abs(c) <= _TINY))


@dataclass
class Jet:
    valuation: int
    coeffs: np.ndarray = field(default_factory=lambda: np.zeros(ORDER + 1))

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape[:1] != (ORDER + 1,):
            raise ValueError("jet needs exactly %d coefficients" % (ORDER + 1))
        self.coeffs = c
        self._canonicalize()

    def _canonicalize(self):
        shifts = 0
        while shifts <= ORDER and not self.is_zero and _is_tiny(self.coeffs[0]):
            self.coeffs = np.concatenate(
                [self.coeffs[1:], np.zeros((1,) + self.coeffs.shape[1:])]
            )
            self.valuation += 1
            shifts += 1
        if self.is_zero:
            self.valuation = 0

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.coeffs == 0.0))

    @property
    def tail_shape(self):
        return self.coeffs.shape[1:]

    # -- constructors -------------------------------------------------

    @classmethod
    def const(cls, value) -> "Jet":
        value = np.asarray(value, dtype=float)
        c = np.zeros((ORDER + 1,) + value.shape)
        c[0] = value
        return cls(0, c)

    @classmethod
    def eps(cls, coeff=1.0, power: int = 1) -> "Jet":
        coeff = np.asarray(coeff, dtype=float)
        c = np.zeros((ORDER + 1,) + coeff.shape)
        c[0] = coeff
        return cls(power, c)

    @classmethod
    def from_coeffs(cls, valuation: int, coeffs) -> "Jet":
        arr = [np.asarray(x, dtype=float) for x in coeffs]
        tail = np.broadcast_shapes(*[a.shape for a in arr])
        c = np.zeros((ORDER + 1,) + tail)
        for k, a in enumerate(arr[: ORDER + 1]):
            c[k] = a
        return cls(valuation, c)

    # -- queries ------------------------------------------------------

    def coefficient(self, power: int):
        """Coefficient of eps**power, accounting for the valuation."""
        k = power - self.valuation
        if 0 <= k <= ORDER:
            return self.coeffs[k]
        return np.zeros(self.tail_shape)

    def evaluate(self, eps: float):
        """Evaluate the truncated polynomial at a concrete eps."""
        c = self.coeffs
        return eps ** self.valuation * (c[0] + eps * (c[1] + eps * c[2]))

    # -- arithmetic ---------------------------------------------------

    @staticmethod
    def _coerce(other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        if self.is_zero:
            return Jet(other.valuation, other.coeffs.copy())
        if other.is_zero:
            return Jet(self.valuation, self.coeffs.copy())
        v = min(self.valuation, other.valuation)
        tail = np.broadcast_shapes(self.tail_shape, other.tail_shape)
        c = np.zeros((ORDER + 1,) + tail)
        for src in (self, other):
            shift = src.valuation - v
            for k in range(ORDER + 1 - shift):
                c[k + shift] = c[k + shift] + src.coeffs[k]
        return Jet(v, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.valuation, -self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            # fast path: scaling by a plain number or array
            scale = np.asarray(other, dtype=float)
            c = np.stack([self.coeffs[k] * scale for k in range(ORDER + 1)])
            return Jet(self.valuation, c)
        if self.is_zero or other.is_zero:
            return Jet(0, np.zeros(ORDER + 1))
        v = self.valuation + other.valuation
        x, y = self.coeffs, other.coeffs
        tail = np.broadcast_shapes(self.tail_shape, other.tail_shape)
        c = np.zeros((ORDER + 1,) + tail)
        c[0] = x[0] * y[0]
        c[1] = x[0] * y[1] + x[1] * y[0]
        c[2] = x[0] * y[2] + x[1] * y[1] + x[2] * y[0]
        return Jet(v, c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other.is_zero:
            raise DivisionByZeroJet("division by the zero jet")
        if self.is_zero:
            return Jet(0, np.zeros(ORDER + 1))
        v = self.valuation - other.valuation
        if v < 0:
            raise NegativeValuation(
                "quotient has valuation %d; negative powers are not representable" % v
            )
        x, y = self.coeffs, other.coeffs
        q0 = x[0] / y[0]
        q1 = (x[1] - q0 * y[1]) / y[0]
        q2 = (x[2] - q0 * y[2] - q1 * y[1]) / y[0]
        return Jet(v, np.stack(np.broadcast_arrays(q0, q1, q2)))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def sqrt(self) -> "Jet":
        if self.is_zero:
            return Jet(0, np.zeros(ORDER + 1))
        if self.valuation % 2:
            raise OddValuation(
                "square root of a series with odd leading power %d" % self.valuation
            )
        c0, c1, c2 = self.coeffs
        if np.any(c0 <= 0.0):
            raise NegativeLeading("square root needs a positive leading coefficient")
        s0 = np.sqrt(c0)
        u1 = c1 / c0
        u2 = c2 / c0
        out = np.stack(
            np.broadcast_arrays(s0, s0 * (u1 / 2.0), s0 * (u2 / 2.0 - u1 * u1 / 8.0))
        )
        return Jet(self.valuation // 2, out)

    def __repr__(self):
        return "Jet(v=%d, coeffs=%r)" % (self.valuation, self.coeffs)


# Free-function aliases for the operator methods.

def jet_add(x: Jet, y: Jet) -> Jet:
    return x + y


def jet_sub(x: Jet, y: Jet) -> Jet:
    return x - y


def jet_mul(x: Jet, y: Jet) -> Jet:
    return x * y


def jet_div(x: Jet, y: Jet) -> Jet:
    return x / y


def jet_sqrt(x: Jet) -> Jet:
    return x.sqrt()
