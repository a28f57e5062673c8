"""Cubic Chua-type circuit model: vector field, equilibria, spectra,
and zero-Hopf detection.

The system in R^3 with parameters (a, a1, a2, b, b1, b2) is

    x' = a (z - b x - a2 x^2 - a1 x^3)
    y' = -z
    z' = -b1 x + y + b2 z.

Besides the origin, equilibria sit on the cubic nullcline at real roots
of b + a2 x + a1 x^2 = 0 with y = b1 x, z = 0; the two branches merge
when the discriminant a2^2 - 4 a1 b vanishes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import AmbiguousDetection, InvalidInput
from .solve import cubic_roots_complex


@dataclass(frozen=True)
class ChuaParams:
    a: float
    a1: float
    a2: float
    b: float
    b1: float
    b2: float

    def as_tuple(self):
        return (self.a, self.a1, self.a2, self.b, self.b1, self.b2)


class EquilibriumKind(str, Enum):
    ORIGIN = "origin"
    P_MINUS = "p_minus"
    P_PLUS = "p_plus"
    P_DOUBLE = "p_double"


@dataclass
class Equilibrium:
    position: np.ndarray
    kind: EquilibriumKind
    eigenvalues: np.ndarray


@dataclass
class ZeroHopfPoint:
    equilibrium: Equilibrium
    omega: float


def vector_field(params: ChuaParams, state) -> np.ndarray:
    """Right-hand side of the model at one state (or an array of states
    with components along the first axis)."""
    a, a1, a2, b, b1, b2 = params.as_tuple()
    x, y, z = state[0], state[1], state[2]
    return np.stack([
        a * (z - b * x - a2 * x * x - a1 * x ** 3),
        -np.asarray(z, dtype=float),
        -b1 * x + y + b2 * z,
    ])


def jacobian(params: ChuaParams, state) -> np.ndarray:
    """Analytic Jacobian of the vector field at a state."""
    a, a1, a2, b, b1, b2 = params.as_tuple()
    x = state[0]
    return np.array([
        [a * (-b - 2.0 * a2 * x - 3.0 * a1 * x * x), 0.0, a],
        [0.0, 0.0, -1.0],
        [-b1, 1.0, b2],
    ])


def _nullcline_roots(params: ChuaParams):
    """Real roots of b + a2 x + a1 x^2, in a cancellation-safe form,
    polished by one Newton step each."""
    a1, a2, b = params.a1, params.a2, params.b
    disc = a2 * a2 - 4.0 * a1 * b
    if disc < 0.0:
        return []
    s = np.sqrt(disc)
    q = -(a2 + np.copysign(s, a2)) / 2.0
    roots = []
    if q != 0.0:
        roots = [q / a1, b / q]
    else:
        # a2 and b effectively zero: double root at the origin
        roots = [0.0, 0.0]
    polished = []
    for x in roots:
        d = a2 + 2.0 * a1 * x
        if d != 0.0:
            x = x - (b + x * (a2 + a1 * x)) / d
        polished.append(x)
    return sorted(polished)


def _eigenvalues_at(params: ChuaParams, position) -> np.ndarray:
    c = _char_poly_general(params, position)
    return cubic_roots_complex(c)


def equilibria(params: ChuaParams) -> list[Equilibrium]:
    """All equilibria: the origin, plus the nullcline pair (or their
    merged double point) when present.

    Coincident points are reported once: with b = 0 one nullcline root
    sits exactly at the origin and would otherwise be duplicated.
    """
    a1, a2, b = params.a1, params.a2, params.b
    tau_disc = 1e-10 * (1.0 + a2 * a2)
    disc = a2 * a2 - 4.0 * a1 * b

    found: list[Equilibrium] = []

    def add(x: float, kind: EquilibriumKind):
        pos = np.array([x, params.b1 * x, 0.0])
        for e in found:
            if np.max(np.abs(e.position - pos)) <= 1e-12 * (1.0 + np.max(np.abs(pos))):
                return
        found.append(Equilibrium(pos, kind, _eigenvalues_at(params, pos)))

    add(0.0, EquilibriumKind.ORIGIN)
    if a1 != 0.0 and disc > tau_disc:
        x_lo, x_hi = _nullcline_roots(params)
        # the minus branch carries the smaller root of the monic form
        # (-a2 - sqrt(disc)) / (2 a1), whose ordering flips with a1
        x_minus, x_plus = (x_lo, x_hi) if a1 > 0.0 else (x_hi, x_lo)
        add(x_minus, EquilibriumKind.P_MINUS)
        add(x_plus, EquilibriumKind.P_PLUS)
    elif a1 != 0.0 and a2 != 0.0 and abs(disc) <= tau_disc:
        add(-a2 / (2.0 * a1), EquilibriumKind.P_DOUBLE)
    return found


def _char_poly_general(params: ChuaParams, position):
    a, b1, b2 = params.a, params.b1, params.b2
    m = jacobian(params, position)[0, 0]
    return (-1.0, m + b2, -(m * b2 + 1.0 + a * b1), m)


def char_poly_at(params: ChuaParams, equilibrium: Equilibrium):
    """Coefficients (c3, c2, c1, c0) of det(J - lambda I) at an
    equilibrium.

    At the origin the closed form
        -l^3 + (b2 - a b) l^2 + (b2 a b - a b1 - 1) l - a b
    is evaluated verbatim so the coefficients are reproducible to the
    last bit; elsewhere the general m-based form is used.
    """
    a, b, b1, b2 = params.a, params.b, params.b1, params.b2
    if equilibrium.kind is EquilibriumKind.ORIGIN:
        return (-1.0, b2 - a * b, b2 * a * b - a * b1 - 1.0, -(a * b))
    return _char_poly_general(params, equilibrium.position)


def detect_zero_hopf(params: ChuaParams, tol: float = 1e-8) -> ZeroHopfPoint | None:
    """Search the equilibria for a spectrum {0, +i w, -i w} with w > 0.

    Returns None when no equilibrium qualifies; raises
    AmbiguousDetection (carrying all candidates) when several do.
    """
    if not tol > 0.0:
        raise InvalidInput("tol must be positive")
    candidates = []
    for eq in equilibria(params):
        lams = eq.eigenvalues
        k0 = int(np.argmin(np.abs(lams)))
        lam0 = lams[k0]
        pair = np.delete(lams, k0)
        omega = float((abs(pair[0].imag) + abs(pair[1].imag)) / 2.0)
        ok = (
            abs(lam0) <= tol
            and abs(pair[0].real) <= tol
            and abs(pair[1].real) <= tol
            and abs(pair[0].imag + pair[1].imag) <= tol
            and omega > tol
        )
        if ok:
            candidates.append(ZeroHopfPoint(eq, omega))
    if not candidates:
        return None
    if len(candidates) > 1:
        kinds = ", ".join(c.equilibrium.kind.value for c in candidates)
        raise AmbiguousDetection(
            "multiple equilibria qualify as zero-Hopf points (%s)" % kinds,
            candidates=candidates,
        )
    return candidates[0]


def zero_hopf_family_origin(a: float, a1: float, a2: float, omega: float) -> ChuaParams:
    """Parameters putting a zero-Hopf point at the origin: b = b2 = 0
    and b1 = (omega^2 - 1)/a, so the spectrum is {0, +/- i omega}."""
    if a == 0.0:
        raise InvalidInput("a must be nonzero")
    if not omega > 0.0:
        raise InvalidInput("omega must be positive")
    if abs(omega - 1.0) <= 1e-12:
        warnings.warn(
            "omega = 1 gives b1 = 0; downstream cycle predictions exclude it",
            UserWarning,
            stacklevel=2,
        )
    return ChuaParams(a, a1, a2, 0.0, (omega * omega - 1.0) / a, 0.0)
