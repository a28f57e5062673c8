"""Perturbation families and the composed coordinate pipeline.

Both unfoldings are driven to the same normal form: translate the
bifurcating equilibrium to the origin, rescale by epsilon, apply the
linear change that turns the epsilon = 0 linear part into a rotation
block, pass to cylindrical coordinates, and reparameterize by the
angle. The composition is carried out in jet arithmetic so the
epsilon^0 part of the resulting (dr/dtheta, dw/dtheta) field vanishes
exactly by valuation bookkeeping, never by floating-point
cancellation; a direct concrete-epsilon evaluator provides an
independent numerical route for cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .chua import ChuaParams, EquilibriumKind, equilibria
from .errors import InvalidFamily, InvalidInput, SingularChange
from .series import Jet

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PerturbationOrigin:
    abar0: float
    alpha0: float = 0.0
    abar1: float = 0.0
    alpha1: float = 0.0
    abar2: float = 0.0
    alpha2: float = 0.0
    beta0: float = 0.0
    beta1: float = 0.0
    beta2: float = 0.0
    omega: float = 2.0

    def __post_init__(self):
        if self.abar0 == 0.0:
            raise InvalidFamily("abar0 must be nonzero")
        if not self.omega > 0.0:
            raise InvalidFamily("omega must be positive")

    @property
    def hypothesis_ok(self) -> bool:
        """Cycle-existence hypothesis: abar0*abar2 != 0 and omega != 1."""
        return self.abar0 * self.abar2 != 0.0 and self.omega != 1.0


@dataclass(frozen=True)
class PerturbationPMinus:
    abar0: float
    alpha0: float = 0.0
    xi0: float = 0.0
    abar1: float = 1.0
    alpha1: float = 0.0
    xi1: float = 0.0
    alpha2: float = 0.0
    xi2: float = 0.0
    zeta0: float = -1.0
    beta1: float = 0.0
    zeta1: float = 0.0
    zeta2: float = 0.0
    omega: float = 2.0

    def __post_init__(self):
        if self.abar0 == 0.0:
            raise InvalidFamily("abar0 must be nonzero")
        if self.abar1 == 0.0:
            raise InvalidFamily("abar1 must be nonzero")
        if not self.omega > 0.0:
            raise InvalidFamily("omega must be positive")

    @property
    def hypothesis_ok(self) -> bool:
        """Hypothesis for the merged-branch unfolding: abar1*zeta0 < 0."""
        return self.abar1 * self.zeta0 < 0.0


def params_at(family, eps: float) -> ChuaParams:
    """Concrete parameters of a family at one epsilon, in exact float
    arithmetic (jets are used only for coefficient extraction)."""
    if eps < 0.0:
        raise InvalidInput("eps must be nonnegative")
    om2 = family.omega ** 2
    if isinstance(family, PerturbationOrigin):
        a = family.abar0 + eps * family.alpha0
        a1 = family.abar1 + eps * family.alpha1
        a2 = family.abar2 + eps * family.alpha2
        b = eps * family.beta0
        b1 = (om2 - 1.0) / a + eps * family.beta1
        b2 = eps * family.beta2
    elif isinstance(family, PerturbationPMinus):
        eps2 = eps * eps
        a = family.abar0 + eps * family.alpha0 + eps2 * family.xi0
        a1 = family.abar1 + eps * family.alpha1 + eps2 * family.xi1
        a2 = eps * family.alpha2 + eps2 * family.xi2
        b = a2 * a2 / (4.0 * a1) + eps2 * family.zeta0
        b1 = (om2 - 1.0) / a + eps * family.beta1 + eps2 * family.zeta1
        b2 = eps2 * family.zeta2
    else:
        raise InvalidInput("unknown family type: %r" % type(family).__name__)
    return ChuaParams(a, a1, a2, b, b1, b2)


def params_jets(family) -> dict[str, Jet]:
    """The six parameters of a family as jets in epsilon."""
    om2 = family.omega ** 2
    if isinstance(family, PerturbationOrigin):
        a = Jet.from_coeffs(0, [family.abar0, family.alpha0, 0.0])
        a1 = Jet.from_coeffs(0, [family.abar1, family.alpha1, 0.0])
        a2 = Jet.from_coeffs(0, [family.abar2, family.alpha2, 0.0])
        b = Jet.eps(family.beta0)
        b1 = Jet.const(om2 - 1.0) / a + Jet.eps(family.beta1)
        b2 = Jet.eps(family.beta2)
    elif isinstance(family, PerturbationPMinus):
        a = Jet.from_coeffs(0, [family.abar0, family.alpha0, family.xi0])
        a1 = Jet.from_coeffs(0, [family.abar1, family.alpha1, family.xi1])
        a2 = Jet.from_coeffs(1, [family.alpha2, family.xi2, 0.0])
        b = a2 * a2 / (4.0 * a1) + Jet.eps(family.zeta0, power=2)
        b1 = (Jet.const(om2 - 1.0) / a + Jet.eps(family.beta1)
              + Jet.eps(family.zeta1, power=2))
        b2 = Jet.eps(family.zeta2, power=2)
    else:
        raise InvalidInput("unknown family type: %r" % type(family).__name__)
    return {"a": a, "a1": a1, "a2": a2, "b": b, "b1": b1, "b2": b2}


def _jordan_matrices(abar0: float, omega: float):
    """The linear change (u,v,w) -> (X,Y,Z) and its analytic inverse.

    Forward rows implement X = abar0(w + omega v)/omega^2,
    Y = w - w/omega^2 - v/omega, Z = u; the inverse is written in
    closed form (det = abar0/omega) rather than inverted numerically.
    """
    if omega == 0.0 or abar0 == 0.0:
        raise SingularChange("requires abar0 != 0 and omega != 0")
    om2 = omega * omega
    fwd = np.array([
        [0.0, abar0 / omega, abar0 / om2],
        [0.0, -1.0 / omega, 1.0 - 1.0 / om2],
        [1.0, 0.0, 0.0],
    ])
    inv = np.array([
        [0.0, 0.0, 1.0],
        [(om2 - 1.0) / (abar0 * omega), -1.0 / omega, 0.0],
        [1.0 / abar0, 1.0, 0.0],
    ])
    return fwd, inv


def jordan_change(abar0: float, omega: float, X, Y, Z):
    """(X,Y,Z) -> (u,v,w): the coordinates in which the epsilon = 0
    linear part is the rotation block diag(rot(omega), 0)."""
    _, inv = _jordan_matrices(abar0, omega)
    u = inv[0, 2] * Z
    v = inv[1, 0] * X + inv[1, 1] * Y
    w = inv[2, 0] * X + inv[2, 1] * Y
    return (u, v, w)


def inverse_jordan(abar0: float, omega: float, u, v, w):
    """(u,v,w) -> (X,Y,Z), the printed form of the linear change."""
    fwd, _ = _jordan_matrices(abar0, omega)
    X = fwd[0, 1] * v + fwd[0, 2] * w
    Y = fwd[1, 1] * v + fwd[1, 2] * w
    Z = u
    return (X, Y, Z)


def _drop_order0(jet: Jet) -> Jet:
    """Zero the epsilon^0 slot exactly, leaving a jet of valuation >= 1."""
    if jet.is_zero or jet.valuation >= 1:
        return jet
    coeffs = np.array(jet.coeffs, dtype=float, copy=True)
    coeffs[0] = np.zeros_like(coeffs[0])
    return Jet.from_coeffs(0, coeffs)


def _reduce_angle(theta):
    theta = np.asarray(theta, dtype=float)
    return theta - TWO_PI * np.floor(theta / TWO_PI)


@dataclass
class PeriodicField:
    """The 2pi-periodic standard-form field (dr/dtheta, dw/dtheta).

    `evaluator` returns the pair as jets in epsilon (valuation >= 1 by
    construction); `direct` evaluates the full nonlinear chain at a
    concrete epsilon, bypassing jets, as an independent route. The
    slot methods `first`/`second` return the epsilon^1 and epsilon^2
    coefficient arrays on (theta, r, w) grids and are the hot path for
    averaging; they are the unrolled slots of the same division the
    jet evaluator performs.
    """

    kind: EquilibriumKind
    family: object
    omega: float
    period: float = TWO_PI
    jets: dict = dc_field(default_factory=dict, repr=False)
    _slots: dict = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        p = self.jets
        om = self.omega
        a0 = float(p["a"].coefficient(0))
        x_eq = p["x_eq"]

        m = p["a"] * (-p["b"] - 2.0 * p["a2"] * x_eq
                      - 3.0 * p["a1"] * x_eq * x_eq)
        quad = -p["a"] * (p["a2"] + 3.0 * p["a1"] * x_eq)
        cub = -p["a"] * p["a1"]
        d_a = _drop_order0(p["a"])
        d_b1 = _drop_order0(p["b1"])
        self.jets.update({
            "m": m, "quad": quad, "cub": cub,
            "d_a": d_a, "d_b1": d_b1,
        })

        fwd, inv = _jordan_matrices(a0, om)
        self._fwd, self._inv = fwd, inv
        self._slots = {
            "m": (m.coefficient(1), m.coefficient(2)),
            "az": (d_a.coefficient(1), d_a.coefficient(2)),
            "zx": (-d_b1.coefficient(1), -d_b1.coefficient(2)),
            "zz": (p["b2"].coefficient(1), p["b2"].coefficient(2)),
            "quad": (quad.coefficient(0), quad.coefficient(1)),
            "cub": (cub.coefficient(0),),
        }

    # -- geometry helpers ------------------------------------------------

    def _prep(self, theta, r, w):
        theta = _reduce_angle(theta)
        r = np.asarray(r, dtype=float)
        w = np.asarray(w, dtype=float)
        c, s = np.cos(theta), np.sin(theta)
        u, v = r * c, r * s
        X = self._fwd[0, 1] * v + self._fwd[0, 2] * w
        Z = u
        return c, s, r, w, X, Z

    # -- jet route -------------------------------------------------------

    def evaluator(self, theta, r, w) -> tuple[Jet, Jet]:
        """(dr/dtheta, dw/dtheta) as jets; arrays broadcast."""
        c, s, r, w, X, Z = self._prep(theta, r, w)
        m, quad, cub = self.jets["m"], self.jets["quad"], self.jets["cub"]
        d_a, d_b1, b2 = self.jets["d_a"], self.jets["d_b1"], self.jets["b2"]
        inv = self._inv
        om = self.omega

        g_x = m * X + d_a * Z + Jet.eps() * quad * (X * X) \
            + Jet.eps(power=2) * cub * (X * X * X)
        g_z = (-d_b1) * X + b2 * Z
        h_u = g_z
        h_v = g_x * inv[1, 0]
        h_w = g_x * inv[2, 0]

        r_dot = h_u * c + h_v * s
        w_dot = h_w
        theta_dot = Jet.const(om) + (h_v * c - h_u * s) * (1.0 / r)
        return (r_dot / theta_dot, w_dot / theta_dot)

    # -- slot route (epsilon^1 and epsilon^2 coefficients) ---------------

    def _h_slot(self, k: int, X, Z):
        sl = self._slots
        g_x = sl["m"][k - 1] * X + sl["az"][k - 1] * Z
        if k == 1:
            g_x = g_x + sl["quad"][0] * (X * X)
        else:
            g_x = g_x + sl["quad"][1] * (X * X) + sl["cub"][0] * (X * X * X)
        g_z = sl["zx"][k - 1] * X + sl["zz"][k - 1] * Z
        h_u = g_z
        h_v = self._inv[1, 0] * g_x
        h_w = self._inv[2, 0] * g_x
        return h_u, h_v, h_w

    def first(self, theta, r, w) -> np.ndarray:
        """Epsilon^1 coefficient pair (F1_r, F1_w); shape (2,) + grid."""
        c, s, r, w, X, Z = self._prep(theta, r, w)
        h_u, h_v, h_w = self._h_slot(1, X, Z)
        om = self.omega
        return np.stack(np.broadcast_arrays((c * h_u + s * h_v) / om, h_w / om))

    def first_and_second(self, theta, r, w) -> tuple[np.ndarray, np.ndarray]:
        """Both coefficient pairs in one pass (shares intermediates)."""
        c, s, r, w, X, Z = self._prep(theta, r, w)
        om = self.omega
        h_u1, h_v1, h_w1 = self._h_slot(1, X, Z)
        h_u2, h_v2, h_w2 = self._h_slot(2, X, Z)
        r1 = c * h_u1 + s * h_v1
        w1 = h_w1
        th1 = (c * h_v1 - s * h_u1) / r
        r2 = c * h_u2 + s * h_v2
        w2 = h_w2
        f1 = np.stack(np.broadcast_arrays(r1 / om, w1 / om))
        f2 = np.stack(np.broadcast_arrays(
            (r2 - r1 * th1 / om) / om,
            (w2 - w1 * th1 / om) / om,
        ))
        return f1, f2

    def second(self, theta, r, w) -> np.ndarray:
        """Epsilon^2 coefficient pair (F2_r, F2_w)."""
        return self.first_and_second(theta, r, w)[1]

    def first_jacobian(self, theta, r, w, h_scale: float = 2e-3) -> np.ndarray:
        """d(F1)/d(r,w) by Richardson-extrapolated central differences;
        exact to roundoff here since F1 is polynomial of low degree in
        (r, w). Shape (2, 2) + grid, second index = (d/dr, d/dw)."""
        r = np.asarray(r, dtype=float)
        w = np.asarray(w, dtype=float)

        def central(h_r, h_w):
            col_r = (self.first(theta, r + h_r, w)
                     - self.first(theta, r - h_r, w)) / (2.0 * h_r)
            col_w = (self.first(theta, r, w + h_w)
                     - self.first(theta, r, w - h_w)) / (2.0 * h_w)
            return np.stack([col_r, col_w], axis=1)

        h_r = h_scale * (1.0 + np.abs(r))
        h_w = h_scale * (1.0 + np.abs(w))
        coarse = central(h_r, h_w)
        fine = central(h_r / 2.0, h_w / 2.0)
        return (4.0 * fine - coarse) / 3.0

    # -- concrete-epsilon route -------------------------------------------

    def direct(self, eps: float, theta, r, w) -> tuple[np.ndarray, np.ndarray]:
        """(dr/dtheta, dw/dtheta) at a concrete epsilon through the
        full nonlinear Chua field; independent of the jet route."""
        if not eps > 0.0:
            raise InvalidInput("eps must be positive")
        from .chua import vector_field

        params = params_at(self.family, eps)
        q = equilibrium_position(self.family, eps)
        theta = _reduce_angle(theta)
        c, s = np.cos(theta), np.sin(theta)
        u, v = r * c, r * s
        X = self._fwd[0, 1] * v + self._fwd[0, 2] * w
        Y = self._fwd[1, 1] * v + self._fwd[1, 2] * w
        Z = u
        state = np.stack(np.broadcast_arrays(
            q[0] + eps * X, q[1] + eps * Y, q[2] + eps * Z,
        ))
        p_dot = vector_field(params, state) / eps
        inv = self._inv
        u_dot = p_dot[2]
        v_dot = inv[1, 0] * p_dot[0] + inv[1, 1] * p_dot[1]
        w_dot = inv[2, 0] * p_dot[0] + inv[2, 1] * p_dot[1]
        r_dot = c * u_dot + s * v_dot
        theta_dot = (c * v_dot - s * u_dot) / r
        return (r_dot / theta_dot, w_dot / theta_dot)

    def lift(self, eps: float, r, theta, w) -> np.ndarray:
        return lift_orbit(self.family, eps, r, theta, w)


def equilibrium_position(family, eps: float) -> np.ndarray:
    """The bifurcating equilibrium of the family at a concrete epsilon,
    in the original coordinates."""
    params = params_at(family, eps)
    if isinstance(family, PerturbationOrigin):
        return np.zeros(3)
    for eq in equilibria(params):
        if eq.kind is EquilibriumKind.P_MINUS:
            return eq.position
    raise InvalidInput(
        "the p_minus equilibrium does not exist at eps=%g for this family" % eps
    )


def lift_orbit(family, eps: float, r, theta, w) -> np.ndarray:
    """Map a cylindrical point back to the original coordinates:
    equilibrium + eps * (linear change applied to (r cos, r sin, w))."""
    if not eps > 0.0:
        raise InvalidInput("eps must be positive")
    abar0 = family.abar0
    omega = family.omega
    theta = _reduce_angle(theta)
    u = r * np.cos(theta)
    v = r * np.sin(theta)
    X, Y, Z = inverse_jordan(abar0, omega, u, v, w)
    q = equilibrium_position(family, eps)
    return np.stack([q[0] + eps * X, q[1] + eps * Y, q[2] + eps * Z])


def standard_form_origin(family: PerturbationOrigin) -> PeriodicField:
    """Standard form around the origin for an origin unfolding."""
    if not isinstance(family, PerturbationOrigin):
        raise InvalidInput("expected a PerturbationOrigin family")
    jets = params_jets(family)
    jets["x_eq"] = Jet.const(0.0)
    return PeriodicField(
        kind=EquilibriumKind.ORIGIN,
        family=family,
        omega=family.omega,
        jets=jets,
    )


def standard_form_pminus(family: PerturbationPMinus) -> PeriodicField:
    """Standard form around the merged-branch equilibrium p_minus.

    The discriminant a2^2 - 4 a1 b collapses algebraically to
    -4 a1 zeta0 eps^2 for this unfolding (b is defined to cancel the
    a2^2 term), so the jet is built from that identity directly and
    its square root exists exactly when abar1*zeta0 < 0.
    """
    if not isinstance(family, PerturbationPMinus):
        raise InvalidInput("expected a PerturbationPMinus family")
    if not family.abar1 * family.zeta0 < 0.0:
        raise InvalidFamily("requires abar1*zeta0 < 0")
    jets = params_jets(family)
    disc = -4.0 * jets["a1"] * Jet.eps(family.zeta0, power=2)
    x_eq = (-jets["a2"] - disc.sqrt()) / (2.0 * jets["a1"])
    jets["x_eq"] = x_eq
    return PeriodicField(
        kind=EquilibriumKind.P_MINUS,
        family=family,
        omega=family.omega,
        jets=jets,
    )
