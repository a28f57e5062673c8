"""ODE-level verification of predicted limit cycles.

Integrates the full Chua system at concrete small eps, locates
periodic orbits near the averaged predictions by Newton shooting on a
Poincare section, computes Floquet multipliers from the variational
flow, and runs eps-sweep convergence studies. This module is the
ground truth the averaging pipeline is judged against.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .chua import ChuaParams, jacobian, vector_field
from .errors import (
    InvalidInput,
    MismatchWarning,
    NoConvergence,
    NoReturn,
    StepFailure,
)
from .solve import Stability, predict_cycle_count
from .transform import equilibrium_position, jordan_change, lift_orbit, params_at

_BURN_FRACTION = 0.1
_RETURN_BUDGET_TURNS = 10.0
_SHOOT_MAX_ITER = 25
_SHOOT_MAX_HALVINGS = 30


@dataclass
class OrbitResult:
    initial_state: np.ndarray
    period: float
    multipliers: tuple[complex, complex]
    residual: float
    pullback: tuple[float, float]


def _default_atol(eps: float) -> float:
    return 1e-13 * eps


def integrate(params: ChuaParams, state0, t_span, rtol: float = 1e-11,
              atol: float = 1e-13, dense: bool = True, events=None):
    """Adaptive high-order Runge-Kutta integration of the model.

    Returns the scipy result object (fields t, y, sol when dense,
    t_events/y_events when events are given). The DOP853 pair with its
    proportional-integral step control and dense output meets the
    integration contract here.
    """
    if not (rtol > 0.0 and atol > 0.0):
        raise InvalidInput("rtol and atol must be positive")
    sol = solve_ivp(
        lambda t, y: vector_field(params, y),
        t_span,
        np.asarray(state0, dtype=float),
        method="DOP853",
        rtol=rtol,
        atol=atol,
        dense_output=dense,
        events=events,
    )
    if sol.status == -1:
        raise StepFailure(sol.message)
    return sol


def _section_coords(family, eps: float, q: np.ndarray, state) -> tuple:
    """(u, v, w) of a state relative to the eps-dependent equilibrium."""
    rel = (np.asarray(state, dtype=float) - q) / eps
    return jordan_change(family.abar0, family.omega, rel[0], rel[1], rel[2])


def poincare_map(params: ChuaParams, family, eps: float, state,
                 rtol: float = 1e-11, atol: float | None = None):
    """First return to the half-plane section {v = 0, u > 0} around the
    bifurcating equilibrium; returns (next_state, return_time).

    The trajectory is integrated past a short burn-in before the
    terminal crossing event is armed, so a start point lying exactly on
    the section does not trigger at time zero.
    """
    if atol is None:
        atol = _default_atol(eps)
    q = equilibrium_position(family, eps)
    turn = 2.0 * np.pi / family.omega
    budget = _RETURN_BUDGET_TURNS * turn

    def crossing(t, y):
        return _section_coords(family, eps, q, y)[1]

    crossing.terminal = True
    crossing.direction = 1.0

    y_now = np.asarray(state, dtype=float)
    elapsed = 0.0
    for _ in range(20):
        burn = _BURN_FRACTION * turn
        sol = integrate(params, y_now, (0.0, burn), rtol, atol, dense=False)
        y_now = sol.y[:, -1]
        elapsed += burn
        if elapsed > budget:
            break
        sol = integrate(params, y_now, (0.0, budget - elapsed), rtol, atol,
                        dense=False, events=crossing)
        if sol.t_events[0].size == 0:
            break
        y_hit = sol.y_events[0][0]
        elapsed += sol.t_events[0][0]
        u_hit = _section_coords(family, eps, q, y_hit)[0]
        if u_hit > 0.0:
            return y_hit, elapsed
        y_now = y_hit
    raise NoReturn(
        "no transversal return to the section within %.3g time units" % budget
    )


def _monodromy(params: ChuaParams, state0, period: float,
               rtol: float, atol: float):
    """Fundamental matrix over one period via the variational system
    (state and the 3x3 tangent flow integrated together); returns
    (final_state, monodromy_matrix)."""

    def rhs(t, y):
        state, phi = y[:3], y[3:].reshape(3, 3)
        dphi = jacobian(params, state) @ phi
        return np.concatenate([vector_field(params, state), dphi.ravel()])

    y0 = np.concatenate([np.asarray(state0, dtype=float), np.eye(3).ravel()])
    sol = solve_ivp(rhs, (0.0, period), y0, method="DOP853",
                    rtol=rtol, atol=atol, dense_output=False)
    if sol.status != 0:
        raise StepFailure(sol.message)
    yT = sol.y[:, -1]
    return yT[:3], yT[3:].reshape(3, 3)


def find_periodic_orbit(params: ChuaParams, family, eps: float, seed,
                        rtol: float = 1e-11, atol: float | None = None) -> OrbitResult:
    """Newton shooting for a periodic orbit near an averaged zero.

    The section point is parameterized by (u, w); the displacement map
    sends (u, w) to the first-return coordinates minus (u, w), and its
    zeros are fixed points of the Poincare map. The seed is lifted from
    the averaged prediction at theta = 0.
    """
    if not 0.0 < eps <= 0.1:
        raise InvalidInput("eps must lie in (0, 0.1]")
    if atol is None:
        atol = _default_atol(eps)
    q = equilibrium_position(family, eps)

    def lift_uw(u, w):
        return lift_orbit(family, eps, u, 0.0, w)

    def displacement(u, w):
        state = lift_uw(u, w)
        nxt, t_ret = poincare_map(params, family, eps, state, rtol, atol)
        u2, _, w2 = _section_coords(family, eps, q, nxt)
        return np.array([u2 - u, w2 - w]), t_ret

    point = np.array([float(seed.r), float(seed.w)])
    try:
        disp, t_ret = displacement(point[0], point[1])
    except NoReturn as exc:
        raise NoConvergence(str(exc), residual=float("nan"))
    res = float(np.hypot(*disp))

    converged = False
    for _ in range(_SHOOT_MAX_ITER):
        if res <= 1e-12 * (1.0 + float(np.hypot(*point))):
            converged = True
            break
        jac = np.empty((2, 2))
        try:
            for j in range(2):
                h = 1e-6 * (1.0 + abs(point[j]))
                bumped = point.copy()
                bumped[j] += h
                disp_h, _ = displacement(bumped[0], bumped[1])
                jac[:, j] = (disp_h - disp) / h
            step = np.linalg.solve(jac, disp)
        except (NoReturn, np.linalg.LinAlgError) as exc:
            raise NoConvergence(str(exc), residual=res)
        t = 1.0
        for _ in range(_SHOOT_MAX_HALVINGS):
            cand = point - t * step
            try:
                disp_c, t_ret_c = displacement(cand[0], cand[1])
            except NoReturn:
                t /= 2.0
                continue
            res_c = float(np.hypot(*disp_c))
            if res_c < res:
                point, disp, res, t_ret = cand, disp_c, res_c, t_ret_c
                break
            t /= 2.0
        else:
            break
    if not converged and res > 1e-12 * (1.0 + float(np.hypot(*point))):
        raise NoConvergence(
            "Poincare displacement stalled at %.3e" % res, residual=res
        )

    state0 = lift_uw(point[0], point[1])
    period = t_ret
    state_T, mono = _monodromy(params, state0, period, rtol, atol)
    residual = float(np.linalg.norm(state_T - state0))
    scale = 1.0 + float(np.linalg.norm(state0))
    if residual > 1e-9 * scale:
        raise NoConvergence(
            "closure residual %.3e exceeds the orbit tolerance" % residual,
            residual=residual,
        )
    mus = np.linalg.eigvals(mono)
    trivial = int(np.argmin(np.abs(mus - 1.0)))
    if abs(mus[trivial] - 1.0) > 1e-5:
        raise NoConvergence(
            "no trivial Floquet multiplier near 1 (closest %.3e away)"
            % abs(mus[trivial] - 1.0),
            residual=residual,
        )
    nontrivial = [mus[k] for k in range(3) if k != trivial]
    nontrivial.sort(key=lambda m: (-abs(m), m.real, m.imag))
    return OrbitResult(
        initial_state=state0,
        period=float(period),
        multipliers=(complex(nontrivial[0]), complex(nontrivial[1])),
        residual=residual,
        pullback=(float(point[0]), float(point[1])),
    )


def continuation_sweep(family, eps_list, seeds) -> list[dict]:
    """Track each predicted orbit across a decreasing list of eps
    values; returns one row per (eps, orbit) with period, pullback,
    distance to the prediction, multiplier magnitudes, amplitude in
    the original coordinates, and the OrbitResult under the 'orbit'
    key. Failures are recorded as rows with an 'error' entry and the
    sweep continues."""
    eps_list = [float(e) for e in eps_list]
    if not eps_list or any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise InvalidInput("eps_list must be nonempty and strictly decreasing")
    rows: list[dict] = []
    ordered = sorted(seeds, key=lambda z: (z.r, z.w))
    for eps in eps_list:
        params = params_at(family, eps)
        for orbit_id, seed in enumerate(ordered):
            row = {"eps": eps, "orbit_id": orbit_id}
            try:
                orbit = find_periodic_orbit(params, family, eps, seed)
            except NoConvergence as exc:
                row["error"] = str(exc)
                rows.append(row)
                continue
            dist = float(np.hypot(orbit.pullback[0] - seed.r,
                                  orbit.pullback[1] - seed.w))
            amplitude = _orbit_amplitude(params, family, eps, orbit)
            row.update({
                "period": orbit.period,
                "pullback_r": orbit.pullback[0],
                "pullback_w": orbit.pullback[1],
                "dist_to_prediction": dist,
                "mult1_abs": abs(orbit.multipliers[0]),
                "mult2_abs": abs(orbit.multipliers[1]),
                "amplitude": amplitude,
                "residual": orbit.residual,
                "orbit": orbit,
            })
            rows.append(row)
    return rows


def _orbit_amplitude(params: ChuaParams, family, eps: float,
                     orbit: OrbitResult) -> float:
    """Max-norm distance of the orbit from the equilibrium, in the
    original coordinates."""
    q = equilibrium_position(family, eps)
    sol = integrate(params, orbit.initial_state, (0.0, orbit.period),
                    rtol=1e-9, atol=_default_atol(eps))
    ts = np.linspace(0.0, orbit.period, 256)
    states = sol.sol(ts)
    return float(np.max(np.abs(states - q.reshape(3, 1))))


def count_limit_cycles(family, eps: float, zeta2_override=None,
                       zeros=None) -> int:
    """End-to-end cycle count: predict zeros by averaging, then verify
    each by shooting; warns (without failing) when the verified count
    differs from the predicted one. Precomputed averaged zeros may be
    passed to skip the prediction step."""
    if zeros is None:
        predicted, zeros = predict_cycle_count(family, zeta2_override)
    else:
        predicted = sum(
            1 for z in zeros
            if z.r > 0.0 and z.classification is not Stability.DEGENERATE
        )
    params = params_at(family, eps)
    found: list[OrbitResult] = []
    for z in zeros:
        if z.classification is Stability.DEGENERATE or not z.r > 0.0:
            continue
        try:
            orbit = find_periodic_orbit(params, family, eps, z)
        except NoConvergence:
            continue
        if any(np.linalg.norm(orbit.initial_state - o.initial_state)
               <= 1e-6 * (1.0 + np.linalg.norm(o.initial_state))
               for o in found):
            continue
        found.append(orbit)
    if len(found) != predicted:
        warnings.warn(
            "verified %d orbit(s) but averaging predicted %d at eps=%g"
            % (len(found), predicted, eps),
            MismatchWarning,
            stacklevel=2,
        )
    return len(found)
