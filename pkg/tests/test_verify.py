"""Integration-based verification: the wrapped integrator against a
matrix-exponential oracle, the return map, shooting, continuation, and
cycle counting."""

import numpy as np
import pytest
from scipy.linalg import expm

from hopfforge.chua import ChuaParams
from hopfforge.errors import InvalidInput, MismatchWarning
from hopfforge.solve import Stability
from hopfforge.transform import lift_orbit, params_at
from hopfforge.verify import (
    OrbitResult,
    continuation_sweep,
    count_limit_cycles,
    find_periodic_orbit,
    integrate,
    poincare_map,
)


def linear_params():
    # a = 1, b1 = 3, everything else zero: a pure rotation-plus-center
    # linear system with spectrum {0, +/- 2i}
    return ChuaParams(a=1.0, a1=0.0, a2=0.0, b=0.0, b1=3.0, b2=0.0)


def linear_matrix():
    return np.array([
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
        [-3.0, 1.0, 0.0],
    ])


def test_integrator_matches_matrix_exponential():
    params = linear_params()
    state0 = np.array([0.0, 1.0, 0.0])
    sol = integrate(params, state0, (0.0, np.pi), rtol=1e-12, atol=1e-14)
    want = expm(linear_matrix() * np.pi) @ state0
    assert np.max(np.abs(sol.y[:, -1] - want)) <= 1e-9
    # dense output agrees at an interior time as well
    t_mid = 1.0
    want_mid = expm(linear_matrix() * t_mid) @ state0
    assert np.max(np.abs(sol.sol(t_mid) - want_mid)) <= 1e-9


def test_integrator_validates_tolerances():
    params = linear_params()
    with pytest.raises(InvalidInput):
        integrate(params, (0.0, 1.0, 0.0), (0.0, 1.0), rtol=0.0)
    with pytest.raises(InvalidInput):
        integrate(params, (0.0, 1.0, 0.0), (0.0, 1.0), atol=-1.0)


def test_poincare_return_time_near_linear_period(origin_family, origin_zero):
    eps = 0.01
    params = params_at(origin_family, eps)
    state = lift_orbit(origin_family, eps, origin_zero.r, 0.0, origin_zero.w)
    _, elapsed = poincare_map(params, origin_family, eps, state)
    period = 2.0 * np.pi / origin_family.omega
    assert abs(elapsed - period) <= 0.05 * period


def test_find_periodic_orbit_rejects_out_of_regime_eps(origin_family,
                                                       origin_zero):
    params = params_at(origin_family, 0.01)
    with pytest.raises(InvalidInput):
        find_periodic_orbit(params, origin_family, 0.0, origin_zero)
    with pytest.raises(InvalidInput):
        find_periodic_orbit(params, origin_family, 0.2, origin_zero)


def test_origin_orbit_contracts_and_invariants(origin_family, origin_zero):
    eps = 0.01
    params = params_at(origin_family, eps)
    orbit = find_periodic_orbit(params, origin_family, eps, origin_zero)
    assert isinstance(orbit, OrbitResult)
    period = 2.0 * np.pi / origin_family.omega
    assert abs(orbit.period - period) <= 0.05 * period
    assert orbit.residual <= 1e-9 * (1.0 + np.linalg.norm(orbit.initial_state))
    assert len(orbit.multipliers) == 2
    # the averaged zero is a saddle: exactly one nontrivial multiplier
    # outside the unit circle
    outside = sum(1 for m in orbit.multipliers if abs(m) > 1.0)
    assert outside == 1
    # pullback sits near the averaged zero
    assert np.hypot(orbit.pullback[0] - origin_zero.r,
                    orbit.pullback[1] - origin_zero.w) <= 0.1


def test_origin_multipliers_match_averaged_eigenvalues(origin_family,
                                                       origin_zero):
    eps = 0.005
    params = params_at(origin_family, eps)
    orbit = find_periodic_orbit(params, origin_family, eps, origin_zero)
    lams = sorted((float(np.real(l)) for l in origin_zero.eigenvalues),
                  reverse=True)  # multipliers sort by descending |mu|
    for mu, lam in zip(orbit.multipliers, lams):
        want = 2.0 * np.pi * eps * lam
        assert abs(np.log(abs(mu)) - want) <= 0.1 * abs(want)


def test_find_periodic_orbit_is_deterministic(origin_family, origin_zero):
    eps = 0.01
    params = params_at(origin_family, eps)
    first = find_periodic_orbit(params, origin_family, eps, origin_zero)
    second = find_periodic_orbit(params, origin_family, eps, origin_zero)
    assert np.all(first.initial_state == second.initial_state)
    assert first.period == second.period
    assert first.multipliers == second.multipliers
    assert first.pullback == second.pullback


def test_merged_branch_orbits_verify_at_two_eps(pminus_family,
                                                pminus_zeros_m1):
    fam = pminus_family(-1.0)
    for eps in (0.05, 0.025):
        params = params_at(fam, eps)
        orbits = [find_periodic_orbit(params, fam, eps, z)
                  for z in pminus_zeros_m1]
        assert len(orbits) == 3
        # pairwise distinct well beyond integrator tolerances
        for i in range(3):
            for j in range(i + 1, 3):
                assert np.linalg.norm(orbits[i].initial_state
                                      - orbits[j].initial_state) > 1e-6
        # stability consistency: saddle zeros give one multiplier
        # outside the unit circle, the stable node none
        for z, orbit in zip(pminus_zeros_m1, orbits):
            outside = sum(1 for m in orbit.multipliers if abs(m) > 1.0)
            unstable = sum(1 for l in z.eigenvalues if np.real(l) > 0.0)
            assert outside == unstable


def test_continuation_sweep_rows_and_amplitude_scaling(pminus_family,
                                                       pminus_zeros_m1):
    fam = pminus_family(-1.0)
    node = [z for z in pminus_zeros_m1
            if z.classification is Stability.STABLE_NODE]
    rows = continuation_sweep(fam, [0.05, 0.025], node)
    assert len(rows) == 2
    for row in rows:
        assert "error" not in row
        for key in ("eps", "orbit_id", "period", "pullback_r", "pullback_w",
                    "dist_to_prediction", "mult1_abs", "mult2_abs",
                    "amplitude"):
            assert key in row
        assert np.isfinite(row["dist_to_prediction"])
    # orbit amplitude rescales linearly with eps: halving eps roughly
    # halves the amplitude
    ratio = rows[0]["amplitude"] / rows[1]["amplitude"]
    assert 1.5 <= ratio <= 2.5


def test_continuation_sweep_validates_eps_list(origin_family, origin_zero):
    with pytest.raises(InvalidInput):
        continuation_sweep(origin_family, [], [origin_zero])
    with pytest.raises(InvalidInput):
        continuation_sweep(origin_family, [0.005, 0.01], [origin_zero])


def test_count_limit_cycles_merged_branch(pminus_family, pminus_zeros_m1):
    import warnings

    fam = pminus_family(-1.0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        count = count_limit_cycles(fam, 0.05, zeros=pminus_zeros_m1)
    assert count == 3
    assert not [w for w in caught if issubclass(w.category, MismatchWarning)]


def test_count_limit_cycles_empty_prediction(pminus_family):
    # nothing predicted, nothing found, no complaint
    assert count_limit_cycles(pminus_family(-6.0), 0.05, zeros=[]) == 0


def test_count_limit_cycles_warns_on_mismatch(pminus_family,
                                              pminus_zeros_m1):
    import dataclasses

    # two identical off-orbit seeds: shooting can verify at most one
    # distinct orbit from them, so the verified count cannot reach the
    # predicted two and the mismatch warning must fire
    bogus = dataclasses.replace(pminus_zeros_m1[0], r=1.0, w=5.0)
    with pytest.warns(MismatchWarning):
        found = count_limit_cycles(pminus_family(-1.0), 0.05,
                                   zeros=[bogus, bogus])
    assert found <= 1
