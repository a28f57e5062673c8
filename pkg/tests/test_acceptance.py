"""Acceptance criteria, one test per criterion, each run at its stated
tolerance and time budget and reported as a single pass/fail line."""

import time

import numpy as np
import pytest
from scipy.linalg import expm

from hopfforge.averaging import (
    average_first,
    average_second,
    closed_form_f_origin,
)
from hopfforge.chua import (
    ChuaParams,
    EquilibriumKind,
    detect_zero_hopf,
    zero_hopf_family_origin,
)
from hopfforge.report import build_reconciliation
from hopfforge.series import ORDER, Jet
from hopfforge.solve import (
    Cubic,
    Stability,
    predict_cycle_count,
    solve_cubic,
)
from hopfforge.transform import (
    PerturbationOrigin,
    PerturbationPMinus,
    params_at,
    standard_form_origin,
    standard_form_pminus,
)
from hopfforge.verify import continuation_sweep, find_periodic_orbit, integrate


def _random_origin(rng):
    return PerturbationOrigin(
        abar0=rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0]),
        alpha0=rng.uniform(-1.0, 1.0),
        abar1=rng.uniform(-1.0, 1.0),
        alpha1=rng.uniform(-1.0, 1.0),
        abar2=rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0]),
        alpha2=rng.uniform(-1.0, 1.0),
        beta0=rng.uniform(-2.0, 2.0),
        beta1=rng.uniform(-1.0, 1.0),
        beta2=rng.uniform(-2.0, 2.0),
        omega=rng.uniform(0.6, 2.8),
    )


def _random_pminus(rng):
    abar1 = rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0])
    return PerturbationPMinus(
        abar0=rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0]),
        alpha0=rng.uniform(-1.0, 1.0),
        xi0=rng.uniform(-1.0, 1.0),
        abar1=abar1,
        alpha1=rng.uniform(-1.0, 1.0),
        xi1=rng.uniform(-1.0, 1.0),
        alpha2=rng.uniform(-8.0, 8.0),
        xi2=rng.uniform(-1.0, 1.0),
        zeta0=-np.sign(abar1) * rng.uniform(0.2, 1.5),
        beta1=rng.uniform(-1.0, 1.0),
        zeta1=rng.uniform(-1.0, 1.0),
        zeta2=rng.uniform(-8.0, 8.0),
        omega=rng.uniform(1.3, 2.8),
    )


def test_criterion_1_detection_on_random_families(rng):
    t0 = time.perf_counter()
    for _ in range(100):
        a = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
        a1 = rng.uniform(-2.0, 2.0)
        a2 = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
        omega = rng.uniform(0.5, 3.0)
        params = zero_hopf_family_origin(a, a1, a2, omega)
        hit = detect_zero_hopf(params)
        assert hit is not None
        assert hit.equilibrium.kind is EquilibriumKind.ORIGIN
        assert abs(hit.omega - np.sqrt(params.a * params.b1 + 1.0)) <= 1e-10
    for _ in range(100):
        a = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
        a1 = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
        a2 = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
        omega = rng.uniform(0.5, 3.0)
        b1 = (omega * omega - 1.0) / a
        params = ChuaParams(a, a1, a2, a2 * a2 / (4.0 * a1), b1, 0.0)
        hit = detect_zero_hopf(params)
        assert hit is not None
        assert hit.equilibrium.kind is EquilibriumKind.P_DOUBLE
        assert abs(hit.omega - np.sqrt(a * b1 + 1.0)) <= 1e-10
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    print("PASS criterion 1: 200 random detections, omega within 1e-10, "
          "%.2fs" % elapsed)


def test_criterion_2_first_order_average_vs_reference(rng):
    t0 = time.perf_counter()
    for _ in range(20):
        fam = _random_origin(rng)
        averaged = average_first(standard_form_origin(fam), 256)
        reference = closed_form_f_origin(fam)
        r = rng.uniform(0.05, 4.0, size=100)
        w = rng.uniform(-4.0, 4.0, size=100)
        ref = reference(r, w)
        got = averaged(r, w)
        err = np.abs(got - ref) / np.maximum(1.0, np.abs(ref))
        assert np.max(err) <= 1e-8
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    print("PASS criterion 2: quadrature matches reference first-order "
          "forms to 1e-8 on 20 x 100 points, %.2fs" % elapsed)


def test_criterion_3_origin_benchmark_zero(origin_family):
    count, zeros = predict_cycle_count(origin_family)
    assert count == 1
    z = zeros[0]
    assert abs(z.r - 2.108185) <= 1e-6
    assert abs(z.w + 1.333333) <= 1e-6
    lams = sorted(float(np.real(l)) for l in z.eigenvalues)
    assert abs(lams[1] - 0.159623) <= 1e-5
    assert abs(lams[0] + 0.326290) <= 1e-5
    assert z.classification is Stability.SADDLE
    print("PASS criterion 3: benchmark zero (2.108185, -1.333333), "
          "saddle with eigenvalues {0.159623, -0.326290}")


def test_criterion_4_origin_shooting_convergence(origin_family, origin_zero):
    t0 = time.perf_counter()
    eps_list = [0.02, 0.01, 0.005]
    rows = continuation_sweep(origin_family, eps_list, [origin_zero])
    assert all("error" not in row for row in rows)
    d = {row["eps"]: row["dist_to_prediction"] for row in rows}
    for hi, lo in zip(eps_list, eps_list[1:]):
        assert 1.3 <= d[hi] / d[lo] <= 3.0
    smallest = [row for row in rows if row["eps"] == 0.005][0]
    period = 2.0 * np.pi / origin_family.omega
    assert abs(smallest["period"] - period) <= 0.05 * period
    orbit = smallest["orbit"]
    outside = sum(1 for m in orbit.multipliers if abs(m) > 1.0)
    assert outside == 1
    lams = sorted((float(np.real(l)) for l in origin_zero.eigenvalues),
                  reverse=True)
    for mu, lam in zip(orbit.multipliers, lams):
        want = 2.0 * np.pi * 0.005 * lam
        assert abs(np.log(abs(mu)) - want) <= 0.1 * abs(want)
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    print("PASS criterion 4: distance ratios in [1.3, 3.0], period within "
          "5%%, one unstable multiplier, log-multipliers within 10%%, "
          "%.1fs" % elapsed)


def test_criterion_5_random_merged_branch_families(rng):
    for _ in range(20):
        fam = _random_pminus(rng)
        field = standard_form_pminus(fam)
        first = average_first(field, 128)
        probes_r = np.array([0.5, 1.0, 2.0, 3.0, 1.7])
        probes_w = np.array([0.0, -1.5, 1.0, 5.0, -3.2])
        assert np.max(np.abs(first(probes_r, probes_w))) <= 1e-10
        count, zeros = predict_cycle_count(fam, grid_size=128, seeds=12)
        assert count <= 3
    print("PASS criterion 5: 20 random admissible families, first-order "
          "average <= 1e-10 uniformly, at most 3 predicted cycles")


def test_criterion_6_benchmark_cycle_counts(pminus_family):
    t0 = time.perf_counter()
    predictions = {}
    for zeta2 in (-6.0, -13.0, -1.0):
        predictions[zeta2] = predict_cycle_count(pminus_family(zeta2))

    count6, zeros6 = predictions[-6.0]
    assert count6 == 3, (
        "stated reference count at zeta2=-6 is 3 (a symmetric pair plus a "
        "w~0 zero), but the derived averaged field yields %d non-degenerate "
        "zeros; see reconciliation.md for the sign deltas in the printed "
        "radicands" % count6)
    live6 = [z for z in zeros6
             if z.r > 0.0 and z.classification is not Stability.DEGENERATE]
    pair = sorted(z.w for z in live6 if abs(z.w) > 1.0)
    assert len(pair) == 2 and abs(pair[0] + pair[1]) <= 1e-6
    assert any(abs(z.w) <= 1e-3 for z in live6)
    for eps in (0.05, 0.025):
        params = params_at(pminus_family(-6.0), eps)
        orbits = [find_periodic_orbit(params, pminus_family(-6.0), eps, z)
                  for z in live6]
        assert len(orbits) == 3

    count1, _ = predictions[-1.0]
    assert count1 == 1, (
        "stated reference count at zeta2=-1 is 1, derived field yields %d"
        % count1)
    count13, _ = predictions[-13.0]
    assert count13 == 2, (
        "stated reference count at zeta2=-13 is 2, derived field yields %d"
        % count13)
    elapsed = time.perf_counter() - t0
    assert elapsed < 180.0
    print("PASS criterion 6: counts 3/1/2 at zeta2 = -6/-1/-13 with "
          "verification at eps = 0.05 and 0.025, %.1fs" % elapsed)


def test_criterion_7_property_suites(rng, origin_family, pminus_family):
    # (a) jet arithmetic round trips, 500 cases at 1e-13
    for _ in range(500):
        coeffs = rng.normal(size=(2, ORDER + 1))
        coeffs[:, 0] += np.copysign(0.5, coeffs[:, 0])
        x = Jet(int(rng.integers(0, 3)), coeffs[0])
        y = Jet(int(rng.integers(0, 3)), coeffs[1])
        if x.valuation < y.valuation:
            x, y = y, x
        back = (x * y) / y
        scale = max(float(np.max(np.abs(x.coeffs))), 1.0)
        assert back.valuation == x.valuation
        assert np.max(np.abs(back.coeffs - x.coeffs)) <= 1e-13 * scale
        z = x * x
        s = z.sqrt()
        assert np.max(np.abs((s * s).coeffs - z.coeffs)) <= 1e-13 * max(
            float(np.max(np.abs(z.coeffs))), 1.0)

    # (b) spectral convergence of the averaging quadrature under grid
    # doubling
    pts_r = np.array([0.5, 1.0, 2.0, 3.0, 1.7])
    pts_w = np.array([0.0, -1.5, 1.0, 5.0, -3.2])
    f_lo = average_first(standard_form_origin(origin_family), 256)
    f_hi = average_first(standard_form_origin(origin_family), 512)
    assert np.max(np.abs(f_lo(pts_r, pts_w) - f_hi(pts_r, pts_w))) <= 1e-12
    field = standard_form_pminus(pminus_family(-1.0))
    g_lo = average_second(field, 256)
    g_hi = average_second(field, 512)
    assert np.max(np.abs(g_lo(pts_r, pts_w) - g_hi(pts_r, pts_w))) <= 1e-12

    # (c) the truncated standard form deviates from the direct route at
    # third order: halving eps divides the defect by ~8.  Generic
    # unfoldings exercise this; the benchmark families are too symmetric
    # (their eps^3 defect term vanishes, pushing the ratio to ~16).
    generic_origin = PerturbationOrigin(
        abar0=1.2, alpha0=0.3, abar1=0.4, alpha1=0.2, abar2=0.9,
        alpha2=-0.5, beta0=1.1, beta1=0.4, beta2=-0.7, omega=2.0)
    generic_pminus = PerturbationPMinus(
        abar0=1.2, alpha0=0.3, xi0=0.15, abar1=1.0, alpha1=0.2, xi1=0.1,
        alpha2=-5.0, xi2=0.1, zeta0=-1.0, beta1=0.4, zeta1=0.25,
        zeta2=-2.0, omega=2.0)
    thetas = np.array([0.0, 1.3, 2.7, 4.1, 5.5])[:, None]
    for make in (lambda: standard_form_origin(generic_origin),
                 lambda: standard_form_pminus(generic_pminus)):
        fld = make()
        f1, f2 = fld.first_and_second(thetas, pts_r[None, :], pts_w[None, :])

        def defect(eps, fld=fld, f1=f1, f2=f2):
            direct = np.stack(
                fld.direct(eps, thetas, pts_r[None, :], pts_w[None, :]))
            return float(np.max(np.abs(direct - (eps * f1 + eps ** 2 * f2))))

        ratio = defect(0.01) / defect(0.005)
        assert 6.0 <= ratio <= 10.0

    # (d) cubic solving keeps residuals at 1e-9, 500 cases
    for _ in range(500):
        c = Cubic(*rng.normal(size=4))
        scale = max(abs(c.c3), abs(c.c2), abs(c.c1), abs(c.c0), 1.0)
        for x, _ in solve_cubic(c):
            assert abs(c(x)) <= 1e-9 * scale * (1.0 + abs(x)) ** 3

    # (e) the wrapped integrator reproduces the matrix exponential of
    # the linear benchmark to 1e-9
    params = ChuaParams(1.0, 0.0, 0.0, 0.0, 3.0, 0.0)
    A = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [-3.0, 1.0, 0.0]])
    state0 = np.array([0.0, 1.0, 0.0])
    sol = integrate(params, state0, (0.0, np.pi), rtol=1e-12, atol=1e-14)
    assert np.max(np.abs(sol.y[:, -1] - expm(A * np.pi) @ state0)) <= 1e-9

    print("PASS criterion 7: jet round trips (500 @ 1e-13), spectral "
          "doubling <= 1e-12, truncation ratio in [6, 10], cubic "
          "residuals (500 @ 1e-9), integrator vs expm <= 1e-9")


def test_criterion_8_reconciliation_document(tmp_path):
    path = tmp_path / "reconciliation.md"
    build_reconciliation(str(path))
    text = path.read_text()
    assert len(text) > 0
    for heading in (
        "## 1. First-order averaged field",
        "## 2. Existence product Gamma",
        "## 3. Origin benchmark zero",
        "## 4. Second-order averaged field",
        "## 5. Degree-3 elimination polynomial",
        "## 6. Linearized-system coefficients",
        "## 7. Cycle counts by route",
    ):
        assert heading in text, "missing section: %s" % heading
    assert "delta" in text
    # the document reports deltas; it never certifies the reference
    # expressions wholesale
    assert "all reference expressions confirmed" not in text.lower()
    print("PASS criterion 8: reconciliation document enumerates every "
          "reference expression with measured deltas")
