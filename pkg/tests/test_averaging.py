"""Quadrature averaging: first and second order, reference closed
forms, structural preconditions, and spectral accuracy."""

import numpy as np
import pytest

from hopfforge.averaging import (
    average_first,
    average_second,
    closed_form_f_origin,
    closed_form_g_pminus,
)
from hopfforge.errors import FirstOrderNotZero, InvalidFamily, InvalidInput
from hopfforge.transform import (
    PerturbationOrigin,
    PerturbationPMinus,
    standard_form_origin,
    standard_form_pminus,
)

SAMPLE_R = np.array([0.5, 1.0, 2.0, 3.0, 1.7])
SAMPLE_W = np.array([0.0, -1.5, 1.0, 5.0, -3.2])


def random_origin(rng):
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


def random_pminus(rng):
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


def test_grid_size_validation(origin_family):
    field = standard_form_origin(origin_family)
    with pytest.raises(InvalidInput):
        average_first(field, 100)  # not a power of two
    with pytest.raises(InvalidInput):
        average_first(field, 32)  # below the first-order minimum
    with pytest.raises(InvalidInput):
        average_second(field, 64)  # below the second-order minimum


def test_first_order_matches_reference_closed_forms(rng, origin_family):
    families = [origin_family] + [random_origin(rng) for _ in range(3)]
    for fam in families:
        averaged = average_first(standard_form_origin(fam), 256)
        reference = closed_form_f_origin(fam)
        r = rng.uniform(0.05, 4.0, size=20)
        w = rng.uniform(-4.0, 4.0, size=20)
        ref = reference(r, w)
        got = averaged(r, w)
        assert np.max(np.abs(got - ref)) <= 1e-10 * (1.0 + np.max(np.abs(ref)))


def test_first_order_average_vanishes_for_merged_branch(rng, pminus_family):
    families = [pminus_family(-1.0)] + [random_pminus(rng) for _ in range(5)]
    for fam in families:
        averaged = average_first(standard_form_pminus(fam), 128)
        vals = averaged(SAMPLE_R, SAMPLE_W)
        assert np.max(np.abs(vals)) <= 1e-10


def test_second_order_requires_vanishing_first_order(origin_family):
    with pytest.raises(FirstOrderNotZero):
        average_second(standard_form_origin(origin_family), 128)


def test_second_order_benchmark_field_pins(pminus_family):
    # at alpha2 = -6 the averaged field collapses to
    #   g_r = (zeta2/4 + 3/4) r - (9/256) r (w^2 + r^2)
    #   g_w = (w/2) (1 - (w^2 + 6 r^2)/64)
    for zeta2, g10 in ((-1.0, 119.0 / 256.0), (-6.0, -201.0 / 256.0)):
        averaged = average_second(standard_form_pminus(pminus_family(zeta2)),
                                  256)
        got = averaged(1.0, 0.0)
        assert abs(float(got[0]) - g10) <= 1e-13
        assert abs(float(got[1])) <= 1e-13
        r, w = SAMPLE_R, SAMPLE_W
        want_r = (zeta2 / 4.0 + 0.75) * r - (9.0 / 256.0) * r * (w * w + r * r)
        want_w = (w / 2.0) * (1.0 - (w * w + 6.0 * r * r) / 64.0)
        got = averaged(r, w)
        scale = 1.0 + np.max(np.abs(want_r)) + np.max(np.abs(want_w))
        assert np.max(np.abs(got[0] - want_r)) <= 1e-12 * scale
        assert np.max(np.abs(got[1] - want_w)) <= 1e-12 * scale


@pytest.mark.parametrize("zeta2,alpha2", [(-6.0, -6.0), (-2.0, -5.0)])
def test_second_order_reference_delta_is_one_cubic_term(pminus_family,
                                                        zeta2, alpha2):
    # the reference closed form carries 3 r^2 omega^2 where the
    # quadrature yields r^2 omega^2; everything else matches 2*pi times
    # the pipeline
    fam = pminus_family(zeta2, alpha2=alpha2)
    averaged = average_second(standard_form_pminus(fam), 256)
    reference = closed_form_g_pminus(fam)
    a0, a1, om = fam.abar0, fam.abar1, fam.omega
    r, w = SAMPLE_R, SAMPLE_W
    ref = reference(r, w)
    pipe = 2.0 * np.pi * averaged(r, w)
    term = -1.5 * np.pi * a0 ** 3 * a1 * (om ** 2 - 1.0) * r ** 3 / om ** 5
    scale = 1.0 + np.max(np.abs(ref))
    assert np.max(np.abs(ref[0] - pipe[0] - term)) <= 1e-12 * scale
    assert np.max(np.abs(ref[1] - pipe[1])) <= 1e-12 * scale


def test_reference_closed_form_rejects_bad_hypothesis():
    bad = PerturbationPMinus(abar0=1.0, abar1=1.0, zeta0=1.0)
    with pytest.raises(InvalidFamily):
        closed_form_g_pminus(bad)


def test_spectral_convergence_under_grid_doubling(origin_family,
                                                  pminus_family):
    f_lo = average_first(standard_form_origin(origin_family), 256)
    f_hi = average_first(standard_form_origin(origin_family), 512)
    assert np.max(np.abs(f_lo(SAMPLE_R, SAMPLE_W)
                         - f_hi(SAMPLE_R, SAMPLE_W))) <= 1e-12
    field = standard_form_pminus(pminus_family(-1.0))
    g_lo = average_second(field, 256)
    g_hi = average_second(field, 512)
    assert np.max(np.abs(g_lo(SAMPLE_R, SAMPLE_W)
                         - g_hi(SAMPLE_R, SAMPLE_W))) <= 1e-12


def test_averaged_field_broadcasts_and_is_deterministic(pminus_family):
    averaged = average_second(standard_form_pminus(pminus_family(-1.0)), 128)
    grid = averaged(SAMPLE_R[:, None], SAMPLE_W[None, :])
    assert grid.shape == (2, 5, 5)
    # scalar and batched evaluation run the quadrature over different array
    # shapes, so agreement is to rounding, not bitwise
    scalar = averaged(SAMPLE_R[2], SAMPLE_W[3])
    assert np.max(np.abs(scalar - grid[:, 2, 3])) <= 1e-13
    again = average_second(standard_form_pminus(pminus_family(-1.0)), 128)
    assert np.all(again(SAMPLE_R, SAMPLE_W) == averaged(SAMPLE_R, SAMPLE_W))
