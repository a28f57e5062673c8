"""Zeros of averaged fields and the reference closed-form predictions.

Houses the batched damped-Newton root finder used on averaged fields,
a companion-matrix cubic solver, the reference closed forms for the
single zero of the origin family (w*, r*, the Gamma product, the
planar eigenvalue pair), the degree-3 elimination polynomials for the
p_minus family, and the cycle-count prediction entry point.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidFamily, InvalidInput

DEFAULT_DOMAIN = ((1e-4, 20.0), (-20.0, 20.0))
DEFAULT_SEEDS = 24

_STEP_TOL = 1e-12
_MAX_ITER = 80
_MAX_HALVINGS = 30
_DEDUPE_FACTOR = 1e-6
_DEGENERATE_FACTOR = 1e-8


class Stability(str, Enum):
    STABLE_NODE = "stable_node"
    STABLE_FOCUS = "stable_focus"
    UNSTABLE_NODE = "unstable_node"
    UNSTABLE_FOCUS = "unstable_focus"
    SADDLE = "saddle"
    DEGENERATE = "degenerate"


@dataclass
class AveragedZero:
    r: float
    w: float
    jac: np.ndarray
    eigenvalues: tuple[complex, complex]
    classification: Stability
    residual: float


@dataclass(frozen=True)
class Cubic:
    c3: float
    c2: float
    c1: float
    c0: float

    def __post_init__(self):
        if self.c3 == 0.0:
            raise InvalidInput("leading cubic coefficient must be nonzero")

    def __call__(self, x):
        return ((self.c3 * x + self.c2) * x + self.c1) * x + self.c0

    def derivative(self, x):
        return (3.0 * self.c3 * x + 2.0 * self.c2) * x + self.c1

    def as_array(self):
        return np.array([self.c3, self.c2, self.c1, self.c0])


def cubic_roots_complex(coeffs) -> np.ndarray:
    """All three roots of c3 x^3 + c2 x^2 + c1 x + c0 as complex
    numbers, via eigenvalues of the companion matrix of the monic
    form, each polished by guarded Newton steps."""
    c3, c2, c1, c0 = (float(c) for c in coeffs)
    if c3 == 0.0:
        raise InvalidInput("leading cubic coefficient must be nonzero")
    p, q, r = c2 / c3, c1 / c3, c0 / c3
    companion = np.array([
        [0.0, 0.0, -r],
        [1.0, 0.0, -q],
        [0.0, 1.0, -p],
    ])
    roots = np.linalg.eigvals(companion)

    def poly(z):
        return ((z + p) * z + q) * z + r

    def dpoly(z):
        return (3.0 * z + 2.0 * p) * z + q

    for k in range(3):
        z = roots[k]
        for _ in range(2):
            d = dpoly(z)
            if d == 0.0:
                break
            cand = z - poly(z) / d
            if abs(poly(cand)) < abs(poly(z)):
                z = cand
        roots[k] = z
    return roots


def solve_cubic(c) -> list[tuple[float, int]]:
    """Real roots of a cubic with multiplicity flags, ascending.

    Complex-plane root clusters (mutual distance below
    1e-5*(1+|mean|)) are merged into one root with multiplicity equal
    to the cluster size; the cluster mean cancels the dominant
    perturbation of a multiple root. Simple real roots get one final
    Newton polish.
    """
    if isinstance(c, Cubic):
        cubic = c
    else:
        cubic = Cubic(*(float(v) for v in c))
    roots = cubic_roots_complex(cubic.as_array())

    clusters: list[list[complex]] = []
    for z in sorted(roots, key=lambda v: (v.real, v.imag)):
        for cl in clusters:
            mean = sum(cl) / len(cl)
            if abs(z - mean) <= 1e-5 * (1.0 + abs(mean)):
                cl.append(z)
                break
        else:
            clusters.append([z])

    out: list[tuple[float, int]] = []
    for cl in clusters:
        mean = sum(cl) / len(cl)
        mult = len(cl)
        if abs(mean.imag) > 1e-7 * (1.0 + abs(mean)):
            continue
        x = mean.real
        if mult == 1:
            d = cubic.derivative(x)
            if d != 0.0:
                x = x - cubic(x) / d
        out.append((x, mult))
    out.sort(key=lambda t: t[0])
    return out


def _eval_field(field, r, w):
    r = np.asarray(r, dtype=float)
    w = np.asarray(w, dtype=float)
    return np.asarray(field.eval(r, w), dtype=float)


def _residual_norm(values):
    return np.hypot(values[0], values[1])


def _jacobian_central(field, r, w, h_scale):
    hr = h_scale * (1.0 + np.abs(r))
    hw = h_scale * (1.0 + np.abs(w))
    col_r = (_eval_field(field, r + hr, w) - _eval_field(field, r - hr, w)) / (2.0 * hr)
    col_w = (_eval_field(field, r, w + hw) - _eval_field(field, r, w - hw)) / (2.0 * hw)
    return np.stack([col_r, col_w], axis=1)


def _jacobian_richardson(field, r, w, h_scale=2e-3):
    coarse = _jacobian_central(field, r, w, h_scale)
    fine = _jacobian_central(field, r, w, h_scale / 2.0)
    return (4.0 * fine - coarse) / 3.0


def _eig2(jac):
    tr = jac[0, 0] + jac[1, 1]
    det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
    half = tr / 2.0
    disc = half * half - det
    if disc >= 0.0:
        s = np.sqrt(disc)
        return (complex(half + s), complex(half - s))
    s = np.sqrt(-disc)
    return (complex(half, s), complex(half, -s))


def _classify(eigenvalues, degenerate: bool) -> Stability:
    if degenerate:
        return Stability.DEGENERATE
    lam1, lam2 = eigenvalues
    if lam1.imag != 0.0:
        if lam1.real < 0.0:
            return Stability.STABLE_FOCUS
        if lam1.real > 0.0:
            return Stability.UNSTABLE_FOCUS
        return Stability.DEGENERATE
    p = lam1.real * lam2.real
    if p < 0.0:
        return Stability.SADDLE
    if p == 0.0:
        return Stability.DEGENERATE
    return Stability.STABLE_NODE if max(lam1.real, lam2.real) < 0.0 else Stability.UNSTABLE_NODE


def find_zeros(field, domain=DEFAULT_DOMAIN, seeds: int = DEFAULT_SEEDS) -> list[AveragedZero]:
    """Zeros of an averaged field inside a rectangle of the (r, w)
    half-plane.

    Damped Newton runs from a seeds x seeds grid, batched over all
    seeds at once; convergence is declared when the undamped step
    drops below 1e-12*(1+|point|), seeds whose residual cannot be
    decreased within 30 step halvings are dropped, and survivors are
    deduplicated at 1e-6 of the domain diameter. Each surviving root
    gets a Richardson-extrapolated Jacobian, its eigenvalue pair, and
    a stability class; |det| <= 1e-8*|jac|^2 marks it degenerate.
    """
    (r_lo, r_hi), (w_lo, w_hi) = domain
    if not (r_lo > 0.0 and r_hi > r_lo and w_hi > w_lo):
        raise InvalidInput("domain must satisfy 0 < r_lo < r_hi and w_lo < w_hi")
    if seeds < 2:
        raise InvalidInput("seeds must be at least 2")

    rs, ws = np.meshgrid(
        np.linspace(r_lo, r_hi, seeds), np.linspace(w_lo, w_hi, seeds)
    )
    pts = np.stack([rs.ravel(), ws.ravel()])
    values = _eval_field(field, pts[0], pts[1])
    res = _residual_norm(values)
    converged = np.zeros(pts.shape[1], dtype=bool)
    alive = np.isfinite(res)

    for _ in range(_MAX_ITER):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        p = pts[:, idx]
        v = values[:, idx]

        jac = _jacobian_central(field, p[0], p[1], 2e-3)
        det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
        solvable = np.abs(det) > 1e-300
        alive[idx[~solvable]] = False
        safe_det = np.where(solvable, det, 1.0)
        step = np.stack([
            (jac[1, 1] * v[0] - jac[0, 1] * v[1]) / safe_det,
            (jac[0, 0] * v[1] - jac[1, 0] * v[0]) / safe_det,
        ])

        size = _residual_norm(step)
        scale = 1.0 + _residual_norm(p)
        done = solvable & (size <= _STEP_TOL * scale)
        converged[idx[done]] = True
        alive[idx[done]] = False

        work = solvable & ~done
        widx = idx[work]
        if widx.size == 0:
            continue
        p_w = p[:, work]
        step_w = step[:, work]
        res_w = res[widx]

        t = np.ones(widx.size)
        improved = np.zeros(widx.size, dtype=bool)
        cand = p_w.copy()
        cand_values = v[:, work].copy()
        cand_res = res_w.copy()
        for _ in range(_MAX_HALVINGS + 1):
            open_cols = np.flatnonzero(~improved)
            if open_cols.size == 0:
                break
            trial = (p_w[:, open_cols]
                     - t[open_cols] * step_w[:, open_cols])
            trial_values = _eval_field(field, trial[0], trial[1])
            trial_res = _residual_norm(trial_values)
            better = trial_res < res_w[open_cols]
            hit = open_cols[better]
            cand[:, hit] = trial[:, better]
            cand_values[:, hit] = trial_values[:, better]
            cand_res[hit] = trial_res[better]
            improved[hit] = True
            t[open_cols[~better]] /= 2.0
        alive[widx[~improved]] = False
        moved = widx[improved]
        pts[:, moved] = cand[:, improved]
        values[:, moved] = cand_values[:, improved]
        res[moved] = cand_res[improved]

    keep = converged
    slack_r = 1e-9 * (1.0 + abs(r_hi))
    slack_w = 1e-9 * (1.0 + abs(w_hi))
    keep &= (pts[0] >= r_lo - slack_r) & (pts[0] <= r_hi + slack_r)
    keep &= (pts[1] >= w_lo - slack_w) & (pts[1] <= w_hi + slack_w)

    diameter = np.hypot(r_hi - r_lo, w_hi - w_lo)
    dedupe = _DEDUPE_FACTOR * diameter
    roots: list[tuple[float, float, float]] = []
    order = np.argsort(res)
    for k in order:
        if not keep[k]:
            continue
        r_k, w_k = float(pts[0, k]), float(pts[1, k])
        if any(np.hypot(r_k - r0, w_k - w0) <= dedupe for r0, w0, _ in roots):
            continue
        roots.append((r_k, w_k, float(res[k])))

    out = []
    for r_k, w_k, res_k in roots:
        jac = _jacobian_richardson(field, np.float64(r_k), np.float64(w_k))
        jac = np.asarray(jac, dtype=float).reshape(2, 2)
        det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
        frob2 = float(np.sum(jac * jac))
        degenerate = abs(det) <= _DEGENERATE_FACTOR * frob2
        eigs = _eig2(jac)
        out.append(AveragedZero(
            r=r_k,
            w=w_k,
            jac=jac,
            eigenvalues=eigs,
            classification=_classify(eigs, degenerate),
            residual=res_k,
        ))
    out.sort(key=lambda z: (z.r, z.w))
    return out


def closed_form_zero_origin(family) -> tuple[float, float] | None:
    """The single predicted zero (r*, w*) of the first-order averaged
    field of an origin family, from the reference closed forms.

    w* comes from the printed r-component; r* solves the printed
    second component at w = w*, which requires a positive radicand —
    None is returned otherwise (no cycle is predicted).
    """
    a0, a2 = family.abar0, family.abar2
    b0, b2 = family.beta0, family.beta2
    om = family.omega
    om2 = om * om
    denom = 2.0 * a0 * a0 * a2 * (om2 - 1.0)
    if denom == 0.0:
        raise InvalidInput("requires abar0*abar2 != 0 and omega != 1")
    w_star = (a0 * b0 * om2 * (1.0 - om2) + b2 * om2 * om2) / denom
    r_sq = -2.0 * w_star * (b0 * om2 + a0 * a2 * w_star) / (a0 * a2 * om2)
    if r_sq <= 0.0:
        return None
    return (float(np.sqrt(r_sq)), float(w_star))


def gamma(family) -> tuple[float, float]:
    """The reference existence product Gamma evaluated verbatim, next
    to the indicator s^2 - beta2^2 omega^4 (s = abar0 beta0 (1-omega^2))
    whose sign actually separates families with and without a
    positive-r zero; the two disagree because the product's factors
    differ only by a factor omega^2, making it a perfect square."""
    a0 = family.abar0
    b0, b2 = family.beta0, family.beta2
    om2 = family.omega ** 2
    s = a0 * b0 * (1.0 - om2)
    gamma_printed = (s + b2 * om2) * (s * om2 + b2 * om2 * om2)
    existence_indicator = s * s - b2 * b2 * om2 * om2
    return (float(gamma_printed), float(existence_indicator))


def stability_eigenvalues_origin(family) -> tuple[complex, complex]:
    """Eigenvalue pair of the planar averaged system at the origin
    family's zero, from the reference closed form."""
    a0, b0, b2 = family.abar0, family.beta0, family.beta2
    om = family.omega
    om2 = om * om
    if om2 == 1.0:
        raise InvalidInput("requires omega != 1")
    disc = om2 ** 3 * (b2 * b2 * om2 * om2 * (3.0 - 2.0 * om2)
                       + 2.0 * a0 * a0 * b0 * b0 * (om2 - 1.0) ** 3)
    sq = np.sqrt(complex(disc))
    denom = 2.0 * om2 ** 3 * (om2 - 1.0)
    lam_plus = (-b2 * om2 * om2 * om + sq) / denom
    lam_minus = (-b2 * om2 * om2 * om - sq) / denom
    return (complex(lam_plus), complex(lam_minus))


def _g1_cubic_coefficients(family, reading: str) -> Cubic:
    """Coefficients of the degree-3 elimination polynomial in w.

    The printed constant term contains an ambiguously grouped factor;
    'verbatim' keeps the grouping exactly as printed and 'factored'
    attaches zeta2 omega^2 to the whole (alpha2 + 6s) group. Both are
    reported, neither is asserted.
    """
    a0, a1 = family.abar0, family.abar1
    al2, z0, z2 = family.alpha2, family.zeta0, family.zeta2
    om2 = family.omega ** 2
    s = np.sqrt(-a1 * z0)
    c3 = 30.0 * (om2 - 1.0) * a0 ** 4 * a1 ** 3
    c2 = -15.0 * (om2 - 1.0) * om2 * a1 * a1 * a0 ** 3 * (al2 + 6.0 * s)
    c1 = 2.0 * a0 * a1 * om2 * om2 * (
        -6.0 * a1 * z2 * om2
        + a0 * (al2 * al2 - 42.0 * a1 * z0 + 15.0 * al2 * s * (om2 - 1.0))
    )
    if reading == "verbatim":
        group = a1 * (al2 + 6.0 * s * z2 * om2)
    else:
        group = a1 * (al2 + 6.0 * s) * z2 * om2
    c0 = 2.0 * om2 ** 3 * (
        group
        + a0 * (8.0 * a1 * al2 * z0 - al2 * al2 * s
                - 12.0 * (-a1 * z0) * s * (om2 - 1.0))
    )
    return Cubic(float(c3), float(c2), float(c1), float(c0))


def _g2_parts(family, w: float) -> tuple[float, float]:
    """P1(w) and P2(w) of the printed second elimination polynomial
    P1(w) r^2 + P2(w)."""
    a0, a1 = family.abar0, family.abar1
    al2, z0 = family.alpha2, family.zeta0
    om2 = family.omega ** 2
    s = np.sqrt(-a1 * z0)
    p1 = a0 * a1 * om2 * (6.0 * a0 * a1 * w - al2 * om2 - 6.0 * om2 * s)
    p2 = 2.0 * w * (2.0 * a0 * a0 * a1 * a1 * w * w
                    - a0 * a1 * w * (al2 + 6.0 * s) * om2
                    + 2.0 * (-2.0 * a1 * z0 + al2 * s) * om2 * om2)
    return (float(p1), float(p2))


def groebner_reference(family, pipeline_zeros=None) -> dict:
    """Report-only evaluation of the printed elimination pair: solve
    the cubic in w, back-substitute for r > 0, and tabulate distances
    to pipeline zeros. Never asserted; both grouping readings of the
    ambiguous constant term are included.

    pipeline_zeros, when given, is a list of AveragedZero (or (r, w)
    pairs) to reconcile against; pass the find_zeros output to avoid
    recomputing it here.
    """
    if not family.abar1 * family.zeta0 < 0.0:
        raise InvalidFamily("requires abar1*zeta0 < 0")

    if pipeline_zeros is None:
        _, pipeline_zeros = predict_cycle_count(family)
    pipeline_pts = []
    for z in pipeline_zeros:
        if isinstance(z, AveragedZero):
            pipeline_pts.append((z.r, z.w))
        else:
            pipeline_pts.append((float(z[0]), float(z[1])))

    report: dict = {
        "readings": {},
        "pipeline_zeros": pipeline_pts,
        "distance_table": [],
    }
    for reading in ("verbatim", "factored"):
        cubic = _g1_cubic_coefficients(family, reading)
        w_roots = [x for x, _ in solve_cubic(cubic)]
        solutions = []
        for w in w_roots:
            p1, p2 = _g2_parts(family, w)
            if p1 == 0.0:
                continue
            r_sq = -p2 / p1
            if r_sq > 0.0:
                solutions.append((float(np.sqrt(r_sq)), float(w)))
        report["readings"][reading] = {
            "coefficients": dataclasses.astuple(cubic),
            "w_roots": w_roots,
            "solutions": solutions,
        }
        for r, w in solutions:
            if pipeline_pts:
                dists = [np.hypot(r - pr, w - pw) for pr, pw in pipeline_pts]
                k = int(np.argmin(dists))
                nearest, dist = pipeline_pts[k], float(dists[k])
            else:
                nearest, dist = None, None
            report["distance_table"].append({
                "reading": reading,
                "r": r,
                "w": w,
                "nearest_pipeline": nearest,
                "distance": dist,
            })
    return report


def predict_cycle_count(family, zeta2_override=None, grid_size: int = 512,
                        domain=DEFAULT_DOMAIN, seeds: int = DEFAULT_SEEDS):
    """Number of limit cycles predicted for a perturbation family:
    zeros of the averaged field with r > 0, excluding degenerate ones.
    First-order averaging for origin unfoldings, second-order for
    p_minus ones (whose first average vanishes identically).
    Returns (count, zeros)."""
    from .averaging import average_first, average_second
    from .transform import (
        PerturbationOrigin,
        standard_form_origin,
        standard_form_pminus,
    )

    if isinstance(family, PerturbationOrigin):
        if zeta2_override is not None:
            raise InvalidInput("zeta2_override applies to p_minus families only")
        field = standard_form_origin(family)
        averaged = average_first(field, grid_size)
    else:
        if zeta2_override is not None:
            family = dataclasses.replace(family, zeta2=float(zeta2_override))
        field = standard_form_pminus(family)
        averaged = average_second(field, grid_size)
    zeros = find_zeros(averaged, domain, seeds)
    count = sum(
        1 for z in zeros
        if z.r > 0.0 and z.classification is not Stability.DEGENERATE
    )
    return count, zeros
