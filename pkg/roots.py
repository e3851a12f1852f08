"""Fixed points of the scalar map f: quartic construction, root finding, stability.

x = f(x) is cleared of its denominator into the quartic
    p(x) = x M(x) - N(x)
        = a^6 c^4 x^4 + (3a^4 b^2 - a^6 b^6 c^4) x^3 + (3a^2 b^4 - 3a^4 b^4) x^2
          + (c^4 b^6 - 3a^2 b^2) x - c^4,
whose zeros are exactly Fix(f). Roots come from Ferrari's method with a
resolvent cubic (companion-matrix eigenvalues when that loses accuracy),
then a damped Newton polish on the original polynomial.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from errors import ParameterDomainError, SolverError
from model import BoltzmannWeights, CouplingParams, weights
from recurrence import f, f_prime

logger = logging.getLogger(__name__)

RESIDUAL_REL_TOL = 1e-9
REAL_TOL = 1e-9
NEAR_REAL_TOL = 1e-4
FIXED_POINT_TOL = 1e-8
STABILITY_BAND = 1e-9
NEWTON_MAX_ITER = 60
BACKWARD_ERROR_TOL = 1e-12

LN_SQRT3 = 0.5 * math.log(3.0)

STABLE = "stable"
UNSTABLE = "unstable"
NEUTRAL = "neutral"
SUPERSTABLE = "superstable"


@dataclass(frozen=True)
class QuarticPoly:
    """c4 x^4 + c3 x^3 + c2 x^2 + c1 x + c0, coefficients highest degree first."""

    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if len(coeffs) != 5:
            raise ParameterDomainError(f"a quartic needs 5 coefficients, got {len(coeffs)}")
        if not all(math.isfinite(c) for c in coeffs):
            raise ParameterDomainError(f"quartic coefficients must be finite: {coeffs}")
        if coeffs[0] == 0.0:
            raise ParameterDomainError("leading coefficient of a quartic must be non-zero")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def from_roots(cls, roots, leading=1.0):
        coeffs = leading * np.poly(np.asarray(roots, dtype=complex))
        return cls(tuple(np.real(coeffs)))

    def __call__(self, x):
        return np.polyval(self.coefficients, x)

    def derivative(self, x):
        return np.polyval(np.polyder(self.coefficients), x)

    @property
    def scale(self):
        return max(abs(c) for c in self.coefficients)

    def scaled(self):
        return QuarticPoly(tuple(c / self.scale for c in self.coefficients))

    def residual_bound(self, r):
        return RESIDUAL_REL_TOL * self.scale * max(1.0, abs(r)) ** 4

    def to_list(self):
        return list(self.coefficients)


def quartic_from_f(w: BoltzmannWeights) -> QuarticPoly:
    """Denominator-cleared fixed-point equation x M(x) - N(x) = 0."""
    a2, b2, c4 = w.a ** 2, w.b ** 2, w.c ** 4
    return QuarticPoly((
        a2 ** 3 * c4,
        3 * a2 ** 2 * b2 - a2 ** 3 * b2 ** 3 * c4,
        3 * a2 * b2 ** 2 - 3 * a2 ** 2 * b2 ** 2,
        c4 * b2 ** 3 - 3 * a2 * b2,
        -c4,
    ))


# --- closed-form solve ----------------------------------------------------------

def _cbrt(z):
    if z == 0:
        return 0j
    return cmath.exp(cmath.log(z) / 3)


def _solve_quadratic(B, C):
    """Roots of y^2 + B y + C = 0 without cancellation."""
    disc = cmath.sqrt(B * B - 4 * C)
    if (B.conjugate() * disc).real < 0:
        disc = -disc
    q = -(B + disc) / 2
    if q == 0:
        return [0j, 0j]
    return [q, C / q]


def solve_cubic(alpha, beta, gamma):
    """Roots of the monic cubic m^3 + alpha m^2 + beta m + gamma (Cardano, complex)."""
    alpha, beta, gamma = complex(alpha), complex(beta), complex(gamma)
    P = beta - alpha ** 2 / 3
    Q = 2 * alpha ** 3 / 27 - alpha * beta / 3 + gamma
    disc = cmath.sqrt((Q / 2) ** 2 + (P / 3) ** 3)
    u = _cbrt(-Q / 2 + disc)
    if abs(u) < 1e-300:
        u = _cbrt(-Q / 2 - disc)
    omega = complex(-0.5, math.sqrt(3) / 2)
    roots = []
    for k in range(3):
        uk = u * omega ** k
        vk = -P / (3 * uk) if abs(uk) > 1e-300 else 0j
        roots.append(uk + vk - alpha / 3)
    return roots


def _ferrari(coefficients):
    c4, c3, c2, c1, c0 = coefficients
    B, C, D, E = c3 / c4, c2 / c4, c1 / c4, c0 / c4
    shift = B / 4
    p = C - 3 * B ** 2 / 8
    q = D - B * C / 2 + B ** 3 / 8
    r = E - B * D / 4 + B ** 2 * C / 16 - 3 * B ** 4 / 256

    # (y^2 + m)^2 = (2m - p) y^2 - q y + (m^2 - r) is a perfect square when
    # 8m^3 - 4p m^2 - 8r m + 4pr - q^2 = 0
    candidates = solve_cubic(-p / 2, -r, (4 * p * r - q * q) / 8)
    m = max(candidates, key=lambda z: abs(2 * z - p))
    s = cmath.sqrt(2 * m - p)

    if abs(s) < 1e-14 * (1 + abs(p)):
        ys = []
        for y2 in _solve_quadratic(complex(p), complex(r)):
            root = cmath.sqrt(y2)
            ys.extend([root, -root])
    else:
        ys = _solve_quadratic(-s, m + q / (2 * s)) + _solve_quadratic(s, m - q / (2 * s))
    return [y - shift for y in ys]


def _newton_polish(poly, root):
    """Damped Newton on the polynomial; never accepts a step that raises |p|."""
    value = poly(root)
    for _ in range(NEWTON_MAX_ITER):
        slope = poly.derivative(root)
        if slope == 0 or value == 0:
            break
        step = value / slope
        damping = 1.0
        improved = False
        while damping >= 1 / 64:
            candidate = root - damping * step
            candidate_value = poly(candidate)
            if abs(candidate_value) < abs(value):
                root, value, improved = candidate, candidate_value, True
                break
            damping /= 2
        if not improved or abs(damping * step) <= 1e-16 * (1 + abs(root)):
            break
    return complex(root)


def _snap_real(poly, root):
    re, im = root.real, root.imag
    if abs(im) <= REAL_TOL * (1 + abs(re)):
        return complex(re, 0.0)
    if abs(im) <= NEAR_REAL_TOL * (1 + abs(re)) and abs(poly(re)) <= poly.residual_bound(re):
        # clustered real roots (multiplicity > 1) come back as a tight complex spread
        return complex(re, 0.0)
    return root


def backward_error(p: QuarticPoly, r):
    """|p(r)| relative to sum |c_i| |r|^i, the size of the terms Horner adds up."""
    magnitude = float(np.polyval(np.abs(p.coefficients), abs(r)))
    return float(abs(p(r))) / magnitude if magnitude > 0 else 0.0


def _balance(p: QuarticPoly):
    """Scale p to unit max coefficient and substitute x = sigma y, sigma = |c0/c4|^(1/4)."""
    scaled = p.scaled()
    c4, c0 = scaled.coefficients[0], scaled.coefficients[-1]
    sigma = abs(c0 / c4) ** 0.25 if c0 != 0 else 1.0
    balanced = [c * sigma ** (4 - k) for k, c in enumerate(scaled.coefficients)]
    top = max(abs(c) for c in balanced)
    return scaled, sigma, [c / top for c in balanced]


def _polish_all(poly, raw):
    polished = []
    for k, r in enumerate(raw):
        candidate = _newton_polish(poly, r)
        others = [abs(r - o) for j, o in enumerate(raw) if j != k]
        # a polish may not move more than half way to another seed
        if others and abs(candidate - r) > 0.5 * min(others) and min(others) > 0:
            candidate = r
        polished.append(_snap_real(poly, candidate))
    return polished


def _quality(poly, roots):
    """Worst of the per-root backward errors and the Vieta sum/product residuals."""
    worst = max(backward_error(poly, r) for r in roots)
    return max(worst, *vieta_residuals(poly, roots))


def solve_quartic(p: QuarticPoly):
    """All four complex roots of p, polished and sorted by (real, imaginary) part.

    Coefficients are scaled by their largest magnitude first and the variable
    by sigma = |c0/c4|^(1/4), so the closed form sees balanced coefficients.
    When the coefficients span many decades the closed form loses roots to
    cancellation; the companion-matrix eigenvalues are then polished too and
    the set with the smaller worst backward error (or Vieta residual, which
    catches two seeds polished onto the same root) is kept. Roots whose
    imaginary part is negligible are returned with an exact zero imaginary part.

    Raises:
        SolverError: if a returned root violates the residual bound.
    """
    scaled, sigma, balanced = _balance(p)
    roots = _polish_all(scaled, [sigma * y for y in _ferrari(balanced)])
    worst = _quality(scaled, roots)

    if worst > BACKWARD_ERROR_TOL or any(abs(p(r)) > p.residual_bound(r) for r in roots):
        companion = _polish_all(scaled, [sigma * complex(y) for y in np.roots(balanced)])
        companion_worst = _quality(scaled, companion)
        logger.debug(
            f"closed form error {worst:.3g}, companion {companion_worst:.3g} "
            f"for {p.coefficients}"
        )
        if companion_worst < worst:
            roots = companion

    bad = [r for r in roots if not abs(p(r)) <= p.residual_bound(r)]
    if bad:
        raise SolverError(f"quartic {p.coefficients}: roots {bad} fail the residual bound")
    return tuple(sorted(roots, key=lambda z: (z.real, z.imag)))


def vieta_residuals(p: QuarticPoly, roots):
    """Relative errors of the root sum and product against -c3/c4 and c0/c4."""
    c4, c3, _, _, c0 = p.coefficients
    total, product = sum(roots), np.prod(roots)
    expected_sum, expected_product = -c3 / c4, c0 / c4
    return (
        abs(total - expected_sum) / max(1.0, abs(expected_sum)),
        abs(product - expected_product) / max(1.0, abs(expected_product)),
    )


def is_real(root):
    return abs(root.imag) <= REAL_TOL * (1 + abs(root.real))


def is_positive_real(root):
    return is_real(root) and root.real > 0


def is_negative_real(root):
    return is_real(root) and root.real < 0


# --- stability ------------------------------------------------------------------

@dataclass(frozen=True)
class Stability:
    x: float
    f_prime: float
    abs_f_prime: float
    kind: str


def stability_class(abs_derivative):
    if abs_derivative <= STABILITY_BAND:
        return SUPERSTABLE
    if abs(abs_derivative - 1.0) <= STABILITY_BAND:
        return NEUTRAL
    return STABLE if abs_derivative < 1.0 else UNSTABLE


def classify(x: float, w: BoltzmannWeights) -> Stability:
    """Stability class of a verified positive fixed point by |f'(x)|.

    Raises:
        ParameterDomainError: if x is not positive or |f(x) - x| is too large.
    """
    if not x > 0:
        raise ParameterDomainError(f"classify needs a positive fixed point, got {x}")
    gap = abs(f(x, w) - x)
    if gap > FIXED_POINT_TOL * max(1.0, x):
        raise ParameterDomainError(f"x = {x} is not a fixed point of f (|f(x) - x| = {gap:.3g})")
    slope = float(f_prime(x, w))
    return Stability(x=x, f_prime=slope, abs_f_prime=abs(slope), kind=stability_class(abs(slope)))


# --- Descartes' rule of signs -----------------------------------------------------

def sign_changes(coefficients):
    signs = [1 if c > 0 else -1 for c in coefficients if c != 0]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


@dataclass(frozen=True)
class DescartesBound:
    max_positive: int
    max_negative: int

    @property
    def positive_candidates(self):
        return list(range(self.max_positive, -1, -2))

    @property
    def negative_candidates(self):
        return list(range(self.max_negative, -1, -2))

    def admits(self, n_positive, n_negative):
        return n_positive in self.positive_candidates and n_negative in self.negative_candidates

    def to_dict(self):
        return {
            "max_positive": self.max_positive,
            "max_negative": self.max_negative,
            "positive_candidates": self.positive_candidates,
            "negative_candidates": self.negative_candidates,
        }


def descartes(p: QuarticPoly) -> DescartesBound:
    """Sign-change bounds for positive roots (p(x)) and negative roots (p(-x))."""
    coeffs = p.coefficients
    degree = len(coeffs) - 1
    mirrored = [c * (-1) ** (degree - k) for k, c in enumerate(coeffs)]
    return DescartesBound(max_positive=sign_changes(coeffs), max_negative=sign_changes(mirrored))


# --- critical temperatures ----------------------------------------------------------

@dataclass(frozen=True)
class CriticalTemps:
    T_star: float
    T_double_star: float

    def interval_contains(self, T):
        return self.T_star < T < self.T_double_star

    def to_dict(self):
        return {"T_star": self.T_star, "T_double_star": self.T_double_star}


def critical_temps(params: CouplingParams) -> CriticalTemps:
    """T* = (-J + 2(Jp + Jsl)) / ln sqrt3 and T** = (J + 2(Jp + Jsl)) / ln sqrt3."""
    shared = 2 * (params.Jp + params.Jsl)
    return CriticalTemps(
        T_star=(-params.J + shared) / LN_SQRT3,
        T_double_star=(params.J + shared) / LN_SQRT3,
    )


# --- sign-change cross-check ----------------------------------------------------------

def scan_sign_changes(w: BoltzmannWeights, lo=1e-6, hi=1e6, points=10_000):
    """Count sign changes of f(x) - x on a log grid; each marks a positive fixed point.

    Fixed points outside [lo, hi] are not seen by the grid; they are logged at
    debug level so a count below the algebraic one can be told apart from a
    solver problem.
    """
    outside = [
        r.real for r in solve_quartic(quartic_from_f(w))
        if is_positive_real(r) and not lo <= r.real <= hi
    ]
    if outside:
        logger.debug(f"positive fixed point(s) {outside} lie outside the scan window [{lo:g}, {hi:g}]")
    grid = np.logspace(math.log10(lo), math.log10(hi), points)
    gap = f(grid, w) - grid
    signs = np.sign(gap)
    signs = signs[signs != 0]
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


# --- report ------------------------------------------------------------------------

@dataclass(frozen=True)
class RootInfo:
    value: complex
    residual: float

    def to_dict(self):
        return {"re": self.value.real, "im": self.value.imag, "residual": self.residual}


@dataclass(frozen=True)
class FixedPointReport:
    params: CouplingParams
    quartic: QuarticPoly
    roots: tuple
    positive: tuple
    descartes: DescartesBound
    critical: CriticalTemps
    negative: tuple = field(default=())

    @property
    def positive_real_roots(self):
        return [s.x for s in self.positive]

    @property
    def classes(self):
        return [s.kind for s in self.positive]

    def to_dict(self):
        return {
            "params": self.params.to_dict(),
            "quartic": self.quartic.to_list(),
            "roots": [r.to_dict() for r in self.roots],
            "positive": [
                {"x": s.x, "f_prime": s.f_prime, "abs_f_prime": s.abs_f_prime, "class": s.kind}
                for s in self.positive
            ],
            "T_star": self.critical.T_star,
            "T_double_star": self.critical.T_double_star,
            "descartes": {
                **self.descartes.to_dict(),
                "actual_positive": len(self.positive),
                "actual_negative": len(self.negative),
            },
        }


def fixed_point_report(params: CouplingParams) -> FixedPointReport:
    """Roots, residuals, positive fixed points with stability, Descartes bounds, T*, T**."""
    w = weights(params)
    quartic = quartic_from_f(w)
    roots = solve_quartic(quartic)
    infos = tuple(RootInfo(value=r, residual=float(abs(quartic(r)))) for r in roots)

    positive = []
    for r in roots:
        if not is_positive_real(r):
            continue
        x = r.real
        gap = abs(f(x, w) - x)
        if not gap <= FIXED_POINT_TOL * max(1.0, x):
            raise SolverError(
                f"{params}: quartic root {x} is not a fixed point of f (|f(x) - x| = {gap:.3g})"
            )
        positive.append(classify(x, w))
    negative = tuple(r.real for r in roots if is_negative_real(r))

    report = FixedPointReport(
        params=params,
        quartic=quartic,
        roots=infos,
        positive=tuple(positive),
        descartes=descartes(quartic),
        critical=critical_temps(params),
        negative=negative,
    )
    logger.debug(f"{params}: {len(positive)} positive fixed point(s) {report.positive_real_roots}")
    return report
