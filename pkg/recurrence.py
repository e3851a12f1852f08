"""Boundary-field recursion on the chandelier lattice.

Three layers of the same recursion live here:

* ``h_update`` maps the eight class fields of the semi-balls one level down to
  the fields one level up, computed straight from the master compatibility
  sum in log-space. The free normalization L2 is set to 1.
* ``apply_F`` is the same map in the four cube-root coordinates
  (v1, v4, v5, v8); ``ratio_maps`` and ``f`` are its L2-free reductions.
* ``f`` / ``f_prime`` are the scalar map on the diagonal and its derivative.

L2 acts on the v-coordinates as the gauge (v1, v4, v5, v8) -> (l v1, v4/l,
v5/l, l v8). Quantities built from v1 v4, v5 v8 and v5 / v4 are unaffected.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from errors import ParameterDomainError
from exact import PRODUCT_SIGNS, BoundaryField
from model import BoltzmannWeights

_CHILD_PATTERNS = np.array(list(itertools.product((1.0, -1.0), repeat=3)))


@dataclass(frozen=True)
class FieldState4:
    """A point (v1, v4, v5, v8) of the positive orthant R^4_+."""

    v1: float
    v4: float
    v5: float
    v8: float

    def __post_init__(self):
        for name in ("v1", "v4", "v5", "v8"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0:
                raise ParameterDomainError(f"{name} must be positive and finite, got {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def diagonal(cls, x):
        """The point of the diagonal set where all four components equal sqrt(x)."""
        if x <= 0:
            raise ParameterDomainError(f"diagonal point needs x > 0, got {x}")
        root = math.sqrt(x)
        return cls(root, root, root, root)

    def as_tuple(self):
        return (self.v1, self.v4, self.v5, self.v8)

    @property
    def s(self):
        return self.v1 * self.v4

    @property
    def t(self):
        return self.v5 * self.v8

    @property
    def rho(self):
        return self.v5 / self.v4

    def gauge_invariants(self):
        """(v1 v4, v5 v8, v5 / v4): coordinates that do not depend on L2."""
        return (self.s, self.t, self.rho)

    def in_upsilon(self, tol=1e-12):
        """Membership in the F-invariant set {v1 = v8, v4 = v5}."""
        return _close(self.v1, self.v8, tol) and _close(self.v4, self.v5, tol)

    def in_literal_upsilon(self, tol=1e-12):
        """Membership in {v1 = v5, v4 = v8}, which F does not preserve."""
        return _close(self.v1, self.v5, tol) and _close(self.v4, self.v8, tol)

    def on_diagonal(self, tol=1e-12):
        values = self.as_tuple()
        return all(_close(values[0], v, tol) for v in values[1:])


@dataclass(frozen=True)
class ReducedPoint:
    x: float

    def __post_init__(self):
        if not float(self.x) > 0:
            raise ParameterDomainError(f"reduced point needs x > 0, got {self.x}")


def _close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


# --- h-recursion ----------------------------------------------------------------

def _log_child_sum(center_spin, child_spin, h, w):
    """log of the sum over the three grandchildren under one child.

    Each term carries J between the child and its children, Jsl on their
    sibling triangle, Jp between the center and the grandchildren, and the
    child's own semi-ball field.
    """
    a, b, c = _CHILD_PATTERNS[:, 0], _CHILD_PATTERNS[:, 1], _CHILD_PATTERNS[:, 2]
    total = a + b + c
    pairs = a * b + b * c + a * c
    n_minus = np.sum(_CHILD_PATTERNS < 0, axis=1)
    cls = (0 if child_spin > 0 else 4) + n_minus
    exponents = (
        w.log_a * child_spin * total
        + w.log_c * pairs
        + w.log_b * center_spin * total
        + child_spin * a * b * c * h[cls]
    )
    return float(logsumexp(exponents))


def log_child_sums(h: BoundaryField, w: BoltzmannWeights):
    """Return {(center_spin, child_spin): log G} for the four spin pairs."""
    harr = h.as_array()
    return {(i, s): _log_child_sum(i, s, harr, w) for i in (1, -1) for s in (1, -1)}


def h_update(h: BoundaryField, w: BoltzmannWeights) -> BoundaryField:
    """One step of the boundary-field recursion, with L2 = 1.

    For a class with center spin i and m minus children the master sum
    factorizes over the children, so
    sign_k * h'_k = (3 - m) log G(i, +) + m log G(i, -)
    where sign_k is the sign of the class's four-spin product.
    """
    logs = log_child_sums(h, w)
    updated = []
    for k in range(8):
        center = 1 if k < 4 else -1
        m = k % 4
        log_sum = (3 - m) * logs[(center, 1)] + m * logs[(center, -1)]
        updated.append(PRODUCT_SIGNS[k] * log_sum)
    return BoundaryField(tuple(updated))


# --- v-coordinates ----------------------------------------------------------------

def to_v(h: BoundaryField) -> FieldState4:
    """v_i = exp(h_i / 3) for i in {1, 4, 5, 8}."""
    h1, _, _, h4, h5, _, _, h8 = h.h
    return FieldState4(math.exp(h1 / 3), math.exp(h4 / 3), math.exp(h5 / 3), math.exp(h8 / 3))


def full_v(v: FieldState4):
    """All eight cube-root coordinates (v1, ..., v8).

    v2 = (v1^2/v4)^(1/3), v3 = (v1/v4^2)^(1/3), v6 = (v8/v5^2)^(1/3),
    v7 = (v8^2/v5)^(1/3); v2 and v7 are the cube roots of exp(-h2), exp(-h7).
    """
    v1, v4, v5, v8 = v.as_tuple()
    return (
        v1,
        (v1 ** 2 / v4) ** (1 / 3),
        (v1 / v4 ** 2) ** (1 / 3),
        v4,
        v5,
        (v8 / v5 ** 2) ** (1 / 3),
        (v8 ** 2 / v5) ** (1 / 3),
        v8,
    )


def from_v(v: FieldState4) -> BoundaryField:
    """Reconstruct all eight class fields; the result satisfies the h-identities."""
    l1, l4, l5, l8 = (math.log(x) for x in v.as_tuple())
    return BoundaryField((
        3 * l1,
        -(2 * l1 - l4),
        l1 - 2 * l4,
        3 * l4,
        3 * l5,
        l8 - 2 * l5,
        -(2 * l8 - l5),
        3 * l8,
    ))


# --- operator F --------------------------------------------------------------------

def _numerator_coeffs(w):
    """Coefficients (x^0..x^3) of c^4 + 3(ab)^2 x + 3(ab)^4 x^2 + (ab)^6 c^4 x^3."""
    ab2 = (w.a * w.b) ** 2
    c4 = w.c ** 4
    return (c4, 3 * ab2, 3 * ab2 ** 2, ab2 ** 3 * c4)


def _denominator_coeffs(w):
    """Coefficients (x^0..x^3) of b^6 c^4 + 3a^2 b^4 x + 3a^4 b^2 x^2 + a^6 c^4 x^3."""
    a2, b2 = w.a ** 2, w.b ** 2
    c4 = w.c ** 4
    return (b2 ** 3 * c4, 3 * a2 * b2 ** 2, 3 * a2 ** 2 * b2, a2 ** 3 * c4)


def _cubic(coeffs, x):
    c0, c1, c2, c3 = coeffs
    return ((c3 * x + c2) * x + c1) * x + c0


def _cubic_prime(coeffs, x):
    _, c1, c2, c3 = coeffs
    return (3 * c3 * x + 2 * c2) * x + c1


def numerator(x, w):
    return _cubic(_numerator_coeffs(w), x)


def denominator(x, w):
    return _cubic(_denominator_coeffs(w), x)


def normalize_gauge(v: FieldState4) -> FieldState4:
    """Choose L2 so that v1 v8 = v4 v5; gauge-invariant coordinates are kept."""
    v1, v4, v5, v8 = v.as_tuple()
    lam = (v4 * v5 / (v1 * v8)) ** 0.25
    return FieldState4(v1 * lam, v4 / lam, v5 / lam, v8 * lam)


def apply_F(v: FieldState4, w: BoltzmannWeights, normalize: bool = True) -> FieldState4:
    """The recursion in (v1, v4, v5, v8) coordinates.

    v1' = N(s) / (K v4^3),  1/v4' = M(t) / (K v5^3),
    1/v5' = M(s) / (K v4^3), v8' = N(t) / (K v5^3),
    with s = v1 v4, t = v5 v8, K = (ab)^3 c and the cubics N, M of the scalar map.

    Args:
        v: current state.
        w: Boltzmann weights.
        normalize: fix L2 with the balanced gauge v1' v8' = v4' v5' (maps the
            diagonal onto itself); False leaves L2 = 1.
    """
    s, t = v.s, v.t
    K = (w.a * w.b) ** 3 * w.c
    v4_cubed, v5_cubed = v.v4 ** 3, v.v5 ** 3
    image = FieldState4(
        numerator(s, w) / (K * v4_cubed),
        K * v5_cubed / denominator(t, w),
        K * v4_cubed / denominator(s, w),
        numerator(t, w) / (K * v5_cubed),
    )
    return normalize_gauge(image) if normalize else image


def iterate_F(v: FieldState4, w: BoltzmannWeights, steps: int, normalize: bool = True):
    """Orbit v, F(v), ..., F^steps(v) as a list of FieldState4."""
    orbit = [v]
    for _ in range(steps):
        orbit.append(apply_F(orbit[-1], w, normalize=normalize))
    return orbit


def ratio_maps(s: float, t: float, w: BoltzmannWeights):
    """(v1' v5', v4' v8') = (N(s)/M(s), N(t)/M(t)) for s = v1 v4, t = v5 v8."""
    if not (s > 0 and t > 0):
        raise ParameterDomainError(f"ratio maps need s, t > 0, got s={s}, t={t}")
    return numerator(s, w) / denominator(s, w), numerator(t, w) / denominator(t, w)


# --- scalar map --------------------------------------------------------------------

def f(x, w: BoltzmannWeights):
    """x' = N(x) / M(x); accepts scalars or numpy arrays with x >= 0."""
    return numerator(x, w) / denominator(x, w)


def f_prime(x, w: BoltzmannWeights):
    """Derivative of f by the quotient rule: (N' M - N M') / M^2."""
    num_c, den_c = _numerator_coeffs(w), _denominator_coeffs(w)
    n, d = _cubic(num_c, x), _cubic(den_c, x)
    return (_cubic_prime(num_c, x) * d - n * _cubic_prime(den_c, x)) / (d * d)


def f_prime_factored(x, w: BoltzmannWeights):
    """Closed factored form 3a^2(b^4-1) A(x) / ((b^2 + a^2 x) Q(x))^2, where M = (b^2 + a^2 x) Q."""
    a, b, c = w.a, w.b, w.c
    a2, b2, b4, c4, c8 = a * a, b * b, b ** 4, c ** 4, c ** 8
    A = (
        b4 * c4
        + 2 * a2 * b2 * c4 * (1 + b4) * x
        + a2 ** 2 * (3 * b4 + c8 + b4 * c8 + b4 ** 2 * c8) * x ** 2
        + 2 * a2 ** 3 * b2 * c4 * (1 + b4) * x ** 3
        + a2 ** 4 * b4 * c4 * x ** 4
    )
    Q = b4 * c4 + 3 * a2 * b2 * x - a2 * b2 * c4 * x + a2 ** 2 * c4 * x ** 2
    return 3 * a2 * (b4 - 1) * A / ((b2 + a2 * x) ** 2 * Q ** 2)
