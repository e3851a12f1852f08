"""Brute-force finite-volume oracle for the memory-2 Gibbs distributions.

Configurations on V_n are enumerated exhaustively as rows of a spin matrix:
row ``k`` holds the configuration whose bit ``i`` (vertex ``i`` in
``lattice.vertices`` order) is 1 when the spin is -1. Because vertices are
stored level by level, the configurations of the inner ball V_m are the low
``|V_m|`` bits, and marginalizing the outer shell is a reshape and a sum.
"""

from __future__ import annotations

import itertools
import logging
import math
import numbers
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from errors import CapacityError, ParameterDomainError
from lattice import TclLattice, build
from model import CouplingParams

logger = logging.getLogger(__name__)

EXHAUSTIVE_MAX_DEPTH = 2
NORMALIZATION_TOL = 1e-12
KOLMOGOROV_TOL = 1e-12

# Sign of the four-spin product sigma(x)sigma(y)sigma(z)sigma(w) for each class.
PRODUCT_SIGNS = (1, -1, 1, -1, -1, 1, -1, 1)


def boundary_class(root_spin, child_spins):
    """Index 0..7 of the semi-ball class (h_1..h_8) for a spin pattern.

    Classes 0-3 have a plus center, 4-7 a minus center; within each block the
    offset is the number of minus spins among the three children.
    """
    n_minus = sum(1 for s in child_spins if s < 0)
    return (0 if root_spin > 0 else 4) + n_minus


@dataclass(frozen=True)
class BoundaryField:
    """The eight class fields (h_1, ..., h_8) of a unit semi-ball."""

    h: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.h)
        if len(values) != 8:
            raise ParameterDomainError(f"BoundaryField needs 8 components, got {len(values)}")
        if not all(math.isfinite(v) for v in values):
            raise ParameterDomainError(f"BoundaryField components must be finite: {values}")
        object.__setattr__(self, "h", values)

    @classmethod
    def zero(cls):
        return cls((0.0,) * 8)

    @classmethod
    def from_parameters(cls, p, q, r, s):
        """The parametrized family (p, (q-2p)/3, (p-2q)/3, q, r, (s-2r)/3, (r-2s)/3, s).

        Every member satisfies the h-identities, so it is a possible image of
        the boundary-field recursion.
        """
        return cls((p, (q - 2 * p) / 3, (p - 2 * q) / 3, q, r, (s - 2 * r) / 3, (r - 2 * s) / 3, s))

    def value(self, root_spin, child_spins):
        return self.h[boundary_class(root_spin, child_spins)]

    def as_array(self):
        return np.array(self.h, dtype=np.float64)

    def to_list(self):
        return list(self.h)


def identity_residuals(field):
    """Residuals of the four h-identities, in log space.

    -3h2 = 2h1 - h4,  3h3 = h1 - 2h4,  3h6 = -2h5 + h8,  -3h7 = -h5 + 2h8.
    """
    h1, h2, h3, h4, h5, h6, h7, h8 = field.h
    return (
        -3 * h2 - (2 * h1 - h4),
        3 * h3 - (h1 - 2 * h4),
        3 * h6 - (-2 * h5 + h8),
        -3 * h7 - (-h5 + 2 * h8),
    )


# --- Configurations -----------------------------------------------------------

def spin_matrix(n_vertices):
    """All 2^n spin assignments as a float matrix; row k encodes bits of k."""
    idx = np.arange(2 ** n_vertices, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n_vertices, dtype=np.int64)) & 1
    return (1 - 2 * bits).astype(np.float64)


def config_index(lattice, config):
    """Row index of a SpinConfig mapping in the oracle's enumeration."""
    _check_total(lattice, config)
    index = 0
    for pos, vertex in enumerate(lattice.vertices):
        if config[vertex] < 0:
            index |= 1 << pos
    return index


def config_from_index(lattice, index):
    return {v: (-1 if (index >> pos) & 1 else 1) for pos, v in enumerate(lattice.vertices)}


def _check_total(lattice, config):
    missing = [v for v in lattice.vertices if v not in config]
    if missing:
        raise ParameterDomainError(f"Configuration misses {len(missing)} vertices, e.g. {missing[0]}")
    bad = [v for v in lattice.vertices if config[v] not in (-1, 1)]
    if bad:
        raise ParameterDomainError(f"Spins must be -1 or +1; vertex {bad[0]} has {config[bad[0]]!r}")


def _pair_sums(lattice, spins):
    """Per-configuration sums of sigma(x)sigma(y) over NN, PNNN and SLNN pairs."""
    pos = lattice.index_of()
    sums = []
    for edges in (lattice.nn_edges, lattice.pnnn_pairs, lattice.slnn_edges):
        if not edges:
            sums.append(np.zeros(spins.shape[0]))
            continue
        u = np.array([pos[x] for x, _ in edges])
        v = np.array([pos[y] for _, y in edges])
        sums.append(np.sum(spins[:, u] * spins[:, v], axis=1))
    return sums


def energy(lattice: TclLattice, config, params: CouplingParams) -> float:
    """H(sigma) = -J sum_NN - Jp sum_PNNN - Jsl sum_SLNN over the built lattice."""
    _check_total(lattice, config)
    spins = np.array([[float(config[v]) for v in lattice.vertices]])
    nn, pnnn, slnn = _pair_sums(lattice, spins)
    return float(-params.J * nn[0] - params.Jp * pnnn[0] - params.Jsl * slnn[0])


def _boundary_terms(lattice, spins, field):
    """sum over x in W_(n-1) of sigma(x)sigma(y)sigma(z)sigma(w) h_class, per configuration."""
    total = np.zeros(spins.shape[0])
    if lattice.depth == 0:
        return total
    pos = lattice.index_of()
    h = field.as_array()
    for ball in lattice.semi_balls(lattice.depth - 1):
        center = spins[:, pos[ball.center]]
        children = spins[:, [pos[c] for c in ball.children]]
        product = center * np.prod(children, axis=1)
        n_minus = np.sum(children < 0, axis=1)
        cls = np.where(center > 0, 0, 4) + n_minus
        total += product * h[cls]
    return total


# --- Finite Gibbs distributions -------------------------------------------------

@dataclass(frozen=True)
class FiniteGibbs:
    depth: int
    params: CouplingParams
    field: BoundaryField
    log_partition: float
    probabilities: np.ndarray
    lattice: TclLattice

    @property
    def Z(self):
        try:
            return math.exp(self.log_partition)
        except OverflowError:
            return math.inf

    def probability(self, config):
        return float(self.probabilities[config_index(self.lattice, config)])

    def marginal(self, m):
        """Distribution of the spins on the inner ball V_m (low bits of the index)."""
        inner = len(self.lattice.ball(m))
        outer = len(self.lattice.vertices) - inner
        return self.probabilities.reshape(2 ** outer, 2 ** inner).sum(axis=0)

    def root_magnetization(self):
        spins = 1 - 2 * (np.arange(self.probabilities.size) & 1)
        return float(np.dot(spins, self.probabilities))


def gibbs(lattice: TclLattice, params: CouplingParams, field: BoundaryField) -> FiniteGibbs:
    """Exhaustive memory-2 Gibbs distribution on V_n.

    P(sigma) is proportional to exp[-beta H_n(sigma) + sum_{x in W_(n-1)}
    sigma(x)sigma(y)sigma(z)sigma(w) h_class], normalized with a max shift.

    Raises:
        CapacityError: if the lattice is deeper than EXHAUSTIVE_MAX_DEPTH.
    """
    if lattice.depth > EXHAUSTIVE_MAX_DEPTH:
        raise CapacityError(
            f"exhaustive enumeration supports depth <= {EXHAUSTIVE_MAX_DEPTH}, "
            f"got {lattice.depth} ({2 ** len(lattice.vertices)} configurations)"
        )
    spins = spin_matrix(len(lattice.vertices))
    nn, pnnn, slnn = _pair_sums(lattice, spins)
    beta = params.beta
    log_weights = beta * (params.J * nn + params.Jp * pnnn + params.Jsl * slnn)
    log_weights = log_weights + _boundary_terms(lattice, spins, field)

    log_z = float(logsumexp(log_weights))
    shifted = np.exp(log_weights - log_weights.max())
    probabilities = shifted / shifted.sum()
    logger.debug(f"depth {lattice.depth}: {probabilities.size} configurations, log Z = {log_z:.6g}")

    return FiniteGibbs(
        depth=lattice.depth,
        params=params,
        field=field,
        log_partition=log_z,
        probabilities=probabilities,
        lattice=lattice,
    )


@dataclass(frozen=True)
class CompatibilityResult:
    max_residual: float
    per_sigma: list

    def to_dict(self):
        return {"max_residual": self.max_residual, "per_sigma": self.per_sigma}


def check_compatibility(lattice, params, field_inner, field_outer):
    """Compare the V_1 marginal of mu_2 (field_outer) with mu_1 (field_inner).

    Returns:
        CompatibilityResult with the max absolute residual and one entry per
        configuration of V_1 (spins listed in vertex order).

    Raises:
        ParameterDomainError: if the lattice depth is not 2.
    """
    if lattice.depth != 2:
        raise ParameterDomainError(f"compatibility check needs a depth-2 lattice, got depth {lattice.depth}")
    outer = gibbs(lattice, params, field_outer)
    inner_lattice = build(1)
    inner = gibbs(inner_lattice, params, field_inner)

    marginal = outer.marginal(1)
    residuals = np.abs(marginal - inner.probabilities)
    per_sigma = []
    for index in range(inner.probabilities.size):
        config = config_from_index(inner_lattice, index)
        per_sigma.append({
            "sigma": [config[v] for v in inner_lattice.vertices],
            "mu_inner": float(inner.probabilities[index]),
            "marginal": float(marginal[index]),
            "residual": float(residuals[index]),
        })
    return CompatibilityResult(max_residual=float(residuals.max()), per_sigma=per_sigma)


# --- Kolmogorov consistency fixtures ---------------------------------------------

def stationary_vector(matrix):
    """Left eigenvector of a stochastic matrix for eigenvalue 1, normalized to sum 1."""
    P = np.asarray(matrix, dtype=np.float64)
    eigvals, eigvecs = np.linalg.eig(P.T)
    k = int(np.argmin(np.abs(eigvals - 1.0)))
    pi = np.real(eigvecs[:, k])
    return pi / pi.sum()


def _validate_probability_vector(p):
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size < 2:
        raise ParameterDomainError(f"probability vector must be 1-d with >= 2 states, got shape {p.shape}")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ParameterDomainError(f"probability vector has invalid entries: {p}")
    if abs(p.sum() - 1.0) > KOLMOGOROV_TOL:
        raise ParameterDomainError(f"probability vector sums to {p.sum()}, not 1")
    return p


def _validate_stochastic(matrix):
    P = np.asarray(matrix, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 2:
        raise ParameterDomainError(f"stochastic matrix must be square, got shape {P.shape}")
    if np.any(P < 0) or np.any(P > 1) or not np.all(np.isfinite(P)):
        raise ParameterDomainError("stochastic matrix entries must lie in [0, 1]")
    if np.any(np.abs(P.sum(axis=1) - 1.0) > KOLMOGOROV_TOL):
        raise ParameterDomainError(f"stochastic matrix rows sum to {P.sum(axis=1)}, not 1")
    return P


def cylinder_measure(kind, law, initial=None):
    """Return a function block -> measure of the cylinder set over state indices."""
    if kind == "bernoulli":
        p = _validate_probability_vector(law)

        def measure(block):
            return float(np.prod([p[i] for i in block]))

        return measure, p.size

    if kind == "markov":
        P = _validate_stochastic(law)
        pi = stationary_vector(P) if initial is None else _validate_probability_vector(initial)
        if pi.size != P.shape[0]:
            raise ParameterDomainError("initial vector and transition matrix sizes differ")

        def measure(block):
            value = pi[block[0]]
            for i, j in zip(block, block[1:]):
                value *= P[i, j]
            return float(value)

        return measure, P.shape[0]

    raise ParameterDomainError(f"unknown fixture kind {kind!r}; expected 'bernoulli' or 'markov'")


def check_kolmogorov_fixture(kind, law, n, initial=None):
    """Check the four consistency properties for all cylinders up to length n.

    (1) one-symbol cylinders sum to 1; (2) every cylinder has non-negative
    measure; (3) extending a block on the right and summing reproduces it;
    (4) so does extending on the left.

    Args:
        kind: "bernoulli" (law is a probability vector) or "markov" (law is a
            stochastic matrix; initial defaults to its stationary vector).
        law: probability vector or stochastic matrix over the state set.
        n: maximum cylinder length (>= 1).
        initial: optional initial distribution for the Markov fixture.
    """
    if not isinstance(n, numbers.Integral) or isinstance(n, bool) or n < 1:
        raise ParameterDomainError(f"cylinder length must be a positive integer, got {n!r}")
    measure, k = cylinder_measure(kind, law, initial)
    states = range(k)

    if abs(sum(measure((i,)) for i in states) - 1.0) > KOLMOGOROV_TOL:
        return False
    for length in range(1, n + 1):
        for block in itertools.product(states, repeat=length):
            value = measure(block)
            if value < 0:
                return False
            if length == n:
                continue
            right = sum(measure(block + (s,)) for s in states)
            left = sum(measure((s,) + block) for s in states)
            if abs(right - value) > KOLMOGOROV_TOL or abs(left - value) > KOLMOGOROV_TOL:
                logger.debug(f"{kind} fixture inconsistent at block {block}: {value} vs {right}, {left}")
                return False
    return True
