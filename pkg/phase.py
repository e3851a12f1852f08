"""Parameter sweeps, phase-transition labelling and orbits of the scalar map."""

from __future__ import annotations

import csv
import itertools
import logging
import math
import numbers
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from tqdm import tqdm

from errors import CapacityError, ParameterDomainError, UsageError
from model import CouplingParams, weights
from recurrence import f
from roots import critical_temps, fixed_point_report

logger = logging.getLogger(__name__)

CONVERGENCE_TOL = 1e-12
MERGE_TOL = 1e-6
MAX_CYCLE_PERIOD = 8
MAX_SCAN_POINTS = 1_000_000
DEFAULT_ORBIT_STEPS = 10_000

SCAN_CSV_HEADER = (
    "J", "Jp", "Jsl", "T", "n_positive", "transition", "classes",
    "T_star", "T_double_star", "formula_agrees",
)

CONVERGED = "converged"
CYCLING = "cycling"
CAP_REACHED = "cap_reached"


# --- grid -------------------------------------------------------------------------

def parse_range(text):
    """Parse ``a:b:n`` into n evenly spaced values from a to b, or ``a`` into [a].

    Raises:
        UsageError: malformed text.
        ParameterDomainError: n < 1, or n == 1 with a != b.
    """
    if isinstance(text, (int, float)):
        return [float(text)]
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) != 3:
            raise ValueError
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected 'a:b:n' or a single number")
    if n < 1:
        raise ParameterDomainError(f"range {text!r} needs at least one point")
    if n == 1:
        if lo != hi:
            raise ParameterDomainError(f"range {text!r} has one point but two different ends")
        return [lo]
    return [float(v) for v in np.linspace(lo, hi, n)]


def build_grid(J, Jp, Jsl, T):
    """Row-major product over (J, Jp, Jsl, T); each argument is a list or range text.

    Raises:
        CapacityError: more than MAX_SCAN_POINTS points.
        ParameterDomainError: a grid point is invalid (e.g. T <= 0).
    """
    axes = [v if isinstance(v, (list, tuple)) else parse_range(v) for v in (J, Jp, Jsl, T)]
    size = math.prod(len(axis) for axis in axes)
    if size > MAX_SCAN_POINTS:
        raise CapacityError(f"grid of {size} points exceeds the cap of {MAX_SCAN_POINTS}")
    return [CouplingParams(*point) for point in itertools.product(*axes)]


# --- scan -------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseCell:
    params: CouplingParams
    n_positive_roots: int
    classes: tuple
    roots: tuple
    transition: bool
    T_star: float
    T_double_star: float
    formula_agrees: bool

    def to_dict(self):
        return {
            **self.params.to_dict(),
            "n_positive": self.n_positive_roots,
            "transition": self.transition,
            "classes": list(self.classes),
            "roots": list(self.roots),
            "T_star": self.T_star,
            "T_double_star": self.T_double_star,
            "formula_agrees": self.formula_agrees,
        }

    def csv_row(self, fmt):
        p = self.params
        return [
            fmt(p.J), fmt(p.Jp), fmt(p.Jsl), fmt(p.T),
            str(self.n_positive_roots),
            "true" if self.transition else "false",
            "|".join(self.classes),
            fmt(self.T_star), fmt(self.T_double_star),
            "true" if self.formula_agrees else "false",
        ]


def merge_roots(stabilities):
    """Collapse positive roots closer than MERGE_TOL * (1 + |x|); input sorted by x."""
    merged = []
    for s in stabilities:
        if merged and abs(s.x - merged[-1].x) <= MERGE_TOL * (1 + abs(s.x)):
            continue
        merged.append(s)
    return merged


def predicted_root_count(params):
    """Closed-form prediction: three fixed points strictly between T* and T**, otherwise one."""
    return 3 if critical_temps(params).interval_contains(params.T) else 1


def analyze_point(params: CouplingParams) -> PhaseCell:
    """One grid point; built from the same report as a standalone fixed-point analysis."""
    report = fixed_point_report(params)
    distinct = merge_roots(sorted(report.positive, key=lambda s: s.x))
    n_positive = len(distinct)
    return PhaseCell(
        params=params,
        n_positive_roots=n_positive,
        classes=tuple(s.kind for s in distinct),
        roots=tuple(s.x for s in distinct),
        transition=n_positive >= 2,
        T_star=report.critical.T_star,
        T_double_star=report.critical.T_double_star,
        formula_agrees=predicted_root_count(params) == n_positive,
    )


def scan(grid, workers=1, progress=False):
    """Analyze every grid point; output order equals grid order.

    Args:
        grid: sequence of CouplingParams (see build_grid).
        workers: process count; 1 runs in-process.
        progress: show a tqdm progress bar on stderr.

    Raises:
        ParameterDomainError: empty grid.
    """
    grid = list(grid)
    if not grid:
        raise ParameterDomainError("phase scan needs at least one grid point")
    logger.info(f"Scanning {len(grid)} point(s) with {workers} worker(s)")

    if workers <= 1:
        cells = [analyze_point(p) for p in tqdm(grid, desc="Scanning", disable=not progress)]
    else:
        chunksize = max(1, len(grid) // (workers * 16))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(tqdm(
                pool.map(analyze_point, grid, chunksize=chunksize),
                total=len(grid), desc="Scanning", disable=not progress,
            ))

    transitions = sum(1 for c in cells if c.transition)
    disagreements = sum(1 for c in cells if not c.formula_agrees)
    logger.info(f"Scan done: {transitions} transition cell(s), {disagreements} formula disagreement(s)")
    return cells


def write_scan_csv(cells, stream, fmt):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SCAN_CSV_HEADER)
    for cell in cells:
        writer.writerow(cell.csv_row(fmt))


# --- orbit ------------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitResult:
    trajectory: tuple
    diagnosis: str
    limit: float = None
    period: int = None

    @property
    def steps(self):
        return len(self.trajectory) - 1

    def to_dict(self):
        return {
            "trajectory": list(self.trajectory),
            "diagnosis": self.diagnosis,
            "limit": self.limit,
            "period": self.period,
            "steps": self.steps,
        }


def _detect_cycle(trajectory):
    x = trajectory[-1]
    for period in range(2, MAX_CYCLE_PERIOD + 1):
        if len(trajectory) <= 2 * period:
            break
        back = trajectory[-1 - period]
        back2 = trajectory[-1 - 2 * period]
        if abs(x - back) <= CONVERGENCE_TOL * (1 + abs(x)) and abs(x - back2) <= CONVERGENCE_TOL * (1 + abs(x)):
            return period
    return None


def orbit(params: CouplingParams, x0: float, steps: int = DEFAULT_ORBIT_STEPS) -> OrbitResult:
    """Iterate x, f(x), f(f(x)), ... until successive values differ by < CONVERGENCE_TOL.

    A cycle of period 2..MAX_CYCLE_PERIOD seen twice ends the orbit as
    ``cycling``; otherwise the orbit stops at ``steps`` with ``cap_reached``.
    """
    if not (isinstance(x0, numbers.Real) and x0 > 0 and math.isfinite(x0)):
        raise ParameterDomainError(f"orbit needs a positive finite start, got {x0!r}")
    if not isinstance(steps, numbers.Integral) or isinstance(steps, bool) or steps < 1:
        raise ParameterDomainError(f"orbit needs steps >= 1, got {steps!r}")

    w = weights(params)
    trajectory = [float(x0)]
    for _ in range(steps):
        x = trajectory[-1]
        nxt = float(f(x, w))
        trajectory.append(nxt)
        if abs(nxt - x) < CONVERGENCE_TOL:
            logger.debug(f"orbit from {x0} converged to {nxt} after {len(trajectory) - 1} step(s)")
            return OrbitResult(tuple(trajectory), CONVERGED, limit=nxt)
        period = _detect_cycle(trajectory)
        if period:
            return OrbitResult(tuple(trajectory), CYCLING, period=period)
    logger.warning(f"orbit from {x0} did not settle within {steps} step(s)")
    return OrbitResult(tuple(trajectory), CAP_REACHED)


def write_orbit_csv(result: OrbitResult, stream, fmt):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["step", "x", "f(x)"])
    t = result.trajectory
    for k in range(len(t) - 1):
        writer.writerow([k, fmt(t[k]), fmt(t[k + 1])])

