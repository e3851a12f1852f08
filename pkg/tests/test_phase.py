"""
Tests for phase scans, grid parsing and orbits of the scalar map.
"""

import io
import os
import sys
import unittest

import numpy as np

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from errors import CapacityError, ParameterDomainError, UsageError
from model import CouplingParams, weights
from output_utils import format_number
from phase import (
    CAP_REACHED,
    CONVERGED,
    CYCLING,
    MAX_SCAN_POINTS,
    OrbitResult,
    analyze_point,
    build_grid,
    orbit,
    parse_range,
    scan,
    write_orbit_csv,
    write_scan_csv,
)
from recurrence import f
from roots import STABLE, UNSTABLE, fixed_point_report

FIG4 = CouplingParams(-1, 29, 5.3, 68)
FIG5 = CouplingParams(-1, 10, 5.3, 44)


class TestParseRange(unittest.TestCase):

    def test_range(self):
        self.assertEqual(parse_range("0:1:5"), [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_single_value(self):
        self.assertEqual(parse_range("68"), [68.0])
        self.assertEqual(parse_range(-1), [-1.0])

    def test_single_point_range(self):
        self.assertEqual(parse_range("2:2:1"), [2.0])
        with self.assertRaises(ParameterDomainError):
            parse_range("1:2:1")

    def test_malformed(self):
        for text in ("a:b:c", "1:2", "1:2:3:4", ""):
            with self.subTest(text=text):
                with self.assertRaises(UsageError):
                    parse_range(text)

    def test_zero_points(self):
        with self.assertRaises(ParameterDomainError):
            parse_range("0:1:0")


class TestGrid(unittest.TestCase):

    def test_row_major_order(self):
        grid = build_grid("0:1:2", "5", "2", "1:2:2")
        self.assertEqual(
            [(p.J, p.T) for p in grid],
            [(0.0, 1.0), (0.0, 2.0), (1.0, 1.0), (1.0, 2.0)],
        )

    def test_non_positive_temperature(self):
        with self.assertRaises(ParameterDomainError):
            build_grid("1", "1", "1", "0:1:3")

    def test_capacity(self):
        with self.assertRaises(CapacityError):
            build_grid("0:1:2", "0", "0", f"1:2:{MAX_SCAN_POINTS}")

    def test_empty_grid(self):
        with self.assertRaises(ParameterDomainError):
            scan([])


class TestScan(unittest.TestCase):

    def test_fig4_point(self):
        cell = analyze_point(FIG4)
        self.assertEqual(cell.n_positive_roots, 3)
        self.assertTrue(cell.transition)
        self.assertEqual(cell.classes, (STABLE, UNSTABLE, STABLE))
        # closed-form interval is empty for J < 0 and predicts a single root
        self.assertFalse(cell.formula_agrees)

    def test_fig5_point(self):
        cell = analyze_point(FIG5)
        self.assertEqual(cell.n_positive_roots, 1)
        self.assertFalse(cell.transition)
        self.assertTrue(cell.formula_agrees)

    def test_scan_matches_standalone_analysis(self):
        grid = build_grid("-1", "10:30:5", "5.3", "40:70:4")
        cells = scan(grid)
        self.assertEqual([c.params for c in cells], grid)
        for cell in cells:
            report = fixed_point_report(cell.params)
            self.assertEqual(list(cell.roots), report.positive_real_roots)
            self.assertEqual(list(cell.classes), report.classes)

    def test_no_prolonged_coupling_has_no_transition(self):
        grid = build_grid("-2:2:10", "0", "-1:1:10", "1:5:10")
        cells = scan(grid)
        self.assertEqual(len(cells), 1000)
        for cell in cells:
            self.assertEqual(cell.n_positive_roots, 1)
            self.assertFalse(cell.transition)
            self.assertAlmostEqual(cell.roots[0], 1.0, delta=1e-12)

    def test_decreasing_map_has_one_root(self):
        grid = build_grid("-2:2:5", "-2:-0.1:5", "-2:2:5", "1:5:4")
        for cell in scan(grid):
            self.assertLess(weights(cell.params).b ** 4, 1)
            self.assertEqual(cell.n_positive_roots, 1)

    def test_decreasing_map_with_strong_same_level_coupling(self):
        grid = build_grid("-8:8:3", "-3:-0.5:3", "-25:25:5", "6:10:3")
        grid.append(CouplingParams(-7.556, -2.495, -25.008, 6.936))
        for cell in scan(grid):
            self.assertLess(weights(cell.params).b ** 4, 1)
            self.assertEqual(cell.n_positive_roots, 1, msg=str(cell.params))

    def test_counts_bounded(self):
        rng = np.random.default_rng(50)
        for _ in range(500):
            J, Jp, Jsl = rng.uniform(-3, 3, 3)
            cell = analyze_point(CouplingParams(J, Jp, Jsl, rng.uniform(0.5, 10)))
            self.assertIn(cell.n_positive_roots, (1, 2, 3))

    def test_csv_output(self):
        cells = scan([FIG4, FIG5])
        buf = io.StringIO()
        write_scan_csv(cells, buf, format_number)
        lines = buf.getvalue().splitlines()
        self.assertEqual(lines[0], "J,Jp,Jsl,T,n_positive,transition,classes,T_star,T_double_star,formula_agrees")
        self.assertEqual(len(lines), 3)
        fields = lines[1].split(",")
        self.assertEqual(fields[:7], ["-1.0", "29.0", "5.3", "68.0", "3", "true", "stable|unstable|stable"])
        self.assertEqual(fields[-1], "false")

    def test_parallel_scan_preserves_order(self):
        grid = build_grid("-1", "5:30:6", "5.3", "40:70:3")
        serial = scan(grid)
        parallel = scan(grid, workers=2)
        self.assertEqual(serial, parallel)


class TestOrbit(unittest.TestCase):

    def test_fig4_from_above(self):
        result = orbit(FIG4, 8.0)
        self.assertEqual(result.diagnosis, CONVERGED)
        self.assertAlmostEqual(result.limit, 7.40762, delta=1e-4)

    def test_fig4_from_below(self):
        result = orbit(FIG4, 0.1)
        self.assertEqual(result.diagnosis, CONVERGED)
        self.assertAlmostEqual(result.limit, 0.127421, delta=1e-4)

    def test_zero_couplings_converge_in_one_step(self):
        result = orbit(CouplingParams(0, 0, 0, 1), 5.0)
        self.assertEqual(result.trajectory[1], 1.0)
        self.assertEqual(result.diagnosis, CONVERGED)
        self.assertEqual(result.limit, 1.0)

    def test_limits_are_fixed_points(self):
        w = weights(FIG4)
        for x0 in (0.01, 0.5, 2.0, 20.0):
            result = orbit(FIG4, x0)
            self.assertEqual(result.diagnosis, CONVERGED)
            self.assertLessEqual(abs(f(result.limit, w) - result.limit), 1e-8)

    def test_unstable_root_is_never_the_limit(self):
        unstable = fixed_point_report(FIG4).positive[1]
        self.assertEqual(unstable.kind, UNSTABLE)
        for factor in (1 - 1e-3, 1 + 1e-3):
            result = orbit(FIG4, unstable.x * factor)
            self.assertEqual(result.diagnosis, CONVERGED)
            self.assertGreater(abs(result.limit - unstable.x), 1e-2)

    def test_two_cycle(self):
        result = orbit(CouplingParams(0, -1, 0, 1), 2.0)
        self.assertEqual(result.diagnosis, CYCLING)
        self.assertEqual(result.period, 2)
        tail = sorted(result.trajectory[-2:])
        self.assertAlmostEqual(tail[0], 0.00262288888642326, delta=1e-9)
        self.assertAlmostEqual(tail[1], 381.259002307057, delta=1e-6)

    def test_cap_reached(self):
        result = orbit(FIG4, 8.0, steps=3)
        self.assertEqual(result.diagnosis, CAP_REACHED)
        self.assertEqual(result.steps, 3)
        self.assertIsNone(result.limit)

    def test_numpy_arguments(self):
        result = orbit(FIG4, np.float64(8.0), steps=np.int64(3))
        self.assertEqual(result.diagnosis, CAP_REACHED)
        self.assertEqual(len(result.trajectory), 4)

    def test_invalid_start(self):
        with self.assertRaises(ParameterDomainError):
            orbit(FIG4, 0.0)
        with self.assertRaises(ParameterDomainError):
            orbit(FIG4, 1.0, steps=0)

    def test_csv_output(self):
        buf = io.StringIO()
        write_orbit_csv(OrbitResult((5.0, 1.0, 1.0), CONVERGED, limit=1.0), buf, format_number)
        self.assertEqual(buf.getvalue(), "step,x,f(x)\n0,5.0,1.0\n1,1.0,1.0\n")


if __name__ == "__main__":
    unittest.main()
