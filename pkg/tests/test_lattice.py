"""
Tests for the triangular chandelier lattice builder.
"""

import io
import os
import sys
import unittest

import numpy as np

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from errors import CapacityError, ParameterDomainError
from lattice import MAX_DEPTH, build, expected_counts, lattice_stats, semi_balls, sphere


class TestCounts(unittest.TestCase):

    def test_depth_two_counts(self):
        self.assertEqual(
            build(2).edge_counts(),
            {"vertices": 13, "NN": 12, "SLNN": 12, "PNNN": 9},
        )

    def test_depth_three_counts(self):
        self.assertEqual(
            build(3).edge_counts(),
            {"vertices": 40, "NN": 39, "SLNN": 39, "PNNN": 36},
        )

    def test_counts_match_closed_form(self):
        for depth in range(0, 6):
            with self.subTest(depth=depth):
                self.assertEqual(build(depth).edge_counts(), expected_counts(depth))

    def test_root_only(self):
        lat = build(0)
        self.assertEqual(lat.vertices, ((0, 0),))
        self.assertEqual(lat.nn_edges, ())
        self.assertEqual(lat.pnnn_pairs, ())

    def test_sphere_sizes(self):
        lat = build(4)
        for m in range(5):
            self.assertEqual(len(lat.sphere(m)), 3 ** m)
        self.assertEqual(len(sphere(lat, 2)), 9)

    def test_ball_is_union_of_spheres(self):
        lat = build(3)
        self.assertEqual(len(lat.ball(2)), 1 + 3 + 9)
        self.assertEqual(lat.ball(3), list(lat.vertices))


class TestStructure(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.lat = build(3)

    def test_no_duplicate_pairs(self):
        for edges in (self.lat.nn_edges, self.lat.slnn_edges, self.lat.pnnn_pairs):
            normalized = {tuple(sorted(e)) for e in edges}
            self.assertEqual(len(normalized), len(edges))

    def test_nn_edges_join_parent_and_child(self):
        for x, y in self.lat.nn_edges:
            self.assertEqual(y[0], x[0] + 1)
            self.assertEqual(y[1] // 3, x[1])

    def test_slnn_edges_join_siblings(self):
        for y, z in self.lat.slnn_edges:
            self.assertEqual(y[0], z[0])
            self.assertEqual(y[1] // 3, z[1] // 3)
            self.assertNotEqual(y, z)

    def test_pnnn_pairs_join_grandparent_and_grandchild(self):
        for x, z in self.lat.pnnn_pairs:
            self.assertEqual(z[0], x[0] + 2)
            self.assertEqual(z[1] // 9, x[1])

    def test_semi_balls(self):
        balls = self.lat.semi_balls(1)
        self.assertEqual(len(balls), 3)
        self.assertEqual(balls[0].center, (1, 0))
        self.assertEqual(balls[0].children, ((2, 0), (2, 1), (2, 2)))
        self.assertEqual(len(semi_balls(self.lat, 2)), 9)

    def test_semi_balls_at_leaf_level_rejected(self):
        with self.assertRaises(ParameterDomainError):
            self.lat.semi_balls(3)

    def test_siblings(self):
        self.assertEqual(self.lat.siblings((2, 4)), ((2, 3), (2, 5)))
        self.assertEqual(self.lat.siblings((0, 0)), ())

    def test_degrees(self):
        self.assertEqual(self.lat.degree((0, 0)), 3)
        # three children, one parent, two siblings
        self.assertEqual(self.lat.degree((1, 0)), 6)
        # leaves keep parent and siblings only
        self.assertEqual(self.lat.degree((3, 0)), 3)

    def test_sphere_out_of_range(self):
        with self.assertRaises(ParameterDomainError):
            self.lat.sphere(4)
        with self.assertRaises(ParameterDomainError):
            self.lat.sphere(-1)


class TestBuildErrors(unittest.TestCase):

    def test_negative_depth(self):
        with self.assertRaises(ParameterDomainError):
            build(-1)

    def test_non_integer_depth(self):
        with self.assertRaises(ParameterDomainError):
            build(2.0)
        with self.assertRaises(ParameterDomainError):
            build(True)

    def test_depth_above_cap(self):
        with self.assertRaises(CapacityError):
            build(MAX_DEPTH + 1)

    def test_numpy_integer_depth(self):
        lat = build(np.int64(2))
        self.assertEqual(lat.depth, 2)
        self.assertIs(type(lat.depth), int)
        self.assertEqual(len(lat.vertices), 13)
        self.assertEqual(lat.sphere(np.int64(2)), lat.sphere(2))
        self.assertEqual(len(semi_balls(lat, np.int64(1))), 3)


class TestExport(unittest.TestCase):

    def test_export_edges_format(self):
        lat = build(2)
        buf = io.StringIO()
        count = lat.export_edges(buf)
        lines = buf.getvalue().splitlines()
        self.assertEqual(count, 12 + 12 + 9)
        self.assertEqual(len(lines), count)
        self.assertEqual(lines[0], "NN 0:0 1:0")
        kinds = {line.split()[0] for line in lines}
        self.assertEqual(kinds, {"NN", "SLNN", "PNNN"})
        self.assertIn("PNNN 0:0 2:8", lines)

    def test_lattice_stats(self):
        stats = lattice_stats(2)
        self.assertEqual(stats["counts"], stats["expected"])
        self.assertEqual(stats["sphere_sizes"], [1, 3, 9])
        self.assertEqual(stats["root_degree"], 3)
        self.assertEqual(stats["interior_degree"], 6)


if __name__ == "__main__":
    unittest.main()
