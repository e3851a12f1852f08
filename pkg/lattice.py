"""Order-3 triangular chandelier lattice (TCL).

Vertices are identified by ``(level, index)`` where ``index`` is the base-3
path from the root, so the parent of ``(m, i)`` is ``(m - 1, i // 3)``, its
children are ``(m + 1, 3 * i + j)`` for j = 0, 1, 2 and its siblings share
``i // 3``. Three pair classes live on the lattice:

    NN    parent-child edges
    SLNN  sibling triangle edges (same level, common parent)
    PNNN  vertex-grandchild pairs (prolonged next-nearest neighbours)
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass, field

from errors import CapacityError, ParameterDomainError

ORDER = 3
MAX_DEPTH = 8

EDGE_TYPES = ("NN", "SLNN", "PNNN")


def vertex_label(vertex):
    level, index = vertex
    return f"{level}:{index}"


@dataclass(frozen=True)
class UnitSemiBall:
    """A vertex together with its three direct prolonged successors."""

    center: tuple
    children: tuple


@dataclass(frozen=True)
class TclLattice:
    depth: int
    vertices: tuple
    nn_edges: tuple
    slnn_edges: tuple
    pnnn_pairs: tuple
    parent: dict = field(repr=False)
    successors: dict = field(repr=False)

    def level_of(self, vertex):
        return vertex[0]

    def sphere(self, m):
        """Vertices at distance exactly m from the root (W_m)."""
        _check_level(m, 0, self.depth, "sphere")
        return [(m, i) for i in range(ORDER ** m)]

    def ball(self, m):
        """Vertices at distance at most m from the root (V_m)."""
        _check_level(m, 0, self.depth, "ball")
        return [(level, i) for level in range(m + 1) for i in range(ORDER ** level)]

    def semi_balls(self, m):
        """One UnitSemiBall per vertex of W_m, children in ascending index order."""
        _check_level(m, 0, self.depth - 1, "semi_balls")
        return [UnitSemiBall(center=x, children=self.successors[x]) for x in self.sphere(m)]

    def siblings(self, vertex):
        level, index = vertex
        if level == 0:
            return ()
        base = (index // ORDER) * ORDER
        return tuple((level, base + j) for j in range(ORDER) if base + j != index)

    def degree(self, vertex):
        """Degree in the NN and SLNN graph restricted to this lattice."""
        children = len(self.successors.get(vertex, ()))
        parent = 1 if vertex in self.parent else 0
        return children + parent + len(self.siblings(vertex))

    def edge_counts(self):
        return {
            "vertices": len(self.vertices),
            "NN": len(self.nn_edges),
            "SLNN": len(self.slnn_edges),
            "PNNN": len(self.pnnn_pairs),
        }

    def index_of(self):
        """Map vertex -> position in ``vertices`` (bit position in the exact oracle)."""
        return {v: pos for pos, v in enumerate(self.vertices)}

    def iter_edges(self):
        for kind, edges in zip(EDGE_TYPES, (self.nn_edges, self.slnn_edges, self.pnnn_pairs)):
            for u, v in edges:
                yield kind, u, v

    def export_edges(self, stream):
        """Write one ``type u v`` line per edge; vertices printed as ``level:index``."""
        count = 0
        for kind, u, v in self.iter_edges():
            stream.write(f"{kind} {vertex_label(u)} {vertex_label(v)}\n")
            count += 1
        return count


def _check_level(m, lo, hi, what):
    if not isinstance(m, numbers.Integral) or isinstance(m, bool):
        raise ParameterDomainError(f"{what}: level must be an integer, got {m!r}")
    if m < lo or m > hi:
        raise ParameterDomainError(f"{what}: level {m} outside [{lo}, {hi}]")


def build(depth: int) -> TclLattice:
    """Build the TCL ball V_depth with canonically ordered, duplicate-free pair lists.

    Raises:
        ParameterDomainError: negative or non-integer depth.
        CapacityError: depth above MAX_DEPTH.
    """
    if not isinstance(depth, numbers.Integral) or isinstance(depth, bool):
        raise ParameterDomainError(f"depth must be an integer, got {depth!r}")
    if depth < 0:
        raise ParameterDomainError(f"depth must be non-negative, got {depth}")
    if depth > MAX_DEPTH:
        raise CapacityError(f"depth {depth} exceeds the lattice cap of {MAX_DEPTH}")
    depth = int(depth)

    vertices = []
    parent = {}
    successors = {}
    nn_edges = []
    slnn_edges = []
    pnnn_pairs = []

    for level in range(depth + 1):
        for index in range(ORDER ** level):
            x = (level, index)
            vertices.append(x)
            if level > 0:
                parent[x] = (level - 1, index // ORDER)
            if level < depth:
                successors[x] = tuple((level + 1, ORDER * index + j) for j in range(ORDER))

    for x in vertices:
        children = successors.get(x, ())
        for y in children:
            nn_edges.append((x, y))
        # sibling triangle under x
        for j in range(len(children)):
            for k in range(j + 1, len(children)):
                slnn_edges.append((children[j], children[k]))
        for y in children:
            for z in successors.get(y, ()):
                pnnn_pairs.append((x, z))

    return TclLattice(
        depth=depth,
        vertices=tuple(vertices),
        nn_edges=tuple(sorted(nn_edges)),
        slnn_edges=tuple(sorted(slnn_edges)),
        pnnn_pairs=tuple(sorted(pnnn_pairs)),
        parent=parent,
        successors=successors,
    )


def sphere(lattice: TclLattice, m: int):
    return lattice.sphere(m)


def semi_balls(lattice: TclLattice, m: int):
    return lattice.semi_balls(m)


def expected_counts(depth):
    """Closed-form counts: NN = SLNN = (3^(n+1) - 3) / 2, PNNN = sum_{m<=n-2} 9 * 3^m."""
    nn = (ORDER ** (depth + 1) - ORDER) // 2
    pnnn = sum(9 * ORDER ** m for m in range(depth - 1))
    return {
        "vertices": (ORDER ** (depth + 1) - 1) // 2,
        "NN": nn,
        "SLNN": nn,
        "PNNN": pnnn,
    }


def lattice_stats(depth):
    """Summary used by the ``lattice-stats`` subcommand and the JSON API."""
    lattice = build(depth)
    counts = lattice.edge_counts()
    return {
        "depth": depth,
        "counts": counts,
        "expected": expected_counts(depth),
        "sphere_sizes": [len(lattice.sphere(m)) for m in range(depth + 1)],
        "root_degree": lattice.degree((0, 0)),
        "interior_degree": lattice.degree((1, 0)) if depth >= 2 else None,
    }
