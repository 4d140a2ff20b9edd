"""Geometry of Hanoi attractors: contraction system, vertex sets, meshes.

A Hanoi attractor with parameter ``alpha`` in (0, 1/3) is generated by three
similitudes of ratio ``(1 - alpha)/2`` that fix the corners of the unit
equilateral triangle, together with the straight segments of length ``alpha``
joining the three contracted copies.  The level-``n`` approximation consists
of ``3**n`` triangular cells plus every connecting segment created up to
level ``n``; a level-``k`` segment has length ``alpha * ((1-alpha)/2)**(k-1)``.

:func:`build_mesh` turns this approximation into a finite graph: cell corners
are the primary vertices, each segment is split into ``subdiv`` equal
sub-edges with uniformly spaced interior vertices (uniform in the chord
parameter ``t`` of the segment).  Vertex identity is resolved through exact
word addresses, never by comparing floating-point coordinates, and ids are
assigned deterministically so that two builds with identical parameters are
byte-identical.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

ALPHABET = (1, 2, 3)

# Corners of the unit triangle, which are the fixed points of the three maps.
P1 = (0.0, 0.0)
P2 = (0.5, math.sqrt(3.0) / 2.0)
P3 = (1.0, 0.0)
CORNERS = (P1, P2, P3)

KIND_CORNER = "cell-corner"
KIND_INTERIOR = "segment-interior"

WordLike = "str | Sequence[int] | None"


def check_alpha(alpha: float) -> float:
    """Validate the contraction parameter.

    Only ``0 < alpha < 1/3`` gives an attractor of dimension above one;
    boundary values are rejected.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0 / 3.0:
        raise ValueError(
            f"alpha must lie strictly inside (0, 1/3); got {alpha!r}"
        )
    return alpha


def as_word(word) -> tuple[int, ...]:
    """Normalize a word over the alphabet {1, 2, 3}.

    Accepts a string like ``"132"``, a sequence of ints, or None/empty for
    the empty word (the identity map).
    """
    if word is None:
        return ()
    if isinstance(word, str):
        symbols = tuple(int(ch) for ch in word)
    else:
        symbols = tuple(int(s) for s in word)
    if any(s not in ALPHABET for s in symbols):
        raise ValueError(f"word symbols must come from {{1,2,3}}; got {word!r}")
    return symbols


def cell_ratio(alpha: float) -> float:
    """Contraction ratio (1 - alpha)/2 of the three corner maps."""
    return (1.0 - alpha) / 2.0


def segment_length(alpha: float, level: int) -> float:
    """Length of a connecting segment created at ``level`` (level >= 1)."""
    if level < 1:
        raise ValueError("segment levels start at 1")
    return alpha * cell_ratio(alpha) ** (level - 1)


def contract(word, point, alpha: float) -> np.ndarray:
    """Apply the composed contraction addressed by ``word`` to ``point``.

    Maps compose left to right, so the last symbol acts first; the empty
    word is the identity.
    """
    check_alpha(alpha)
    ratio = cell_ratio(alpha)
    pt = np.array(point, dtype=float)
    for s in reversed(as_word(word)):
        fixed = CORNERS[s - 1]
        pt[0] = ratio * (pt[0] - fixed[0]) + fixed[0]
        pt[1] = ratio * (pt[1] - fixed[1]) + fixed[1]
    return pt


def hausdorff_dimension(alpha: float) -> float:
    """Hausdorff dimension ln 3 / (ln 2 - ln(1 - alpha)) of the attractor."""
    check_alpha(alpha)
    return math.log(3.0) / (math.log(2.0) - math.log(1.0 - alpha))


def holder_exponent(alpha: float) -> float:
    """Exponent governing Hoelder continuity of finite-energy functions.

    Returns ``(ln 3 - ln 5) / (2 (ln(1-alpha) - ln 2))``, which lies in
    (0, 1/2) for every admissible alpha.
    """
    check_alpha(alpha)
    return (math.log(3.0) - math.log(5.0)) / (
        2.0 * (math.log(1.0 - alpha) - math.log(2.0))
    )


def corner_count(level: int) -> int:
    """Number of cell-corner vertices at the given level: 3**(level+1)."""
    return 3 ** (level + 1)


def segment_count(level: int) -> int:
    """Total number of connecting segments up to the given level."""
    return (3 ** (level + 1) - 3) // 2


def node_count(level: int, subdiv: int) -> int:
    """Total mesh nodes for a given level and segment subdivision count."""
    return corner_count(level) + (subdiv - 1) * segment_count(level)


def _word_rank(word: tuple[int, ...]) -> int:
    """Lexicographic rank of a word within the words of its own length."""
    r = 0
    for s in word:
        r = 3 * r + (s - 1)
    return r


def _corner_id(word: tuple[int, ...], i: int) -> int:
    return 3 * _word_rank(word) + (i - 1)


@dataclass(frozen=True)
class Vertex:
    """A mesh node.

    ``cell_level`` is set for cell corners (the mesh level), and
    ``segment_level`` is the creation level of the segment a node lies on;
    corner nodes that are segment endpoints carry both, the three outer
    corners carry only ``cell_level``.
    """

    id: int
    x: float
    y: float
    kind: str
    cell_level: int | None = None
    segment_level: int | None = None


@dataclass(frozen=True)
class Segment:
    """A connecting segment: creation level, endpoint ids, exact length,
    and the ids of its subdivision vertices in chord order."""

    level: int
    a: int
    b: int
    length: float
    interior: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Mesh:
    """Finite weighted-graph approximation of a Hanoi attractor.

    Immutable after construction; safe to share between threads.  Node ids
    are contiguous, cell corners first (ordered by word address, then corner
    index), then segment interiors (segments ordered by level, generating
    word, and local index).
    """

    alpha: float
    level: int
    subdiv: int
    vertices: tuple[Vertex, ...]
    discrete_edges: tuple[tuple[int, int, str], ...]
    segments: tuple[Segment, ...]

    @property
    def n_nodes(self) -> int:
        return len(self.vertices)

    @property
    def n_corners(self) -> int:
        return corner_count(self.level)

    @cached_property
    def coords(self) -> np.ndarray:
        pts = np.array([(v.x, v.y) for v in self.vertices], dtype=float)
        pts.setflags(write=False)
        return pts

    @cached_property
    def boundary_ids(self) -> tuple[int, int, int]:
        """Ids of the three outer corners (fixed points of the maps)."""
        n = self.level
        return tuple(_corner_id((i,) * n, i) for i in ALPHABET)

    def segment_chain(self, seg: Segment) -> tuple[int, ...]:
        """Node ids along a segment from endpoint a to endpoint b."""
        return (seg.a, *seg.interior, seg.b)

    def to_json_dict(self) -> dict:
        verts = []
        for v in self.vertices:
            lvl = v.cell_level if v.kind == KIND_CORNER else v.segment_level
            verts.append(
                {"id": v.id, "x": v.x, "y": v.y, "kind": v.kind, "level": lvl}
            )
        return {
            "alpha": self.alpha,
            "level": self.level,
            "subdiv": self.subdiv,
            "vertices": verts,
            "discrete_edges": [
                {"a": a, "b": b, "word": w} for a, b, w in self.discrete_edges
            ],
            "segments": [
                {
                    "level": s.level,
                    "a": s.a,
                    "b": s.b,
                    "interior_ids": list(s.interior),
                }
                for s in self.segments
            ],
        }


def _segment_specs(level: int) -> list[tuple[int, int, int]]:
    """Deterministic enumeration of all segments up to ``level``.

    Yields (segment level k, endpoint-a id, endpoint-b id) with endpoint ids
    resolved at mesh level ``level``.  A level-k segment generated by the
    word ``u`` (|u| = k-1) and local index m joins the two of the three
    child-cell corners away from corner m; their level-n addresses come
    from padding with the stationary symbol.
    """
    specs = []
    for k in range(1, level + 1):
        pad = level - k
        for u in itertools.product(ALPHABET, repeat=k - 1):
            for m in ALPHABET:
                j, l = (s for s in ALPHABET if s != m)
                a = _corner_id(u + (j,) + (l,) * pad, l)
                b = _corner_id(u + (l,) + (j,) * pad, j)
                specs.append((k, a, b))
    return specs


def build_level_sets(alpha: float, level: int):
    """Cell-corner points and connecting segments at a given level.

    Returns a pair ``(points, segments)`` where ``points`` is an
    (3**(level+1), 2) array of corner coordinates and ``segments`` the tuple
    of :class:`Segment` records with endpoint ids into ``points``.
    """
    mesh = build_mesh(alpha, level, 1)
    pts = mesh.coords[: mesh.n_corners].copy()
    return pts, mesh.segments


def build_mesh(alpha: float, level: int, subdiv: int = 1) -> Mesh:
    """Build the level-``level`` mesh with ``subdiv`` sub-edges per segment.

    Raises ValueError for out-of-range parameters.  The construction is
    validated against the closed-form node/edge/segment counts and checked
    to be connected before returning.
    """
    alpha = check_alpha(alpha)
    if level < 0:
        raise ValueError(f"level must be >= 0; got {level}")
    if subdiv < 1:
        raise ValueError(f"subdiv must be >= 1; got {subdiv}")
    level, subdiv = int(level), int(subdiv)

    words = list(itertools.product(ALPHABET, repeat=level))

    specs = _segment_specs(level)
    seg_level_of: dict[int, int] = {}
    for k, a, b in specs:
        for vid in (a, b):
            # every corner is the endpoint of at most one segment
            assert vid not in seg_level_of
            seg_level_of[vid] = k

    vertices: list[Vertex] = []
    for w in words:
        for i in ALPHABET:
            pt = contract(w, CORNERS[i - 1], alpha)
            vid = len(vertices)
            vertices.append(
                Vertex(
                    id=vid,
                    x=float(pt[0]),
                    y=float(pt[1]),
                    kind=KIND_CORNER,
                    cell_level=level,
                    segment_level=seg_level_of.get(vid),
                )
            )

    segments: list[Segment] = []
    for k, a, b in specs:
        d_k = segment_length(alpha, k)
        ax, ay = vertices[a].x, vertices[a].y
        bx, by = vertices[b].x, vertices[b].y
        # coordinate rounding accumulates one ulp per map application, so
        # the geometric cross-check is looser than the stored exact length
        dist = math.hypot(bx - ax, by - ay)
        if abs(dist - d_k) > 1e-12 * d_k:
            raise AssertionError(
                f"segment length {dist} deviates from {d_k} at level {k}"
            )
        interior = []
        for s in range(1, subdiv):
            t = s / subdiv
            vid = len(vertices)
            vertices.append(
                Vertex(
                    id=vid,
                    x=ax + t * (bx - ax),
                    y=ay + t * (by - ay),
                    kind=KIND_INTERIOR,
                    segment_level=k,
                )
            )
            interior.append(vid)
        segments.append(Segment(k, a, b, d_k, tuple(interior)))

    discrete_edges: list[tuple[int, int, str]] = []
    for w in words:
        base = 3 * _word_rank(w)
        ws = "".join(map(str, w))
        discrete_edges.append((base, base + 1, ws))
        discrete_edges.append((base, base + 2, ws))
        discrete_edges.append((base + 1, base + 2, ws))

    mesh = Mesh(
        alpha=alpha,
        level=level,
        subdiv=subdiv,
        vertices=tuple(vertices),
        discrete_edges=tuple(discrete_edges),
        segments=tuple(segments),
    )
    _validate_mesh(mesh)
    return mesh


def _validate_mesh(mesh: Mesh) -> None:
    n, M = mesh.level, mesh.subdiv
    if mesh.n_corners != corner_count(n):
        raise AssertionError("corner count mismatch")
    if len(mesh.segments) != segment_count(n):
        raise AssertionError("segment count mismatch")
    if len(mesh.discrete_edges) != 3 * 3**n:
        raise AssertionError("discrete edge count mismatch")
    if mesh.n_nodes != node_count(n, M):
        raise AssertionError("node count mismatch")

    rows, cols = [], []
    for a, b, _ in mesh.discrete_edges:
        rows.append(a)
        cols.append(b)
    for seg in mesh.segments:
        chain = mesh.segment_chain(seg)
        for a, b in zip(chain[:-1], chain[1:]):
            rows.append(a)
            cols.append(b)
    adj = coo_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes)
    )
    n_comp, _ = connected_components(adj, directed=False)
    if n_comp != 1:
        raise AssertionError(f"mesh is not connected ({n_comp} components)")


def mesh_to_json(mesh: Mesh) -> str:
    """Serialize a mesh to the canonical JSON layout."""
    return json.dumps(mesh.to_json_dict(), indent=1)


def dump_mesh(mesh: Mesh, path) -> None:
    with open(path, "w") as fh:
        fh.write(mesh_to_json(mesh))
        fh.write("\n")
