"""Brute-force references used by the test suite.

Nothing in here uses the lookup tables of the neighbor code: adjacency is
found by matching integer vertex coordinates and partitions are computed by
walking the global leaf sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .cmesh import CoarseMesh
from .elements import ElementKernel, TreeShape, shape_kernel
from .forest import Bounds
from .sfc import Element, length

MAX_DEPTH = 5

Vertex = tuple[int, int, int]


class OracleError(AssertionError):
    """The oracle found its own input inconsistent."""


@dataclass
class EnumeratedTree:
    shape: TreeShape
    depth: int
    levels: list[list[Element]]
    parent: dict[Element, Element] = field(default_factory=dict)
    _faces: dict[int, dict[frozenset, list[tuple[Element, int]]]] = field(default_factory=dict)

    @property
    def kernel(self) -> ElementKernel:
        return shape_kernel(self.shape)

    def leaf_counts(self) -> list[int]:
        return [len(l) for l in self.levels]

    def all_elements(self) -> Iterable[Element]:
        for lvl in self.levels:
            yield from lvl

    def face_index(self, level: int) -> dict[frozenset, list[tuple[Element, int]]]:
        idx = self._faces.get(level)
        if idx is None:
            k = self.kernel
            idx = {}
            for e in self.levels[level]:
                for f in range(k.num_faces(e)):
                    idx.setdefault(frozenset(k.face_vertices(e, f)), []).append((e, f))
            self._faces[level] = idx
        return idx


def enumerate_tree(shape: TreeShape | str, depth: int) -> EnumeratedTree:
    shape = TreeShape(shape)
    if not 0 <= depth <= MAX_DEPTH:
        raise OracleError(f"depth {depth} outside [0, {MAX_DEPTH}]")
    k = shape_kernel(shape)
    levels = [[k.root]]
    parent: dict[Element, Element] = {}
    for _ in range(depth):
        nxt = []
        for e in levels[-1]:
            for c in k.children(e):
                parent[c] = e
                nxt.append(c)
        levels.append(nxt)
    return EnumeratedTree(shape, depth, levels, parent)


def geometric_neighbor(tree: EnumeratedTree, e: Element, f: int) -> tuple[Element, int] | None:
    """The same-level element sharing all vertices of face ``f`` of ``e``, or None."""
    k = tree.kernel
    key = frozenset(k.face_vertices(e, f))
    hits = [(n, g) for n, g in tree.face_index(e.level)[key] if n != e]
    if len(hits) > 1:
        raise OracleError(f"face {f} of {e} is shared by {len(hits)} elements")
    return hits[0] if hits else None


# -- root faces by plain geometry --------------------------------------------


def _sub(a: Vertex, b: Vertex) -> Vertex:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _cross(a: Vertex, b: Vertex) -> Vertex:
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _dot(a: Vertex, b: Vertex) -> int:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def geometric_root_face(k: ElementKernel, verts: Sequence[Vertex]) -> int | None:
    """Root face whose plane contains all ``verts`` (which lie inside the root)."""
    for g in range(k.num_root_faces):
        rv = k.face_vertices(k.root, g)
        n = _cross(_sub(rv[1], rv[0]), _sub(rv[2], rv[0]))
        if all(_dot(_sub(v, rv[0]), n) == 0 for v in verts):
            return g
    return None


# -- uniform partition, serially ---------------------------------------------


def serial_uniform_bounds(cmesh: CoarseMesh, level: int, size: int) -> list[Bounds]:
    """Per-rank bounds of the equal split, by one walk over the trees."""
    counts = []
    for t in range(cmesh.num_trees):
        k = cmesh.kernel(t)
        counts.append(k.num_descendants_at_level(k.root, level))
    n = sum(counts)
    out = []
    for q in range(size):
        lo, hi = q * n // size, (q + 1) * n // size
        start = 0
        ft = fe = lt = le = None
        for t, c in enumerate(counts):
            if ft is None and start + c > lo:
                ft, fe = t, lo - start
            if hi > lo and start < hi <= start + c:
                lt, le = t, hi - 1 - start
            start += c
        if hi == lo:
            lt, le = ft - 1, 0
            fe = 0
        out.append(Bounds(ft, fe, lt, le))
    return out


# -- face atoms for ghost adjacency ------------------------------------------


def _mid(a: Vertex, b: Vertex) -> Vertex:
    return ((a[0] + b[0]) // 2, (a[1] + b[1]) // 2, (a[2] + b[2]) // 2)


def _split(face: Sequence[Vertex]) -> list[tuple[Vertex, ...]]:
    if len(face) == 3:
        a, b, c = face
        ab, ac, bc = _mid(a, b), _mid(a, c), _mid(b, c)
        return [(a, ab, ac), (ab, b, bc), (ac, bc, c), (ab, bc, ac)]
    # quads: corners as a 2x2 grid, any order; split through the centre
    lo = tuple(min(v[i] for v in face) for i in range(3))
    hi = tuple(max(v[i] for v in face) for i in range(3))
    flat = [i for i in range(3) if lo[i] == hi[i]][0]
    u, w = [i for i in range(3) if i != flat]
    mu, mw = (lo[u] + hi[u]) // 2, (lo[w] + hi[w]) // 2
    out = []
    for a0, a1 in ((lo[u], mu), (mu, hi[u])):
        for b0, b1 in ((lo[w], mw), (mw, hi[w])):
            quad = []
            for pu, pw in ((a0, b0), (a1, b0), (a0, b1), (a1, b1)):
                v = [0, 0, 0]
                v[flat], v[u], v[w] = lo[flat], pu, pw
                quad.append(tuple(v))
            out.append(tuple(quad))
    return out


def face_atoms(face: Sequence[Vertex], times: int) -> list[tuple[Vertex, ...]]:
    """Split a triangle or axis-aligned quad ``times`` times into congruent pieces."""
    cur = [tuple(face)]
    for _ in range(times):
        cur = [s for f in cur for s in _split(f)]
    return cur


def adjacency_oracle(
    cmesh: CoarseMesh, leaves: Sequence[tuple[int, int, Element]]
) -> dict[int, set[tuple[int, int, Element]]]:
    """Expected ghost layers from (owner, tree, leaf) triples of the whole forest.

    Every leaf face is cut into finest-level atoms; two leaves are adjacent iff
    they share an atom. Atoms on a linked root face are keyed by their
    coordinates in that face's own 2D frame, which is how links identify faces.
    """
    finest = max(e.level for _, _, e in leaves)
    atoms: dict[tuple, set[tuple[int, int, Element]]] = {}
    for owner, tree, e in leaves:
        k = cmesh.kernel(tree)
        for f in range(k.num_faces(e)):
            verts = k.face_vertices(e, f)
            g = geometric_root_face(k, verts)
            if g is not None:
                link = cmesh.link(tree, g)
                if link is None:
                    continue
                i, j = k.face_axes(g)
                side = min((tree, g), link)
            for atom in face_atoms(verts, finest - e.level):
                if g is None:
                    key = (tree, frozenset(atom))
                else:
                    key = ("link", side, frozenset((v[i], v[j]) for v in atom))
                atoms.setdefault(key, set()).add((owner, tree, e))
    ghosts: dict[int, set[tuple[int, int, Element]]] = {}
    for group in atoms.values():
        for a in group:
            for b in group:
                if a[0] != b[0]:
                    ghosts.setdefault(a[0], set()).add(b)
    return ghosts


# -- boundary triangles ------------------------------------------------------


def triangle_parent_type(x: int, y: int, level: int, ftype: int) -> int:
    """Type of the parent of a triangle, from the position of its centroid."""
    h = length(level)
    # centroid of the triangle, times 3, relative to its square
    cu, cv = (2 * h, h) if ftype == 0 else (h, 2 * h)
    H = 2 * h
    pu, pv = 3 * (x & (H - 1)) + cu, 3 * (y & (H - 1)) + cv
    return 0 if pu >= pv else 1


def corner_walk_is_pyramid(x: int, y: int, level: int, ftype: int) -> bool:
    """A boundary triangle extrudes to a pyramid iff it and all its ancestors have type 0."""
    t = ftype
    for lvl in range(level, 0, -1):
        if t != 0:
            return False
        h = length(lvl)
        t = triangle_parent_type(x, y, lvl, t)
        x, y = x & ~h, y & ~h
    return t == 0


def boundary_triangles(level: int, ftype: int | None = None) -> list[tuple[int, int, int]]:
    """All (x, y, type) triangles of the reference root triangle at ``level``."""
    h = length(level)
    n = 1 << level
    out = []
    for i in range(n):
        for j in range(i + 1):
            for t in (0, 1):
                if t == 1 and i == j:
                    continue
                if ftype is None or t == ftype:
                    out.append((i * h, j * h, t))
    return out
