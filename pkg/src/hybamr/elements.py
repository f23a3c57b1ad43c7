"""Per-shape element kernels behind one interface.

The forest layer never looks at element internals; it asks the kernel of a
tree's shape for children, keys, neighbors and boundary maps.
"""

from __future__ import annotations

import enum
from typing import Sequence

from . import neighbors as nb
from . import sfc
from . import tables as tb
from .neighbors import QUAD, TRIANGLE, FaceElement, NeighborResult
from .sfc import L_MAX, ROOT_LEN, DomainError, Element, length


class TreeShape(enum.Enum):
    HEX = "hex"
    TET = "tet"
    PYRAMID = "pyramid"


def _spread3(v: int) -> int:
    """Insert two zero bits between the bits of a 21-bit integer."""
    v &= 0x1FFFFF
    v = (v | v << 32) & 0x1F00000000FFFF
    v = (v | v << 16) & 0x1F0000FF0000FF
    v = (v | v << 8) & 0x100F00F00F00F00F
    v = (v | v << 4) & 0x10C30C30C30C30C3
    v = (v | v << 2) & 0x1249249249249249
    return v


def _repunit(base: int, digits: int) -> int:
    return (base**digits - 1) // (base - 1)


class ElementKernel:
    """Operations shared by all shapes; subclasses fill in the geometry."""

    shape: TreeShape
    root: Element
    num_root_faces: int
    vtk_type: int

    # -- refinement --------------------------------------------------------
    def child(self, e: Element, i: int) -> Element:
        raise NotImplementedError

    def children(self, e: Element) -> list[Element]:
        return [self.child(e, i) for i in range(self.num_children(e))]

    def num_children(self, e: Element) -> int:
        return 8

    def is_family(self, elems: Sequence[Element]) -> bool:
        if not elems or elems[0].level == 0:
            return False
        p = self.parent(elems[0])
        if len(elems) != self.num_children(p):
            return False
        return list(elems) == self.children(p)

    def num_descendants_at_level(self, e: Element, level: int) -> int:
        if level < e.level:
            raise DomainError(f"level {level} is coarser than the element level {e.level}")
        return 8 ** (level - e.level)

    def first_descendant(self, e: Element, level: int) -> Element:
        if level < e.level:
            raise DomainError("descendant level coarser than element")
        while e.level < level:
            e = self.child(e, 0)
        return e

    def last_descendant(self, e: Element, level: int) -> Element:
        if level < e.level:
            raise DomainError("descendant level coarser than element")
        while e.level < level:
            e = self.child(e, self.num_children(e) - 1)
        return e

    def successor(self, e: Element) -> Element:
        lid = self.linear_id(e) + 1
        if lid >= self.num_descendants_at_level(self.root, e.level):
            raise DomainError("the last element of a level has no successor")
        return self.element_from_linear_id(e.level, lid)

    def sort_key(self, e: Element) -> tuple[int, int]:
        return (self.sfc_index(e), e.level)

    # -- faces -------------------------------------------------------------
    def face_neighbor(self, e: Element, f: int) -> NeighborResult | None:
        raise NotImplementedError

    def children_at_face(self, e: Element, f: int) -> list[tuple[Element, int]]:
        return [(self.child(e, k), cf) for k, cf in tb.CHILDREN_AT_FACE[e.etype][f]]

    def face_vertices(self, e: Element, f: int) -> list[tuple[int, int, int]]:
        v = self.vertex_coords(e)
        return [v[i] for i in self.face_corner_ids(e, f)]

    def centroid(self, e: Element) -> tuple[float, float, float]:
        v = self.vertex_coords(e)
        n = len(v)
        return (sum(p[0] for p in v) / n, sum(p[1] for p in v) / n, sum(p[2] for p in v) / n)


class HexKernel(ElementKernel):
    """Plain 3D Morton order on hexahedra; etype is always 0."""

    shape = TreeShape.HEX
    root = Element(0, 0, 0, 0, 0, -1)
    num_root_faces = 6
    vtk_type = tb.VTK_HEXAHEDRON
    # (u, v) axes of the face element on root face g
    FACE_AXES = ((1, 2), (1, 2), (0, 2), (0, 2), (0, 1), (0, 1))
    # corner order of a VTK hexahedron in terms of Morton corner numbers
    VTK_ORDER = (0, 1, 3, 2, 4, 5, 7, 6)

    def check(self, e: Element) -> None:
        if e.etype != 0 or e.mtl != -1:
            raise DomainError(f"not a hexahedron: {e}")
        if not 0 <= e.level <= L_MAX:
            raise DomainError(f"level {e.level} outside [0, {L_MAX}]")
        low = length(e.level) - 1
        for c in (e.x, e.y, e.z):
            if not 0 <= c < ROOT_LEN or c & low:
                raise DomainError(f"coordinate {c} not aligned to level {e.level}")

    def child(self, e: Element, i: int) -> Element:
        if e.level >= L_MAX:
            raise DomainError("maximum level exceeded")
        if not 0 <= i < 8:
            raise DomainError(f"child number {i} out of range for a hexahedron")
        h = length(e.level + 1)
        return Element(
            e.x + h * (i & 1), e.y + h * ((i >> 1) & 1), e.z + h * (i >> 2), e.level + 1, 0, -1
        )

    def children(self, e: Element) -> list[Element]:
        if e.level >= L_MAX:
            raise DomainError("maximum level exceeded")
        h = length(e.level + 1)
        x, y, z, lc = e.x, e.y, e.z, e.level + 1
        return [
            Element(x + a, y + b, z + c, lc, 0, -1)
            for c in (0, h) for b in (0, h) for a in (0, h)
        ]

    def parent(self, e: Element) -> Element:
        if e.level == 0:
            raise DomainError("the root has no parent")
        h = length(e.level)
        return Element(e.x & ~h, e.y & ~h, e.z & ~h, e.level - 1, 0, -1)

    def local_index(self, e: Element) -> int:
        if e.level == 0:
            raise DomainError("the root has no local index")
        return sfc.cube_id(e, e.level)

    def sfc_index(self, e: Element) -> int:
        return _spread3(e.x) | _spread3(e.y) << 1 | _spread3(e.z) << 2

    def linear_id(self, e: Element) -> int:
        return self.sfc_index(e) >> (3 * (L_MAX - e.level))

    def element_from_linear_id(self, level: int, lid: int) -> Element:
        if not 0 <= lid < 8**level:
            raise DomainError(f"linear id {lid} outside [0, {8**level})")
        x = y = z = 0
        for i in range(level):
            d = (lid >> (3 * i)) & 7
            x |= (d & 1) << i
            y |= ((d >> 1) & 1) << i
            z |= ((d >> 2) & 1) << i
        s = L_MAX - level
        return Element(x << s, y << s, z << s, level, 0, -1)

    def descendant_keys(self, e: Element) -> tuple[int, int]:
        lo = self.sfc_index(e)
        return lo, lo + 7 * _repunit(8, L_MAX - e.level)

    def is_ancestor(self, a: Element, d: Element) -> bool:
        if a.level > d.level:
            return False
        m = ~(length(a.level) - 1)
        return (d.x & m, d.y & m, d.z & m) == (a.x, a.y, a.z)

    def num_faces(self, e: Element) -> int:
        return 6

    def face_shape(self, e: Element, f: int) -> str:
        self._check_face(f)
        return QUAD

    def _check_face(self, f: int) -> None:
        if not 0 <= f < 6:
            raise DomainError(f"face {f} out of range for a hexahedron")

    def face_neighbor(self, e: Element, f: int) -> NeighborResult | None:
        self._check_face(f)
        a = [e.x, e.y, e.z]
        a[f >> 1] += length(e.level) if f & 1 else -length(e.level)
        if not 0 <= a[f >> 1] < ROOT_LEN:
            return None
        return NeighborResult(Element(a[0], a[1], a[2], e.level, 0, -1), f ^ 1)

    def root_face(self, e: Element, f: int) -> int | None:
        self._check_face(f)
        side = f & 1
        if (e.x, e.y, e.z)[f >> 1] + side * length(e.level) == side * ROOT_LEN:
            return f
        return None

    def collapse_to_face(self, e: Element, f: int) -> tuple[int, FaceElement]:
        g = self.root_face(e, f)
        if g is None:
            raise DomainError(f"face {f} of {e} is not on the root boundary")
        a = (e.x, e.y, e.z)
        i, j = self.FACE_AXES[g]
        return g, FaceElement(QUAD, a[i], a[j], e.level)

    def extrude_from_face(self, t: FaceElement, g: int) -> tuple[Element, int]:
        self._check_face(g)
        if t.shape != QUAD:
            raise DomainError(f"{t.shape} face element cannot lie on a hexahedron face")
        h = length(t.level)
        for c in (t.x, t.y):
            if not 0 <= c < ROOT_LEN or c % h:
                raise DomainError(f"face element coordinate {c} invalid at level {t.level}")
        a = [0, 0, 0]
        i, j = self.FACE_AXES[g]
        a[i], a[j] = t.x, t.y
        a[g >> 1] = ROOT_LEN - h if g & 1 else 0
        return Element(a[0], a[1], a[2], t.level, 0, -1), g

    def root_face_shape(self, g: int) -> str:
        return QUAD

    def face_axes(self, g: int) -> tuple[int, int]:
        return self.FACE_AXES[g]

    def children_at_face(self, e: Element, f: int) -> list[tuple[Element, int]]:
        self._check_face(f)
        axis, side = f >> 1, f & 1
        return [(self.child(e, c), f) for c in range(8) if (c >> axis) & 1 == side]

    def vertex_coords(self, e: Element) -> list[tuple[int, int, int]]:
        h = length(e.level)
        return [
            (e.x + h * (i & 1), e.y + h * ((i >> 1) & 1), e.z + h * (i >> 2)) for i in range(8)
        ]

    def face_corner_ids(self, e: Element, f: int) -> tuple[int, ...]:
        axis, side = f >> 1, f & 1
        return tuple(c for c in range(8) if (c >> axis) & 1 == side)

    def vtk_cell(self, e: Element) -> tuple[int, list[tuple[int, int, int]]]:
        v = self.vertex_coords(e)
        return tb.VTK_HEXAHEDRON, [v[i] for i in self.VTK_ORDER]


class _SimplexKernel(ElementKernel):
    """Shared part of the tetrahedral and pyramidal kernels (both use sfc.py)."""

    def check(self, e: Element) -> None:
        sfc.check_element(e)
        if sfc.root_of(e) != self.root:
            raise DomainError(f"{e} does not belong to a {self.shape.value} tree")

    def child(self, e: Element, i: int) -> Element:
        return sfc.child(e, i)

    def children(self, e: Element) -> list[Element]:
        return sfc.children(e)

    def num_children(self, e: Element) -> int:
        return sfc.num_children(e)

    def parent(self, e: Element) -> Element:
        return sfc.parent(e)

    def local_index(self, e: Element) -> int:
        return sfc.local_index(e)

    def sfc_index(self, e: Element) -> int:
        return sfc.sfc_index(e)

    def linear_id(self, e: Element) -> int:
        return sfc.linear_id(e)

    def element_from_linear_id(self, level: int, lid: int) -> Element:
        return sfc.element_from_linear_id(self.root, level, lid)

    def num_descendants_at_level(self, e: Element, level: int) -> int:
        return sfc.num_descendants_at_level(e, level)

    def is_family(self, elems: Sequence[Element]) -> bool:
        return sfc.is_family(elems)

    def is_ancestor(self, a: Element, d: Element) -> bool:
        return sfc.is_ancestor(a, d)

    def descendant_keys(self, e: Element) -> tuple[int, int]:
        # child 0 keeps anchor and type, the last child sits in cube 7 with the same type
        lo = sfc.sfc_index(e)
        r = _repunit(64, L_MAX - e.level)
        return lo + e.etype * r, lo + (56 + e.etype) * r

    def num_faces(self, e: Element) -> int:
        return sfc.num_faces(e)

    def face_shape(self, e: Element, f: int) -> str:
        return nb.face_shape(e, f)

    def vertex_coords(self, e: Element) -> list[tuple[int, int, int]]:
        return sfc.vertex_coords(e)

    def face_corner_ids(self, e: Element, f: int) -> tuple[int, ...]:
        return sfc.face_corners(e, f)

    def vtk_cell(self, e: Element) -> tuple[int, list[tuple[int, int, int]]]:
        v = sfc.vertex_coords(e)
        if e.etype >= 6:
            # base normal must point towards the apex
            if _signed_volume([v[0], v[1], v[2], v[4]]) < 0:
                v = [v[0], v[3], v[2], v[1], v[4]]
            return tb.VTK_PYRAMID, v
        if _signed_volume(v) < 0:
            v = [v[0], v[2], v[1], v[3]]
        return tb.VTK_TETRA, v


def _signed_volume(v: Sequence[tuple[int, int, int]]) -> int:
    a = [v[1][i] - v[0][i] for i in range(3)]
    b = [v[2][i] - v[0][i] for i in range(3)]
    c = [v[3][i] - v[0][i] for i in range(3)]
    return (
        a[0] * (b[1] * c[2] - b[2] * c[1])
        - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
    )


class PyramidKernel(_SimplexKernel):
    shape = TreeShape.PYRAMID
    root = sfc.PYRAMID_ROOT
    num_root_faces = 5
    vtk_type = tb.VTK_PYRAMID

    def num_descendants_at_level(self, e: Element, level: int) -> int:
        return sfc.num_descendants_at_level(e, level)

    def face_neighbor(self, e: Element, f: int) -> NeighborResult | None:
        return nb.face_neighbor_same_tree(e, f)

    def root_face(self, e: Element, f: int) -> int | None:
        nb._check_face(e, f)
        return nb.on_root_face(e, f)

    def collapse_to_face(self, e: Element, f: int) -> tuple[int, FaceElement]:
        return nb.collapse_to_face(e, f)

    def extrude_from_face(self, t: FaceElement, g: int) -> tuple[Element, int]:
        return nb.extrude_from_face(t, g)

    def root_face_shape(self, g: int) -> str:
        return QUAD if g == 4 else TRIANGLE

    def face_axes(self, g: int) -> tuple[int, int]:
        return tb.PYRA_BOUNDARY_AXES[g]


# (u, v) axes of the face element on each face of the root tetrahedron, chosen
# so that every root face maps onto the reference triangle (0,0), (L,0), (L,L)
TET_ROOT_AXES = ((2, 1), (0, 1), (0, 1), (0, 2))


def _triangle_type(v: Sequence[tuple[int, int, int]], anchor: Sequence[int], axes: tuple[int, int]) -> int:
    i, j = axes
    return 0 if all(p[i] - anchor[i] >= p[j] - anchor[j] for p in v) else 1


class TetKernel(_SimplexKernel):
    shape = TreeShape.TET
    root = sfc.TET_ROOT
    num_root_faces = 4
    vtk_type = tb.VTK_TETRA

    def __init__(self) -> None:
        # (root face, triangle type) -> (tet type, face); read off the level-1 children
        self._extrude: dict[tuple[int, int], tuple[int, int]] = {}
        for c in sfc.children(self.root):
            for f in range(4):
                g = self.root_face(c, f)
                if g is not None:
                    _, fe = self.collapse_to_face(c, f)
                    self._extrude[(g, fe.ftype)] = (c.etype, f)

    def face_neighbor(self, e: Element, f: int) -> NeighborResult | None:
        nb._check_face(e, f)
        if nb.on_root_face(e, f, self.root) is not None:
            return None
        return nb._kuhn_neighbor(e, f, pyramid_tree=False)

    def root_face(self, e: Element, f: int) -> int | None:
        nb._check_face(e, f)
        return nb.on_root_face(e, f, self.root)

    def collapse_to_face(self, e: Element, f: int) -> tuple[int, FaceElement]:
        g = self.root_face(e, f)
        if g is None:
            raise DomainError(f"face {f} of {e} is not on the root boundary")
        a = (e.x, e.y, e.z)
        axes = TET_ROOT_AXES[g]
        ftype = _triangle_type(self.face_vertices(e, f), a, axes)
        return g, FaceElement(TRIANGLE, a[axes[0]], a[axes[1]], e.level, ftype)

    def extrude_from_face(self, t: FaceElement, g: int) -> tuple[Element, int]:
        if not 0 <= g < 4:
            raise DomainError(f"root face {g} out of range")
        if t.shape != TRIANGLE:
            raise DomainError("a quadrilateral cannot lie on a tetrahedron face")
        nb._check_on_root_face(t, 0)
        i, j = TET_ROOT_AXES[g]
        a = [0, 0, 0]
        a[i], a[j] = t.x, t.y
        kind, p, q = tb.FACE_PLANE[0][g]
        if kind == tb.AXIS:
            a[p] = ROOT_LEN - length(t.level) if q else 0
        else:
            other, free = (p, q) if q not in (i, j) else (q, p)
            a[free] = a[other]
        etype, f = self._extrude[(g, t.ftype)]
        return Element(a[0], a[1], a[2], t.level, etype, 0), f

    def root_face_shape(self, g: int) -> str:
        return TRIANGLE

    def face_axes(self, g: int) -> tuple[int, int]:
        return TET_ROOT_AXES[g]


_KERNELS = {
    TreeShape.HEX: HexKernel(),
    TreeShape.TET: TetKernel(),
    TreeShape.PYRAMID: PyramidKernel(),
}


def shape_kernel(shape: TreeShape | str) -> ElementKernel:
    k = _KERNELS.get(shape)  # type: ignore[arg-type]
    return k if k is not None else _KERNELS[TreeShape(shape)]
