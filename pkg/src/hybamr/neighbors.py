"""Face arithmetic inside a pyramidal tree and across its root boundary."""

from __future__ import annotations

from typing import NamedTuple

from . import tables as tb
from .sfc import (
    L_MAX,
    PYRAMID_ROOT,
    ROOT_LEN,
    DomainError,
    Element,
    ancestor,
    cube_id,
    length,
    local_index,
)

TRIANGLE = "triangle"
QUAD = "quad"


class FaceElement(NamedTuple):
    shape: str
    x: int
    y: int
    level: int
    ftype: int = -1  # quads have no type


class NeighborResult(NamedTuple):
    neighbor: Element
    dual_face: int
    same_tree: bool = True


def _check_face(e: Element, f: int) -> None:
    n = 5 if e.etype >= 6 else 4
    if not 0 <= f < n:
        raise DomainError(f"face {f} out of range for type {e.etype}")


def face_shape(e: Element, f: int) -> str:
    _check_face(e, f)
    return QUAD if e.etype >= 6 and f == 4 else TRIANGLE


def on_root_face(e: Element, f: int, root: Element = PYRAMID_ROOT) -> int | None:
    """Root face that face ``f`` of ``e`` lies on, or None for interior faces."""
    kind, i, j = tb.FACE_PLANE[e.etype][f]
    a = (e.x, e.y, e.z)
    for g, (rk, ri, rj) in enumerate(tb.FACE_PLANE[root.etype]):
        if rk != kind or ri != i:
            continue
        if kind == tb.AXIS:
            if a[i] + j * length(e.level) == rj * ROOT_LEN:
                return g
        elif rj == j and a[i] == a[j]:
            return g
    return None


def kuhn_min_tet_level(x: int, y: int, z: int, level: int, t: int) -> int:
    """min_tet_level of tetrahedron (x, y, z, level, t) inside the pyramid root.

    Walks the Kuhn ancestors; a type-6 pyramid covers Kuhn types 1 and 2 of its
    cube and a type-7 pyramid types 4 and 5, so the first tetrahedral ancestor
    is the coarsest one of Kuhn type 0 or 3.
    """
    mtl = level
    for lvl in range(level, 0, -1):
        if t == 0 or t == 3:
            mtl = lvl
        s = L_MAX - lvl
        cid = ((x >> s) & 1) | (((y >> s) & 1) << 1) | (((z >> s) & 1) << 2)
        t = tb.TET_PARENT_TYPE[cid][t]
    return mtl


def _pyra_parent_type_of_tet(a: Element) -> int:
    return 7 if cube_id(a, a.level) & 4 else 6


def tet_touches_pyramid(t: Element, f: int) -> bool:
    """Whether the same-level neighbor of tet ``t`` (type 0 or 3) across ``f`` is a pyramid."""
    if t.etype not in (0, 3):
        raise DomainError(f"pyramid touch test needs a type 0 or 3 tetrahedron, got {t.etype}")
    if t.mtl < 1:
        raise DomainError("tetrahedron does not descend from a pyramid")
    _check_face(t, f)
    a = t if t.level == t.mtl else ancestor(t, t.mtl)
    if tb.TET_NONVALID_FACE[_pyra_parent_type_of_tet(a)][local_index(a)] == f:
        return False
    typ = t.etype
    touching = tb.TET_CHILDREN_TOUCHING_FACE[f]
    for lvl in range(t.level, a.level, -1):
        cid = cube_id(t, lvl)
        if tb.TET_BEY_NUMBER[cid][typ] not in touching:
            return False
        typ = tb.TET_PARENT_TYPE[cid][typ]
    return True


def _kuhn_neighbor(e: Element, f: int, pyramid_tree: bool) -> NeighborResult:
    dx, dy, dz, nt, dual = tb.TET_FACE_NEIGHBOR[e.etype][f]
    h = length(e.level)
    x, y, z = e.x + dx * h, e.y + dy * h, e.z + dz * h
    mtl = kuhn_min_tet_level(x, y, z, e.level, nt) if pyramid_tree else e.mtl
    return NeighborResult(Element(x, y, z, e.level, nt, mtl), dual)


def face_neighbor_same_tree(e: Element, f: int) -> NeighborResult | None:
    """Same-level neighbor inside the pyramidal tree, or None on the root boundary."""
    _check_face(e, f)
    if on_root_face(e, f) is not None:
        return None
    h = length(e.level)
    t = e.etype
    if t >= 6:
        nt = tb.PYRA_NEIGH_TYPE[t][f]
        sx, sy, sz = tb.PYRA_NEIGH_SHIFT[t][f]
        x, y, z = e.x + sx * h, e.y + sy * h, e.z + sz * h
        mtl = -1 if nt >= 6 else kuhn_min_tet_level(x, y, z, e.level, nt)
        return NeighborResult(Element(x, y, z, e.level, nt, mtl), tb.DUAL_FACE[t][f])
    if t in (0, 3) and tet_touches_pyramid(e, f):
        sx, sy, sz = tb.TET_TO_PYRA_SHIFT[t][f]
        n = Element(e.x + sx * h, e.y + sy * h, e.z + sz * h, e.level, tb.TET_TO_PYRA_TYPE[f], -1)
        return NeighborResult(n, tb.DUAL_FACE[t][f])
    return _kuhn_neighbor(e, f, pyramid_tree=True)


def collapse_to_face(e: Element, f: int) -> tuple[int, FaceElement]:
    """Collapse ``e`` onto the root face its face ``f`` lies on; returns (root face, face element)."""
    _check_face(e, f)
    g = on_root_face(e, f)
    if g is None:
        raise DomainError(f"face {f} of {e} is not on the root boundary")
    a = (e.x, e.y, e.z)
    i, j = tb.PYRA_BOUNDARY_AXES[g]
    if g == 4:
        return g, FaceElement(QUAD, a[i], a[j], e.level)
    ftype = 1 if e.etype in (0, 3) else 0
    return g, FaceElement(TRIANGLE, a[i], a[j], e.level, ftype)


def _check_on_root_face(t: FaceElement, g: int) -> None:
    if not 0 <= g < 5:
        raise DomainError(f"root face {g} out of range")
    if (t.shape == QUAD) != (g == 4):
        raise DomainError(f"{t.shape} face element cannot lie on root face {g}")
    h = length(t.level)
    for c in (t.x, t.y):
        if not 0 <= c < ROOT_LEN or c % h:
            raise DomainError(f"face element coordinate {c} invalid at level {t.level}")
    if t.shape == TRIANGLE:
        if t.ftype not in (0, 1):
            raise DomainError(f"triangle type {t.ftype} invalid")
        if t.y > t.x or (t.ftype == 1 and t.y == t.x):
            raise DomainError(f"triangle {t} is not on root face {g}")


def extrude_from_face(t: FaceElement, g: int) -> tuple[Element, int]:
    """Element of the pyramidal tree whose face on root face ``g`` is ``t``; returns (element, face)."""
    _check_on_root_face(t, g)
    if g == 4:
        return Element(t.x, t.y, 0, t.level, 6, -1), 4
    far = ROOT_LEN - length(t.level)
    if g == 0:
        x, y, z = t.y, t.x, t.y
    elif g == 1:
        x, y, z = far, t.x, t.y
    elif g == 2:
        x, y, z = t.x, t.y, t.y
    else:
        x, y, z = t.x, far, t.y
    if t.ftype == 0 and t.y == (t.x & t.y):
        return Element(x, y, z, t.level, 6, -1), g
    nt = tb.BOUNDARY_TO_TET_TYPE[t.ftype][g]
    mtl = kuhn_min_tet_level(x, y, z, t.level, nt)
    return Element(x, y, z, t.level, nt, mtl), tb.BOUNDARY_TO_TET_FACE[t.ftype][g]
