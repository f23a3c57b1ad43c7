"""Element arithmetic inside pyramidal (and pure tetrahedral) refinement trees.

An element is identified by the anchor of its enclosing sub-cube, its level
and its type. Types 0-5 are tetrahedra, 6 and 7 pyramids. Tetrahedra also
carry ``mtl``, the lowest level at which one of their ancestors is a
tetrahedron; pyramids store -1. Pure tetrahedral trees use ``mtl = 0``.

Every function here is pure; elements are immutable tuples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

from . import tables as tb

L_MAX = 21
ROOT_LEN = 1 << L_MAX


class DomainError(ValueError):
    """An element operation was called outside its domain."""


class Element(NamedTuple):
    x: int
    y: int
    z: int
    level: int
    etype: int
    mtl: int = -1

    @property
    def anchor(self) -> tuple[int, int, int]:
        return (self.x, self.y, self.z)

    @property
    def is_pyramid(self) -> bool:
        return self.etype >= 6


PYRAMID_ROOT = Element(0, 0, 0, 0, 6, -1)
TET_ROOT = Element(0, 0, 0, 0, 0, 0)


@dataclass(frozen=True)
class TypeTuples:
    """Ancestor types of an element, most significant entry first.

    ``b[k]`` is the type of the ancestor at level ``k + 1`` (the tuple entry
    ``b_{L-1-k}``); ``b2/b1/b0`` are its bit planes.
    """

    b: tuple[int, ...]
    b2: tuple[int, ...]
    b1: tuple[int, ...]
    b0: tuple[int, ...]


def length(level: int) -> int:
    """Edge length of the enclosing cube of a level-``level`` element."""
    return 1 << (L_MAX - level)


def root_of(e: Element) -> Element:
    if e.etype >= 6 or e.mtl > 0:
        return PYRAMID_ROOT
    return TET_ROOT


def check_element(e: Element) -> None:
    """Raise DomainError unless ``e`` satisfies the element invariants."""
    if not 0 <= e.level <= L_MAX:
        raise DomainError(f"level {e.level} outside [0, {L_MAX}]")
    if not 0 <= e.etype <= 7:
        raise DomainError(f"type {e.etype} outside [0, 7]")
    low = length(e.level) - 1
    for c in (e.x, e.y, e.z):
        if not 0 <= c < ROOT_LEN or c & low:
            raise DomainError(f"coordinate {c} not aligned to level {e.level}")
    if e.etype >= 6 and e.mtl != -1:
        raise DomainError("pyramids carry min_tet_level -1")
    if e.etype < 6 and not 0 <= e.mtl <= e.level:
        raise DomainError(f"min_tet_level {e.mtl} invalid at level {e.level}")


def cube_id(e: Element, j: int) -> int:
    """Position (x = bit 0, y = bit 1, z = bit 2) of the level-j sub-cube in its parent cube."""
    if not 0 <= j <= e.level:
        raise DomainError(f"cube id level {j} outside [0, {e.level}]")
    if j == 0:
        return 0
    s = L_MAX - j
    return ((e.x >> s) & 1) | (((e.y >> s) & 1) << 1) | (((e.z >> s) & 1) << 2)


def num_children(e: Element) -> int:
    return 10 if e.etype >= 6 else 8


def num_faces(e: Element) -> int:
    return 5 if e.etype >= 6 else 4


def child(e: Element, i: int) -> Element:
    """The child of ``e`` with local (SFC) index ``i``."""
    x, y, z, level, t, mtl = e
    if level >= L_MAX:
        raise DomainError("maximum level exceeded")
    h = 1 << (L_MAX - level - 1)
    if t >= 6:
        if not 0 <= i < 10:
            raise DomainError(f"child number {i} out of range for a pyramid")
        cid = tb.PYRA_CHILD_CID[t][i]
        ct = tb.PYRA_CHILD_TYPE[t][i]
        cm = -1 if ct >= 6 else level + 1
    else:
        if not 0 <= i < 8:
            raise DomainError(f"child number {i} out of range for a tetrahedron")
        cid = tb.TET_CHILD_CID[t][i]
        ct = tb.TET_CHILD_TYPE[t][i]
        cm = mtl
    return Element(
        x + h if cid & 1 else x,
        y + h if cid & 2 else y,
        z + h if cid & 4 else z,
        level + 1,
        ct,
        cm,
    )


# per type: (x bit, y bit, z bit, child type) of every child in SFC order
_CHILD_STEPS = {
    t: tuple(
        (c & 1, (c >> 1) & 1, c >> 2, ct)
        for c, ct in zip(
            tb.PYRA_CHILD_CID[t] if t >= 6 else tb.TET_CHILD_CID[t],
            tb.PYRA_CHILD_TYPE[t] if t >= 6 else tb.TET_CHILD_TYPE[t],
        )
    )
    for t in range(8)
}


def children(e: Element) -> list[Element]:
    """All children in SFC order (same as ``child(e, i)`` for every i, but faster)."""
    x, y, z, level, t, mtl = e
    if level >= L_MAX:
        raise DomainError("maximum level exceeded")
    h = 1 << (L_MAX - level - 1)
    lc = level + 1
    if t >= 6:
        return [
            Element(x + h * a, y + h * b, z + h * c, lc, ct, -1 if ct >= 6 else lc)
            for a, b, c, ct in _CHILD_STEPS[t]
        ]
    return [Element(x + h * a, y + h * b, z + h * c, lc, ct, mtl) for a, b, c, ct in _CHILD_STEPS[t]]


def _parent_type(t: int, mtl: int, level: int, cid: int) -> int:
    if t >= 6:
        return tb.PYRA_PARENT_TYPE[(cid, t)]
    if mtl == level:
        return 7 if cid & 4 else 6
    return tb.TET_PARENT_TYPE[cid][t]


def parent(e: Element) -> Element:
    x, y, z, level, t, mtl = e
    if level == 0:
        raise DomainError("the root has no parent")
    h = 1 << (L_MAX - level)
    cid = cube_id(e, level)
    pt = _parent_type(t, mtl, level, cid)
    pm = -1 if pt >= 6 else mtl
    return Element(x & ~h, y & ~h, z & ~h, level - 1, pt, pm)


def ancestor(e: Element, level: int) -> Element:
    if not 0 <= level <= e.level:
        raise DomainError(f"ancestor level {level} outside [0, {e.level}]")
    while e.level > level:
        e = parent(e)
    return e


def local_index(e: Element) -> int:
    """Rank of ``e`` among its siblings in SFC order."""
    if e.level == 0:
        raise DomainError("the root has no local index")
    cid = cube_id(e, e.level)
    t = e.etype
    if t >= 6:
        return tb.PYRA_LOCAL_INDEX[(tb.PYRA_PARENT_TYPE[(cid, t)], cid, t)]
    if e.mtl == e.level:
        return tb.PYRA_LOCAL_INDEX[(7 if cid & 4 else 6, cid, t)]
    return tb.TET_LOCAL_INDEX[cid][t]


def ancestor_types(e: Element) -> list[int]:
    """Types of the ancestors at levels 1..e.level (the last one is e's own type)."""
    x, y, z, level, t, mtl = e
    out = [0] * level
    for lvl in range(level, 0, -1):
        out[lvl - 1] = t
        s = L_MAX - lvl
        cid = ((x >> s) & 1) | (((y >> s) & 1) << 1) | (((z >> s) & 1) << 2)
        t = _parent_type(t, mtl, lvl, cid)
        if t >= 6:
            mtl = -1
    return out


def type_tuples(e: Element) -> TypeTuples:
    b = tuple(ancestor_types(e)) + (0,) * (L_MAX - e.level)
    return TypeTuples(
        b=b,
        b2=tuple((v >> 2) & 1 for v in b),
        b1=tuple((v >> 1) & 1 for v in b),
        b0=tuple(v & 1 for v in b),
    )


def sfc_index(e: Element) -> int:
    """Pyramid index: per level the 6-bit digit (z, y, x, b2, b1, b0), coarsest level first."""
    x, y, z, level, t, mtl = e
    idx = 0
    for lvl in range(level, 0, -1):
        s = L_MAX - lvl
        cid = ((x >> s) & 1) | (((y >> s) & 1) << 1) | (((z >> s) & 1) << 2)
        idx |= ((cid << 3) | t) << (6 * s)
        t = _parent_type(t, mtl, lvl, cid)
        if t >= 6:
            mtl = -1
    return idx


def morton_interleave(coords: Sequence[int], bits: int = L_MAX) -> int:
    """Bit-interleave ``coords``; the first coordinate is the most significant in each digit."""
    n = len(coords)
    out = 0
    for i in range(bits - 1, -1, -1):
        for c in coords:
            out = (out << 1) | ((c >> i) & 1)
    return out


def theta(e: Element) -> tuple[tuple[int, int, int, int, int, int], int]:
    """Anchor and level of the 6D cube ``e`` embeds into: (B2, B1, B0, x, y, z)."""
    tt = type_tuples(e)

    def as_int(bits: tuple[int, ...]) -> int:
        v = 0
        for b in bits:
            v = (v << 1) | b
        return v

    return (as_int(tt.b2), as_int(tt.b1), as_int(tt.b0), e.x, e.y, e.z), e.level


def theta_index(e: Element) -> int:
    """Morton index of the 6D cube, interleaved in the order z, y, x, B2, B1, B0."""
    (b2, b1, b0, x, y, z), _ = theta(e)
    return morton_interleave((z, y, x, b2, b1, b0))


def sort_key(e: Element) -> tuple[int, int]:
    return (sfc_index(e), e.level)


def compare(a: Element, b: Element) -> int:
    ka, kb = sort_key(a), sort_key(b)
    return (ka > kb) - (ka < kb)


def is_ancestor(a: Element, d: Element) -> bool:
    """True iff ``a`` is ``d`` or one of its ancestors (reflexive)."""
    if a.level > d.level:
        return False
    return ancestor(d, a.level) == a


def theta_contains(a: Element, d: Element) -> bool:
    """6D cube containment of Theta(d) in Theta(a)."""
    if a.level > d.level:
        return False
    ca, _ = theta(a)
    cd, _ = theta(d)
    s = L_MAX - a.level
    return all((p >> s) == (q >> s) for p, q in zip(ca, cd))


def pyramid_count(d: int) -> int:
    """Number of level-d descendants of a pyramid."""
    return 2 * 8**d - 6**d


def num_descendants_at_level(e: Element, level: int) -> int:
    if level < e.level:
        raise DomainError(f"level {level} is coarser than the element level {e.level}")
    d = level - e.level
    return pyramid_count(d) if e.etype >= 6 else 8**d


# number of pyramidal / tetrahedral siblings preceding each local index
_PYR_BEFORE = {
    p: tuple(sum(1 for t in tb.PYRA_CHILD_TYPE[p][:k] if t >= 6) for k in range(11))
    for p in (6, 7)
}


def _siblings_before(ptype: int, k: int, d: int) -> int:
    """Level-(child level + d) descendants of the first k children of a parent of type ptype."""
    if ptype >= 6:
        npyr = _PYR_BEFORE[ptype][k]
        return npyr * pyramid_count(d) + (k - npyr) * 8**d
    return k * 8**d


def linear_id(e: Element) -> int:
    """Rank of ``e`` among all elements of its level in its tree."""
    lid = 0
    level = e.level
    cur = e
    while cur.level > 0:
        k = local_index(cur)
        p = parent(cur)
        lid += _siblings_before(p.etype, k, level - cur.level)
        cur = p
    return lid


def element_from_linear_id(root: Element, level: int, lid: int) -> Element:
    """Inverse of ``linear_id`` for the tree rooted at ``root``."""
    total = num_descendants_at_level(root, level)
    if not 0 <= lid < total:
        raise DomainError(f"linear id {lid} outside [0, {total})")
    e = root
    while e.level < level:
        d = level - e.level - 1
        for i in range(num_children(e)):
            c = child(e, i)
            n = num_descendants_at_level(c, level)
            if lid < n:
                e = c
                break
            lid -= n
    return e


def first_descendant(e: Element, level: int) -> Element:
    if level < e.level:
        raise DomainError("descendant level coarser than element")
    while e.level < level:
        e = child(e, 0)
    return e


def last_descendant(e: Element, level: int) -> Element:
    if level < e.level:
        raise DomainError("descendant level coarser than element")
    while e.level < level:
        e = child(e, num_children(e) - 1)
    return e


def successor(e: Element) -> Element:
    """The next element of the same level in SFC order."""
    root = root_of(e)
    lid = linear_id(e) + 1
    if lid >= num_descendants_at_level(root, e.level):
        raise DomainError("the last element of a level has no successor")
    return element_from_linear_id(root, e.level, lid)


def is_family(siblings: Sequence[Element]) -> bool:
    """True iff ``siblings`` are exactly the children of one parent, in SFC order."""
    if not siblings or siblings[0].level == 0:
        return False
    p = parent(siblings[0])
    if len(siblings) != num_children(p):
        return False
    return list(siblings) == children(p)


def vertex_coords(e: Element) -> list[tuple[int, int, int]]:
    """Corner coordinates C0..C4 (pyramid) or v0..v3 (tetrahedron)."""
    x, y, z = e.x, e.y, e.z
    h = length(e.level)
    t = e.etype
    if t == 6:
        return [(x, y, z), (x + h, y, z), (x + h, y + h, z), (x, y + h, z), (x + h, y + h, z + h)]
    if t == 7:
        return [(x + h, y + h, z + h), (x + h, y, z + h), (x, y, z + h), (x, y + h, z + h), (x, y, z)]
    ei = t // 2
    ej = (ei + (2 if t % 2 == 0 else 1)) % 3
    v1 = [x, y, z]
    v1[ei] += h
    v2 = list(v1)
    v2[ej] += h
    return [(x, y, z), tuple(v1), tuple(v2), (x + h, y + h, z + h)]


PYRAMID_FACE_CORNERS = ((0, 3, 4), (1, 2, 4), (0, 1, 4), (2, 3, 4), (0, 1, 2, 3))
TET_FACE_CORNERS = ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2))


def face_corners(e: Element, f: int) -> tuple[int, ...]:
    if e.etype >= 6:
        return PYRAMID_FACE_CORNERS[f]
    return TET_FACE_CORNERS[f]
