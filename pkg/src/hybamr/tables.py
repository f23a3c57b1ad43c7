"""Frozen lookup tables for pyramidal and tetrahedral refinement.

Conventions used throughout:

* cube id bits: bit 0 = x, bit 1 = y, bit 2 = z.
* tetrahedron of type ``t`` in a cube with anchor ``a`` and edge ``h`` has the
  vertices ``v0 = a``, ``v1 = v0 + h*e_i``, ``v2 = v1 + h*e_j``,
  ``v3 = a + (h, h, h)`` with ``i = t // 2`` and
  ``j = (i + (2 if t is even else 1)) % 3``; face ``f`` is opposite ``v_f``.
* pyramid of type 6 occupies ``{z <= min(x, y)}`` of its cube; type 7 is its
  180 degree rotation ``(x, y, z) -> (h - y, h - x, h - z)``.

Children are always addressed by their *local index*, i.e. their rank among
their siblings in SFC order. Tetrahedral tables were derived from Bey's red
refinement and are regenerated by ``tests/test_tables.py``.
"""

# -- pyramid refinement ------------------------------------------------------

# cube id of child i of a type-6 / type-7 pyramid; child number == local index
PYRA_CHILD_CID = {
    6: (0, 1, 1, 2, 2, 3, 3, 3, 3, 7),
    7: (0, 4, 4, 4, 4, 5, 5, 6, 6, 7),
}
PYRA_CHILD_TYPE = {
    6: (6, 3, 6, 0, 6, 0, 3, 6, 7, 6),
    7: (7, 0, 3, 6, 7, 3, 7, 0, 7, 7),
}

# (cube id, pyramid child type) -> parent type; inverse of the two tables above
PYRA_PARENT_TYPE = {
    (0, 6): 6, (1, 6): 6, (2, 6): 6, (3, 6): 6, (3, 7): 6, (7, 6): 6,
    (0, 7): 7, (4, 6): 7, (4, 7): 7, (5, 7): 7, (6, 7): 7, (7, 7): 7,
}

# (parent type, cube id, child type) -> local index
PYRA_LOCAL_INDEX = {
    (p, c, t): i
    for p in (6, 7)
    for i, (c, t) in enumerate(zip(PYRA_CHILD_CID[p], PYRA_CHILD_TYPE[p]))
}

# face of a tet child (by local index) that does not touch a pyramidal sibling
TET_NONVALID_FACE = {
    6: {1: 1, 3: 1, 5: 0, 6: 0},
    7: {1: 3, 2: 3, 5: 2, 7: 2},
}

# -- pyramid face neighbors --------------------------------------------------

PYRA_NEIGH_TYPE = {6: (3, 3, 0, 0, 7), 7: (3, 3, 0, 0, 6)}

# anchor shift in units of the element length, per face
PYRA_NEIGH_SHIFT = {
    6: ((0, 0, 0), (1, 0, 0), (0, 0, 0), (0, 1, 0), (0, 0, -1)),
    7: ((0, 0, 0), (0, -1, 0), (0, 0, 0), (-1, 0, 0), (0, 0, 1)),
}

# (dual) face number of the neighbor, per element type and face
DUAL_FACE = {
    0: (3, 2, 2, 3),
    3: (1, 0, 0, 1),
    6: (2, 3, 2, 3, 4),
    7: (1, 0, 1, 0, 4),
}

# tet (type 0 or 3) next to a pyramid: anchor shift and pyramid type per face
TET_TO_PYRA_SHIFT = {
    0: ((1, 0, 0), (0, 0, 0), (0, 0, 0), (0, -1, 0)),
    3: ((0, 1, 0), (0, 0, 0), (0, 0, 0), (-1, 0, 0)),
}
TET_TO_PYRA_TYPE = (7, 7, 6, 6)

# corner children of a tetrahedron (Bey numbers) touching face f
TET_CHILDREN_TOUCHING_FACE = ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2))

# -- root pyramid boundary ---------------------------------------------------

# which element coordinates become the face element's (x, y) on root face g
PYRA_BOUNDARY_AXES = ((1, 2), (1, 2), (0, 2), (0, 2), (0, 1))

# extrusion of a triangle to a tetrahedron: [triangle type][root face]
BOUNDARY_TO_TET_TYPE = ((2, 1, 1, 2), (0, 0, 3, 3))
BOUNDARY_TO_TET_FACE = ((2, 0, 2, 0), (1, 0, 1, 0))

# -- tetrahedral (Bey) refinement, indexed by local index --------------------

TET_CHILD_CID = (
    (0, 1, 1, 1, 5, 5, 5, 7),
    (0, 1, 1, 1, 3, 3, 3, 7),
    (0, 2, 2, 2, 3, 3, 3, 7),
    (0, 2, 2, 2, 6, 6, 6, 7),
    (0, 4, 4, 4, 6, 6, 6, 7),
    (0, 4, 4, 4, 5, 5, 5, 7),
)
TET_CHILD_TYPE = (
    (0, 0, 4, 5, 0, 1, 2, 0),
    (1, 1, 2, 3, 0, 1, 5, 1),
    (2, 0, 1, 2, 2, 3, 4, 2),
    (3, 3, 4, 5, 1, 2, 3, 3),
    (4, 2, 3, 4, 0, 4, 5, 4),
    (5, 0, 1, 5, 3, 4, 5, 5),
)
# Bey child number of each local index
TET_CHILD_BEY = (
    (0, 1, 4, 5, 2, 7, 6, 3),
    (0, 1, 5, 4, 7, 2, 6, 3),
    (0, 4, 5, 1, 2, 7, 6, 3),
    (0, 1, 5, 4, 6, 7, 2, 3),
    (0, 4, 5, 1, 6, 2, 7, 3),
    (0, 5, 4, 1, 6, 7, 2, 3),
)
# [cube id][type] -> parent type / local index / Bey number
TET_PARENT_TYPE = (
    (0, 1, 2, 3, 4, 5),
    (0, 1, 1, 1, 0, 0),
    (2, 2, 2, 3, 3, 3),
    (1, 1, 2, 2, 2, 1),
    (5, 5, 4, 4, 4, 5),
    (0, 0, 0, 5, 5, 5),
    (4, 3, 3, 3, 4, 4),
    (0, 1, 2, 3, 4, 5),
)
TET_LOCAL_INDEX = (
    (0, 0, 0, 0, 0, 0),
    (1, 1, 2, 3, 2, 3),
    (1, 2, 3, 1, 2, 3),
    (4, 5, 4, 5, 6, 6),
    (1, 2, 1, 2, 3, 3),
    (4, 5, 6, 4, 5, 6),
    (4, 4, 5, 6, 5, 6),
    (7, 7, 7, 7, 7, 7),
)
TET_BEY_NUMBER = (
    (0, 0, 0, 0, 0, 0),
    (1, 1, 5, 4, 4, 5),
    (4, 5, 1, 1, 5, 4),
    (7, 2, 2, 7, 6, 6),
    (5, 4, 4, 5, 1, 1),
    (2, 7, 6, 6, 7, 2),
    (6, 6, 7, 2, 2, 7),
    (3, 3, 3, 3, 3, 3),
)

# same-level neighbor in the Kuhn triangulation: (dx, dy, dz, type, dual face)
TET_FACE_NEIGHBOR = (
    ((1, 0, 0, 4, 3), (0, 0, 0, 5, 1), (0, 0, 0, 1, 2), (0, -1, 0, 2, 0)),
    ((1, 0, 0, 3, 3), (0, 0, 0, 2, 1), (0, 0, 0, 0, 2), (0, 0, -1, 5, 0)),
    ((0, 1, 0, 0, 3), (0, 0, 0, 1, 1), (0, 0, 0, 3, 2), (0, 0, -1, 4, 0)),
    ((0, 1, 0, 5, 3), (0, 0, 0, 4, 1), (0, 0, 0, 2, 2), (-1, 0, 0, 1, 0)),
    ((0, 0, 1, 2, 3), (0, 0, 0, 3, 1), (0, 0, 0, 5, 2), (-1, 0, 0, 0, 0)),
    ((0, 0, 1, 1, 3), (0, 0, 0, 0, 1), (0, 0, 0, 4, 2), (0, -1, 0, 3, 0)),
)

# -- face planes -------------------------------------------------------------
# (AXIS, axis, side): face lies in x_axis = anchor + side*h
# (DIAG, i, j):       face lies in x_i - x_j = anchor_i - anchor_j
AXIS = 0
DIAG = 1

FACE_PLANE = (
    ((AXIS, 0, 1), (DIAG, 0, 2), (DIAG, 1, 2), (AXIS, 1, 0)),
    ((AXIS, 0, 1), (DIAG, 0, 1), (DIAG, 1, 2), (AXIS, 2, 0)),
    ((AXIS, 1, 1), (DIAG, 0, 1), (DIAG, 0, 2), (AXIS, 2, 0)),
    ((AXIS, 1, 1), (DIAG, 1, 2), (DIAG, 0, 2), (AXIS, 0, 0)),
    ((AXIS, 2, 1), (DIAG, 1, 2), (DIAG, 0, 1), (AXIS, 0, 0)),
    ((AXIS, 2, 1), (DIAG, 0, 2), (DIAG, 0, 1), (AXIS, 1, 0)),
    ((DIAG, 0, 2), (AXIS, 0, 1), (DIAG, 1, 2), (AXIS, 1, 1), (AXIS, 2, 0)),
    ((DIAG, 1, 2), (AXIS, 1, 0), (DIAG, 0, 2), (AXIS, 0, 0), (AXIS, 2, 1)),
)

# children (local index, child face) whose face lies on face f of the parent
CHILDREN_AT_FACE = (
    (((1, 0), (4, 0), (5, 0), (7, 0)), ((0, 1), (4, 1), (6, 2), (7, 1)),
     ((0, 2), (1, 2), (2, 1), (7, 2)), ((0, 3), (1, 3), (3, 3), (4, 3))),
    (((1, 0), (4, 0), (5, 0), (7, 0)), ((0, 1), (5, 1), (6, 2), (7, 1)),
     ((0, 2), (1, 2), (3, 1), (7, 2)), ((0, 3), (1, 3), (2, 3), (5, 3))),
    (((3, 0), (4, 0), (5, 0), (7, 0)), ((0, 1), (4, 1), (6, 2), (7, 1)),
     ((0, 2), (1, 1), (3, 2), (7, 2)), ((0, 3), (2, 3), (3, 3), (4, 3))),
    (((1, 0), (5, 0), (6, 0), (7, 0)), ((0, 1), (4, 2), (6, 1), (7, 1)),
     ((0, 2), (1, 2), (3, 1), (7, 2)), ((0, 3), (1, 3), (2, 3), (6, 3))),
    (((3, 0), (5, 0), (6, 0), (7, 0)), ((0, 1), (4, 2), (5, 1), (7, 1)),
     ((0, 2), (1, 1), (3, 2), (7, 2)), ((0, 3), (2, 3), (3, 3), (5, 3))),
    (((3, 0), (5, 0), (6, 0), (7, 0)), ((0, 1), (4, 2), (6, 1), (7, 1)),
     ((0, 2), (2, 1), (3, 2), (7, 2)), ((0, 3), (1, 3), (3, 3), (6, 3))),
    (((0, 0), (3, 1), (4, 0), (9, 0)), ((2, 1), (5, 0), (7, 1), (9, 1)),
     ((0, 2), (1, 1), (2, 2), (9, 2)), ((4, 3), (6, 0), (7, 3), (9, 3)),
     ((0, 4), (2, 4), (4, 4), (7, 4))),
    (((0, 0), (7, 2), (8, 0), (9, 0)), ((0, 1), (1, 3), (4, 1), (6, 1)),
     ((0, 2), (5, 2), (6, 2), (9, 2)), ((0, 3), (2, 3), (4, 3), (8, 3)),
     ((4, 4), (6, 4), (8, 4), (9, 4))),
)

# VTK legacy cell type ids
VTK_TETRA = 10
VTK_HEXAHEDRON = 12
VTK_PYRAMID = 14
