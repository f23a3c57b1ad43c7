import itertools

import pytest
from hypothesis import given, settings

from hybamr.elements import TreeShape, shape_kernel
from hybamr.oracle import geometric_neighbor, geometric_root_face
from hybamr.sfc import L_MAX, ROOT_LEN, DomainError, Element
from strategies import elements

SHAPES = list(TreeShape)


def test_shape_kernel_lookup():
    for s in SHAPES:
        assert shape_kernel(s).shape is s
        assert shape_kernel(s.value) is shape_kernel(s)
    with pytest.raises(ValueError):
        shape_kernel("prism")


@pytest.mark.parametrize(
    "shape,counts",
    [
        (TreeShape.HEX, [1, 8, 64, 512]),
        (TreeShape.TET, [1, 8, 64, 512]),
        (TreeShape.PYRAMID, [1, 10, 92, 808]),
    ],
)
def test_leaf_counts(shape, counts, trees3):
    k = shape_kernel(shape)
    assert [k.num_descendants_at_level(k.root, lvl) for lvl in range(4)] == counts
    assert trees3[shape].leaf_counts() == counts


@pytest.mark.parametrize("shape", SHAPES)
def test_successor_walk(shape):
    k = shape_kernel(shape)
    for lvl in range(5):
        e = k.first_descendant(k.root, lvl)
        seen = [e]
        while True:
            try:
                e = k.successor(e)
            except DomainError:
                break
            seen.append(e)
        keys = [k.sfc_index(x) for x in seen]
        assert len(seen) == k.num_descendants_at_level(k.root, lvl)
        assert all(a < b for a, b in zip(keys, keys[1:]))
        assert seen[-1] == k.last_descendant(k.root, lvl)


@pytest.mark.parametrize("shape", SHAPES)
def test_round_trips(shape, trees3):
    k = shape_kernel(shape)
    tree = trees3[shape]
    for lvl, elems in enumerate(tree.levels):
        for i, e in enumerate(elems):
            assert k.linear_id(e) == i
            assert k.element_from_linear_id(lvl, i) == e
            if lvl:
                assert k.children(k.parent(e))[k.local_index(e)] == e
    for e in itertools.chain(*tree.levels):
        assert k.children(e) == [k.child(e, i) for i in range(k.num_children(e))]
        assert k.is_family(k.children(e))


@pytest.mark.parametrize("shape", SHAPES)
def test_sfc_axioms(shape, trees3):
    k = shape_kernel(shape)
    tree = trees3[shape]
    for lvl in tree.levels:
        assert len({k.sfc_index(e) for e in lvl}) == len(lvl)
    for c, p in tree.parent.items():
        assert k.sfc_index(p) <= k.sfc_index(c)
        assert k.is_ancestor(p, c) and not k.is_ancestor(c, p)


@pytest.mark.parametrize("shape", SHAPES)
def test_descendant_keys_bound_descendants(shape, trees3):
    k = shape_kernel(shape)
    tree = trees3[shape]
    finest = tree.levels[-1]
    for e in itertools.chain(*tree.levels[:3]):
        lo, hi = k.descendant_keys(e)
        inside = [d for d in finest if lo <= k.descendant_keys(d)[0] <= hi]
        assert inside == [d for d in finest if k.is_ancestor(e, d)]
        assert lo == k.sfc_index(k.first_descendant(e, L_MAX))
        assert hi == k.sfc_index(k.last_descendant(e, L_MAX))


@pytest.mark.parametrize("shape", SHAPES)
def test_neighbors_match_geometric_oracle(shape, trees3):
    k = shape_kernel(shape)
    tree = trees3[shape]
    for lvl in tree.levels:
        for e in lvl:
            for f in range(k.num_faces(e)):
                got = k.face_neighbor(e, f)
                want = geometric_neighbor(tree, e, f)
                if want is None:
                    assert got is None
                    assert k.root_face(e, f) == geometric_root_face(k, k.face_vertices(e, f)) is not None
                else:
                    assert (got.neighbor, got.dual_face) == want
                    assert k.root_face(e, f) is None


@pytest.mark.parametrize("shape", SHAPES)
def test_collapse_extrude_round_trip(shape, trees3):
    k = shape_kernel(shape)
    for e in trees3[shape].all_elements():
        for f in range(k.num_faces(e)):
            g = k.root_face(e, f)
            if g is None:
                with pytest.raises(DomainError):
                    k.collapse_to_face(e, f)
                continue
            g2, fe = k.collapse_to_face(e, f)
            assert g2 == g
            assert fe.shape == k.root_face_shape(g)
            assert k.extrude_from_face(fe, g) == (e, f)


@pytest.mark.parametrize("shape", SHAPES)
def test_children_at_face_cover_the_face(shape, trees3):
    k = shape_kernel(shape)
    for e in itertools.chain(*trees3[shape].levels[:2]):
        for f in range(k.num_faces(e)):
            kids = k.children_at_face(e, f)
            assert len(kids) == 4
            pv = k.face_vertices(e, f)
            n = _cross(_sub(pv[1], pv[0]), _sub(pv[2], pv[0]))
            lo = [min(v[i] for v in pv) for i in range(3)]
            hi = [max(v[i] for v in pv) for i in range(3)]
            for c, cf in kids:
                assert k.parent(c) == e
                for v in k.face_vertices(c, cf):
                    assert sum(a * b for a, b in zip(n, _sub(v, pv[0]))) == 0
                    assert all(lo[i] <= v[i] <= hi[i] for i in range(3))


def _sub(a, b):
    return tuple(p - q for p, q in zip(a, b))


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _vol6(v):
    a, b, c, d = v
    u, w, z = ([q[i] - a[i] for i in range(3)] for q in (b, c, d))
    return abs(u[0] * (w[1] * z[2] - w[2] * z[1]) - u[1] * (w[0] * z[2] - w[2] * z[0]) + u[2] * (w[0] * z[1] - w[1] * z[0]))


def test_six_tet_types_tile_the_cube():
    k = shape_kernel(TreeShape.TET)
    tets = [Element(0, 0, 0, 0, t, 0) for t in range(6)]
    assert sum(_vol6(k.vertex_coords(t)) for t in tets) == 6 * ROOT_LEN**3
    # every tet contains the main diagonal and no two overlap: centroids are in distinct chambers
    chambers = set()
    for t in tets:
        c = [sum(v[i] for v in k.vertex_coords(t)) for i in range(3)]
        chambers.add(tuple(sorted(range(3), key=lambda i: c[i])))
    assert len(chambers) == 6


def test_hex_children_tile_parent():
    k = shape_kernel(TreeShape.HEX)
    kids = k.children(k.root)
    assert {c.anchor for c in kids} == {(x, y, z) for x in (0, ROOT_LEN // 2) for y in (0, ROOT_LEN // 2) for z in (0, ROOT_LEN // 2)}
    assert [k.sfc_index(c) for c in kids] == sorted(k.sfc_index(c) for c in kids)


@pytest.mark.parametrize("shape", SHAPES)
def test_vtk_cells_positively_oriented(shape, trees3):
    k = shape_kernel(shape)
    for e in trees3[shape].levels[2]:
        vtype, verts = k.vtk_cell(e)
        assert vtype == {TreeShape.HEX: 12, TreeShape.TET: 10, TreeShape.PYRAMID: 14}[shape] or (
            shape is TreeShape.PYRAMID and e.etype < 6 and vtype == 10
        )
        a, b, c, d = verts[0], verts[1], verts[2 if len(verts) != 8 else 3], verts[4 if len(verts) > 4 else 3]
        u, w, z = ([q[i] - a[i] for i in range(3)] for q in (b, c, d))
        det = u[0] * (w[1] * z[2] - w[2] * z[1]) - u[1] * (w[0] * z[2] - w[2] * z[0]) + u[2] * (w[0] * z[1] - w[1] * z[0])
        assert det > 0


@pytest.mark.parametrize("shape", [TreeShape.HEX, TreeShape.TET])
def test_check_rejects_bad_elements(shape):
    k = shape_kernel(shape)
    with pytest.raises(DomainError):
        k.check(Element(1, 0, 0, 1, 0, k.root.mtl))
    with pytest.raises(DomainError):
        k.child(k.root, 8)
    with pytest.raises(DomainError):
        k.parent(k.root)


@settings(max_examples=100, deadline=None)
@given(elements(shape=TreeShape.TET, min_level=1))
def test_random_tet_round_trip(e):
    k = shape_kernel(TreeShape.TET)
    assert k.child(k.parent(e), k.local_index(e)) == e
    if e.level <= 12:
        assert k.element_from_linear_id(e.level, k.linear_id(e)) == e


@settings(max_examples=100, deadline=None)
@given(elements(shape=TreeShape.HEX, min_level=1))
def test_random_hex_round_trip(e):
    k = shape_kernel(TreeShape.HEX)
    assert k.child(k.parent(e), k.local_index(e)) == e
    assert k.element_from_linear_id(e.level, k.linear_id(e)) == e
    for f in range(6):
        r = k.face_neighbor(e, f)
        if r is not None:
            assert k.face_neighbor(r.neighbor, r.dual_face).neighbor == e
