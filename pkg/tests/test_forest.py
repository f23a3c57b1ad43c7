import random

import pytest

from hybamr import procgroup as pg
from hybamr.cmesh import cmesh_builtin
from hybamr.forest import (
    COARSEN,
    KEEP,
    REFINE,
    TAG_PARTITION,
    forest_adapt,
    forest_checksum,
    forest_from_leaves,
    forest_new,
    forest_partition,
    forest_stats,
    ideal_offset,
    owner_rank,
    uniform_bounds,
)
from hybamr.oracle import enumerate_tree, serial_uniform_bounds
from hybamr.sfc import L_MAX, DomainError


def new_forests(name, level, size):
    cm = cmesh_builtin(name)
    res, run = pg.run(size, lambda r, c, s: forest_new(cm, level, c))
    return res, run


def all_leaves(forests):
    return [(f.rank, t, e) for f in forests for t, e in f.iter_leaves()]


def refine_types(types):
    return lambda f, tree, elems: REFINE if elems[0].etype in types else KEEP


def assert_cover(forests):
    """Every tree is tiled exactly, in SFC order, by the leaves of all ranks."""
    cm = forests[0].cmesh
    per_tree = {}
    for f in forests:
        for t, e in f.iter_leaves():
            per_tree.setdefault(t, []).append(e)
    assert sorted(per_tree) == list(range(cm.num_trees))
    for t, leaves in per_tree.items():
        k = cm.kernel(t)
        pos = 0
        for e in leaves:
            assert k.linear_id(k.first_descendant(e, L_MAX)) == pos
            pos += k.num_descendants_at_level(e, L_MAX)
        assert pos == k.num_descendants_at_level(k.root, L_MAX)


# -- partition arithmetic --------------------------------------------------------


def test_offsets_and_owner_are_consistent():
    rng = random.Random(2024)
    for _ in range(10_000):
        n = rng.randint(1, 10**6)
        size = rng.randint(1, 512)
        e = rng.randrange(n)
        p = owner_rank(e, n, size)
        assert ideal_offset(p, n, size) <= e < ideal_offset(p + 1, n, size)


def test_owner_example():
    assert [ideal_offset(p, 92, 5) for p in range(6)] == [0, 18, 36, 55, 73, 92]
    assert owner_rank(40, 92, 5) == 2


# -- New ---------------------------------------------------------------------------


def test_new_hybrid_level1_two_ranks():
    (f0, f1), _ = new_forests("hybrid", 1, 2)
    assert f0.element_offsets == [0, 13, 26]
    assert (f0.first_tree, f0.last_tree) == (0, 1)
    assert (f1.first_tree, f1.last_tree) == (1, 2)
    k = f0.cmesh.kernel(1)
    assert [k.linear_id(e) for e in f0.leaves[1]] == [0, 1, 2, 3, 4]
    assert [k.linear_id(e) for e in f1.leaves[1]] == [5, 6, 7, 8, 9]
    # tree 1 is shared; it is counted once, for the lower rank
    assert f0.tree_offsets == [0, 2, 3]


def test_new_pyramid_level2_five_ranks():
    res, _ = new_forests("pyramid", 2, 5)
    assert res[0].element_offsets == [0, 18, 36, 55, 73, 92]
    assert [f.num_local_leaves for f in res] == [18, 18, 19, 18, 19]
    assert_cover(res)


def test_new_single_rank_holds_everything():
    (f,), _ = new_forests("hybrid40", 2, 1)
    assert (f.first_tree, f.last_tree) == (0, 39)
    assert f.num_local_leaves == 2 * 64 + 2 * 92 + 36 * 64


def test_new_more_ranks_than_leaves():
    res, _ = new_forests("pyramid", 0, 3)
    assert [f.num_local_leaves for f in res] == [0, 0, 1]
    assert [f.is_empty for f in res] == [True, True, False]
    assert_cover(res)


def test_new_rejects_bad_level():
    cm = cmesh_builtin("hex")
    with pytest.raises(DomainError):
        pg.run(1, lambda r, c, s: forest_new(cm, L_MAX + 1, c))


@pytest.mark.parametrize("name", ["hybrid", "pyramids8", "two_tet"])
@pytest.mark.parametrize("size", [1, 3, 7, 16])
def test_uniform_bounds_match_serial(name, size):
    cm = cmesh_builtin(name)
    for level in range(3):
        res, _ = pg.run(size, lambda r, c, s: uniform_bounds(cm, level, c))
        assert res == serial_uniform_bounds(cm, level, size)


def test_new_is_balanced_and_covers():
    for name, size in [("hybrid40", 7), ("pyramids8", 5), ("two_pyramid", 16)]:
        res, _ = new_forests(name, 2, size)
        counts = [f.num_local_leaves for f in res]
        assert max(counts) - min(counts) <= 1
        assert_cover(res)


# -- Adapt ---------------------------------------------------------------------------


@pytest.mark.parametrize("size", [1, 3])
def test_refine_all(size):
    cm = cmesh_builtin("pyramid")

    def prog(r, c, s):
        f = forest_new(cm, 1, c)
        return forest_adapt(f, lambda f, t, el: REFINE, c)

    res, _ = pg.run(size, prog)
    assert res[0].num_global_leaves == 92
    assert_cover(res)


@pytest.mark.parametrize("size", [1, 4])
def test_refine_selected_types_matches_enumeration(size):
    cm = cmesh_builtin("pyramid")
    wanted = {0, 2, 4, 6}
    tree = enumerate_tree("pyramid", 3)
    expect = []
    for e in tree.levels[2]:
        expect += tree.kernel.children(e) if e.etype in wanted else [e]

    def prog(r, c, s):
        return forest_adapt(forest_new(cm, 2, c), refine_types(wanted), c)

    res, _ = pg.run(size, prog)
    assert [e for _, _, e in all_leaves(res)] == expect
    assert res[0].num_global_leaves == len(expect)


@pytest.mark.parametrize("name,size", [("hybrid", 1), ("hybrid", 3), ("pyramids8", 5)])
def test_refine_then_coarsen_is_identity(name, size):
    cm = cmesh_builtin(name)

    def prog(r, c, s):
        f = forest_new(cm, 1, c)
        g = forest_adapt(f, lambda f, t, el: REFINE, c)
        h = forest_adapt(g, lambda f, t, el: COARSEN, c)
        return f, g, h

    res, _ = pg.run(size, prog)
    before = all_leaves([r[0] for r in res])
    assert all_leaves([r[2] for r in res]) == before
    assert res[0][1].num_global_leaves > len(before)


def test_coarsen_without_family_is_ignored():
    cm = cmesh_builtin("pyramid")

    def prog(r, c, s):
        f = forest_new(cm, 1, c)
        f = forest_adapt(f, refine_types({6}), c)
        return forest_adapt(f, lambda f, t, el: COARSEN if len(el) == 1 else KEEP, c)

    res, _ = pg.run(1, prog)
    # five of the ten level-1 children are type-6 pyramids
    assert res[0].num_global_leaves == 5 + 5 * 10


def test_callback_sees_families():
    cm = cmesh_builtin("hybrid")
    seen = []

    def cb(f, tree, elems):
        seen.append(len(elems))
        return KEEP

    pg.run(1, lambda r, c, s: forest_adapt(forest_new(cm, 1, c), cb, c))
    # a family is offered once; after KEEP its other members come one by one
    assert seen == [8] + [1] * 7 + [10] + [1] * 9 + [8] + [1] * 7


def test_repeat_applies_several_sweeps():
    cm = cmesh_builtin("hex")
    res, _ = pg.run(2, lambda r, c, s: forest_adapt(forest_new(cm, 0, c), lambda f, t, el: REFINE, c, repeat=3))
    assert res[0].num_global_leaves == 512


# -- Partition -------------------------------------------------------------------------


def test_partition_from_single_rank():
    cm = cmesh_builtin("pyramid")
    tree = enumerate_tree("pyramid", 2)

    def prog(r, c, s):
        f = forest_from_leaves(cm, {0: tree.levels[2]} if r == 0 else {}, c)
        g = forest_partition(f, c)
        return f, g, forest_checksum(f, c), forest_checksum(g, c)

    res, run = pg.run(4, prog)
    assert [r[1].num_local_leaves for r in res] == [23, 23, 23, 23]
    assert [e for _, _, e in all_leaves([r[1] for r in res])] == tree.levels[2]
    assert res[0][2] == res[0][3]
    assert {m.dst for m in run.log if m.tag == TAG_PARTITION} == {1, 2, 3}


def test_balanced_forest_moves_nothing():
    cm = cmesh_builtin("hybrid40")

    def prog(r, c, s):
        f = forest_new(cm, 1, c)
        return f, forest_partition(f, c)

    res, run = pg.run(6, prog)
    assert not [m for m in run.log if m.tag == TAG_PARTITION]
    assert all_leaves([r[0] for r in res]) == all_leaves([r[1] for r in res])


@pytest.mark.parametrize("size", [2, 5, 8])
def test_partition_after_local_refinement(size):
    cm = cmesh_builtin("hybrid")

    def prog(r, c, s):
        f = forest_new(cm, 1, c)
        f = forest_adapt(f, lambda f, t, el: REFINE if f.rank == 0 else KEEP, c, repeat=2)
        g = forest_partition(f, c)
        return f, g, forest_checksum(f, c), forest_checksum(g, c)

    res, _ = pg.run(size, prog)
    before = all_leaves([r[0] for r in res])
    after = [r[1] for r in res]
    assert [x[1:] for x in all_leaves(after)] == [x[1:] for x in before]
    counts = [f.num_local_leaves for f in after]
    assert max(counts) - min(counts) <= 1
    assert res[0][2] == res[0][3]
    assert_cover(after)


# -- checksum and stats -------------------------------------------------------------------


def _adapted_checksum(size):
    cm = cmesh_builtin("hybrid40")

    def cb(f, tree, elems):
        e = elems[0]
        return REFINE if (e.x ^ e.y ^ e.z ^ tree) >> (L_MAX - e.level) & 3 == 0 else KEEP

    def prog(r, c, s):
        f = forest_adapt(forest_new(cm, 1, c), cb, c, repeat=2)
        f = forest_partition(f, c)
        return forest_checksum(f, c), forest_stats(f, c)

    return pg.run(size, prog)[0][0]


def test_checksum_independent_of_rank_count():
    out = {size: _adapted_checksum(size) for size in (1, 2, 4, 8)}
    assert len({chk for chk, _ in out.values()}) == 1
    assert len({st.global_leaves for _, st in out.values()}) == 1


def test_checksum_distinguishes_forests():
    cm = cmesh_builtin("hybrid")
    res, _ = pg.run(1, lambda r, c, s: [forest_checksum(forest_new(cm, lvl, c), c) for lvl in range(3)])
    assert len(set(res[0])) == 3


def test_empty_ranks_add_nothing_to_checksum():
    cm = cmesh_builtin("hybrid")
    a = pg.run(1, lambda r, c, s: forest_checksum(forest_new(cm, 0, c), c))[0][0]
    b = pg.run(7, lambda r, c, s: forest_checksum(forest_new(cm, 0, c), c))[0][0]
    assert a == b


def test_stats_of_uniform_forest():
    cm = cmesh_builtin("hybrid")
    res, _ = pg.run(3, lambda r, c, s: forest_stats(forest_new(cm, 2, c), c))
    st = res[0]
    assert st.global_leaves == 64 + 92 + 64
    assert st.shape_leaves == {"hex": 64, "tet": 64, "pyramid": 92}
    assert (st.min_level, st.max_level) == (2, 2)
    assert sum(st.rank_leaves) == st.global_leaves
    assert "leaves 220" in st.lines()
