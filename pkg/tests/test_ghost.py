import pytest

from hybamr import procgroup as pg
from hybamr.cmesh import cmesh_builtin
from hybamr.forest import KEEP, REFINE, forest_adapt, forest_new, forest_partition
from hybamr.ghost import TAG_GHOST, face_neighbor, forest_ghost
from hybamr.oracle import adjacency_oracle
from hybamr.sfc import L_MAX


def ghost_run(name, level, size, callback=None, partition=False):
    cm = cmesh_builtin(name)

    def prog(r, c, s):
        f = forest_new(cm, level, c)
        if callback is not None:
            f = forest_adapt(f, callback, c)
        if partition:
            f = forest_partition(f, c)
        return f, forest_ghost(f, c)

    res, run = pg.run(size, prog)
    forests = [r[0] for r in res]
    leaves = [(f.rank, t, e) for f in forests for t, e in f.iter_leaves()]
    return cm, leaves, [r[1] for r in res], run


def check_against_oracle(cm, leaves, layers):
    want = adjacency_oracle(cm, leaves)
    for layer in layers:
        assert layer.as_set() == want.get(layer.rank, set())


def test_single_rank_has_no_ghosts():
    _, _, layers, run = ghost_run("pyramid", 2, 1)
    assert layers[0].num_ghosts == 0
    assert not [m for m in run.log if m.tag == TAG_GHOST]


@pytest.mark.parametrize("name", ["two_hex", "two_tet", "two_pyramid", "hybrid", "pyramid"])
@pytest.mark.parametrize("size", [2, 4, 8])
@pytest.mark.parametrize("level", [1, 2])
def test_uniform_ghosts_match_oracle(name, size, level):
    cm, leaves, layers, _ = ghost_run(name, level, size)
    check_against_oracle(cm, leaves, layers)


def _patchy(f, tree, elems):
    e = elems[0]
    return REFINE if (e.x ^ (e.y >> 1) ^ tree) >> (L_MAX - e.level) & 1 == 0 and e.etype in (0, 3, 6) else KEEP


@pytest.mark.parametrize("name", ["two_pyramid", "hybrid", "pyramids8"])
@pytest.mark.parametrize("size", [3, 8])
def test_adapted_ghosts_match_oracle(name, size):
    cm, leaves, layers, _ = ghost_run(name, 1, size, _patchy, partition=True)
    assert len({e.level for _, _, e in leaves}) == 2
    check_against_oracle(cm, leaves, layers)


def test_ghost_exchange_is_symmetric():
    _, _, layers, run = ghost_run("hybrid", 2, 4, _patchy, partition=True)
    by_rank = {l.rank: l for l in layers}
    for layer in layers:
        for q, sent in layer.mirrors.items():
            assert sorted(by_rank[q].ghosts[layer.rank]) == sorted(sent)
    pairs = {(m.src, m.dst) for m in run.log if m.tag == TAG_GHOST}
    assert pairs == {(b, a) for a, b in pairs}


def test_face_neighbor_across_link():
    cm = cmesh_builtin("hybrid")
    hexk, pyrk = cm.kernel(0), cm.kernel(1)
    # top face of the hex meets the base of the pyramid
    e = hexk.children(hexk.root)[7]
    t2, n, nf = face_neighbor(cm, 0, e, 5)
    assert (t2, nf) == (1, 4) and n.etype == 6 and n.z == 0
    assert (n.x, n.y) == (e.x, e.y)
    assert face_neighbor(cm, 1, n, nf) == (0, e, 5)
    assert face_neighbor(cm, 0, hexk.root, 0) is None
    assert pyrk.root_face(n, nf) == 4
