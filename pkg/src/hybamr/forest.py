"""Distributed forest of trees: New, Adapt, Partition, checksum and stats.

A ``Forest`` is the state of one rank inside a procgroup run. Leaves are kept
per local tree in SFC order. Global information (element offsets, tree
offsets, the first leaf of every rank) is replicated on all ranks.
"""

from __future__ import annotations

from array import array
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from itertools import chain
from typing import Callable, Iterator, Sequence

import numpy as np

from .cmesh import CoarseMesh
from .elements import TreeShape
from .procgroup import Comm, pack_ints, unpack_ints
from .sfc import L_MAX, DomainError, Element

REFINE = 1
KEEP = 0
COARSEN = -1

TAG_BOUNDS = 11
TAG_PARTITION = 12

AdaptCallback = Callable[["Forest", int, Sequence[Element]], int]


@dataclass
class Forest:
    cmesh: CoarseMesh
    rank: int
    size: int
    level: int  # level of the uniform forest it was created with
    first_tree: int
    last_tree: int
    leaves: dict[int, list[Element]]
    # replicated: trees each rank is responsible for (prefix sums) and leaf offsets
    tree_offsets: list[int] = field(default_factory=list)
    element_offsets: list[int] = field(default_factory=list)
    # replicated: (tree, lowest descendant key) of every rank's first leaf, None if empty
    rank_first: list[tuple[int, int] | None] = field(default_factory=list)
    _fk: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def num_local_leaves(self) -> int:
        return sum(len(v) for v in self.leaves.values())

    @property
    def num_global_leaves(self) -> int:
        return self.element_offsets[-1]

    @property
    def is_empty(self) -> bool:
        return self.last_tree < self.first_tree

    def local_trees(self) -> range:
        return range(self.first_tree, self.last_tree + 1)

    def iter_leaves(self) -> Iterator[tuple[int, Element]]:
        for t in self.local_trees():
            for e in self.leaves.get(t, ()):
                yield t, e

    def owner_of(self, tree: int, key: int) -> int:
        """Rank holding the leaf that contains finest-level position ``key`` of ``tree``."""
        firsts = self._first_keys()
        i = bisect_right(firsts[0], (tree, key)) - 1
        return firsts[1][max(i, 0)]

    def _first_keys(self) -> tuple[list[tuple[int, int]], list[int]]:
        cache = self._fk
        if cache is None:
            keys, ranks = [], []
            for r, fk in enumerate(self.rank_first):
                if fk is not None:
                    keys.append(fk)
                    ranks.append(r)
            cache = (keys, ranks)
            self._fk = cache
        return cache


# -- ideal partition arithmetic ------------------------------------------------


def ideal_offset(p: int, n: int, size: int) -> int:
    """First global leaf index of rank ``p`` in an equal split of ``n`` leaves."""
    return p * n // size


def owner_rank(e: int, n: int, size: int) -> int:
    """Rank that holds global leaf ``e`` in an equal split of ``n`` leaves."""
    return size - 1 - (size * (n - 1 - e)) // n


def tree_leaf_count(cmesh: CoarseMesh, tree: int, level: int) -> int:
    k = cmesh.kernel(tree)
    return k.num_descendants_at_level(k.root, level)


def initial_trees(num_trees: int, rank: int, size: int) -> range:
    """Trees a rank is responsible for before New: an equal split of the tree ids."""
    return range(rank * num_trees // size, (rank + 1) * num_trees // size)


# -- New -----------------------------------------------------------------------


@dataclass(frozen=True)
class Bounds:
    """Tree range of one rank and tree-local ids of its first and last leaf."""

    first_tree: int
    first_elem: int
    last_tree: int
    last_elem: int

    @property
    def empty(self) -> bool:
        return self.last_tree < self.first_tree


def uniform_bounds(cmesh: CoarseMesh, level: int, comm: Comm) -> Bounds:
    p, size = comm.rank, comm.size
    trees = initial_trees(cmesh.num_trees, p, size)
    counts = [tree_leaf_count(cmesh, t, level) for t in trees]
    local = sum(counts)
    start = comm.exclusive_prefix_scan(local)
    # replicated offsets of the responsible ranks; C[P] = N
    offs = comm.allgather(start)
    n = comm.allreduce(local)
    C = offs + [n]
    O = [ideal_offset(q, n, size) for q in range(size + 1)]

    # global index of the first leaf of each local tree, T[K_p] = C[p + 1]
    T = [start]
    for c in counts:
        T.append(T[-1] + c)

    def tree_at(e: int) -> int:
        return trees.start + bisect_right(T, e) - 1

    if trees:
        t0, tk = T[0], T[-1]
        q0 = min(owner_rank(t0, n, size), bisect_left(O, t0))
        q1 = owner_rank(tk - 1, n, size)
        for q in range(q0, q1 + 1):
            lo, hi = O[q], O[q + 1]
            if lo == hi:
                # empty rank: its first tree is the one holding the next leaf
                if t0 <= lo < tk:
                    ft = tree_at(lo)
                    comm.send(q, TAG_BOUNDS, pack_ints([1, ft, 0, 1, ft - 1, 0]))
                continue
            msg = [0, 0, 0, 0, 0, 0]
            if t0 <= lo < tk:
                ft = tree_at(lo)
                msg[0:3] = [1, ft, lo - T[ft - trees.start]]
            if t0 <= hi - 1 < tk:
                lt = tree_at(hi - 1)
                msg[3:6] = [1, lt, hi - 1 - T[lt - trees.start]]
            if msg[0] or msg[3]:
                comm.send(q, TAG_BOUNDS, pack_ints(msg))

    # the (at most two) ranks whose trees contain our first and last leaf
    lo, hi = O[p], O[p + 1]
    s_lo = bisect_right(C, lo) - 1
    s_hi = s_lo if lo == hi else bisect_right(C, hi - 1) - 1
    got = comm.recv_range(s_lo, s_hi, TAG_BOUNDS, include=lambda s: s in (s_lo, s_hi))
    ft = fe = lt = le = None
    for payload in got.values():
        m = unpack_ints(payload).tolist()
        if m[0]:
            ft, fe = m[1], m[2]
        if m[3]:
            lt, le = m[4], m[5]
    if ft is None or lt is None:
        raise DomainError(f"rank {p} did not receive its partition bounds")
    return Bounds(ft, fe, lt, le)


def _expand(kernel, e: Element, level: int) -> list[Element]:
    els = [e]
    for _ in range(level - e.level):
        els = [c for x in els for c in kernel.children(x)]
    return els


def _leaves_in_range(kernel, level: int, lo: int, hi: int) -> list[Element]:
    """Level-``level`` elements of a tree with linear ids in [lo, hi], in SFC order."""
    out: list[Element] = []

    def visit(e: Element, start: int) -> None:
        cnt = kernel.num_descendants_at_level(e, level)
        if start > hi or start + cnt <= lo:
            return
        if lo <= start and start + cnt - 1 <= hi:
            out.extend(_expand(kernel, e, level))
            return
        for c in kernel.children(e):
            visit(c, start)
            start += kernel.num_descendants_at_level(c, level)

    visit(kernel.root, 0)
    return out


def forest_new(cmesh: CoarseMesh, level: int, comm: Comm) -> Forest:
    if not 0 <= level <= L_MAX:
        raise DomainError(f"level {level} outside [0, {L_MAX}]")
    b = uniform_bounds(cmesh, level, comm)
    leaves: dict[int, list[Element]] = {}
    for t in range(b.first_tree, b.last_tree + 1):
        k = cmesh.kernel(t)
        total = tree_leaf_count(cmesh, t, level)
        lo = b.first_elem if t == b.first_tree else 0
        hi = b.last_elem if t == b.last_tree else total - 1
        leaves[t] = _leaves_in_range(k, level, lo, hi)
    f = Forest(cmesh, comm.rank, comm.size, level, b.first_tree, b.last_tree, leaves)
    _sync_global(f, comm)
    return f


def forest_from_leaves(cmesh: CoarseMesh, leaves: dict[int, list[Element]], comm: Comm, level: int = 0) -> Forest:
    """Forest from this rank's leaves, given per tree in SFC order.

    Ranks must hold consecutive pieces of the global leaf sequence; the leaves
    themselves are not validated.
    """
    leaves = {t: list(ls) for t, ls in sorted(leaves.items()) if ls}
    ft, lt = (min(leaves), max(leaves)) if leaves else (0, -1)
    f = Forest(cmesh, comm.rank, comm.size, level, ft, lt, leaves)
    _sync_global(f, comm)
    return f


def _sync_global(f: Forest, comm: Comm) -> None:
    """Recompute the replicated offsets and first-leaf table after a local change."""
    first = None
    if f.num_local_leaves:
        t = f.first_tree
        first = (t, f.cmesh.kernel(t).descendant_keys(f.leaves[t][0])[0])
    info = comm.allgather((f.num_local_leaves, f.first_tree, f.last_tree, first))
    offs = [0]
    for cnt, *_ in info:
        offs.append(offs[-1] + cnt)
    f.element_offsets = offs
    f.rank_first = [i[3] for i in info]
    # empty ranks point at the first tree of the next non-empty rank
    nxt = f.cmesh.num_trees
    fixed = [None] * f.size
    for r in range(f.size - 1, -1, -1):
        cnt, ft, lt, _ = info[r]
        if cnt:
            fixed[r] = (ft, lt)
            nxt = ft
        else:
            fixed[r] = (nxt, nxt - 1)
    if not f.num_local_leaves:
        f.first_tree, f.last_tree = fixed[f.rank]
        f.leaves = {}
    # a shared tree is counted by the lowest non-empty rank holding it
    tk = [0]
    last_counted = -1
    for ft, lt in fixed:
        own = 0
        if lt >= ft:
            own = lt - max(ft, last_counted + 1) + 1
            last_counted = max(last_counted, lt)
        tk.append(tk[-1] + own)
    f.tree_offsets = tk
    f._fk = None


# -- Adapt ---------------------------------------------------------------------


def _adapt_tree(f: Forest, tree: int, leaves: list[Element], callback: AdaptCallback) -> list[Element]:
    k = f.cmesh.kernel(tree)
    out: list[Element] = []
    n = len(leaves)
    i = 0
    while i < n:
        e = leaves[i]
        elems: Sequence[Element] = (e,)
        # the first child of any family sits in sub-cube 0, a cheap pre-filter
        if e.level > 0 and not ((e.x | e.y | e.z) >> (L_MAX - e.level)) & 1 and k.local_index(e) == 0:
            nc = k.num_children(k.parent(e))
            if i + nc <= n and k.is_family(leaves[i : i + nc]):
                elems = leaves[i : i + nc]
        r = callback(f, tree, elems)
        if r == COARSEN and len(elems) > 1:
            out.append(k.parent(e))
            i += len(elems)
            continue
        if r == REFINE and e.level < L_MAX:
            out.extend(k.children(e))
        else:
            out.append(e)
        i += 1
    return out


def forest_adapt(f: Forest, callback: AdaptCallback, comm: Comm, repeat: int = 1) -> Forest:
    """One sweep per repeat over the local leaves in SFC order.

    The callback sees a whole family when a complete family starts at the
    current leaf; COARSEN then replaces it by the parent. For any other result,
    or for a single leaf, the decision applies to the current leaf only and
    COARSEN is ignored.
    """
    cur = f
    for _ in range(repeat):
        new_leaves = {t: _adapt_tree(cur, t, ls, callback) for t, ls in cur.leaves.items()}
        nf = Forest(cur.cmesh, cur.rank, cur.size, cur.level, cur.first_tree, cur.last_tree, new_leaves)
        _sync_global(nf, comm)
        cur = nf
    return cur


# -- Partition -----------------------------------------------------------------


def _leaf_array(f: Forest) -> np.ndarray:
    rows = [(t, *e) for t, e in f.iter_leaves()]
    if not rows:
        return np.zeros((0, 7), dtype=np.int64)
    return np.array(rows, dtype=np.int64)


def forest_partition(f: Forest, comm: Comm) -> Forest:
    """Redistribute leaves so rank p holds global leaves [O_p, O_{p+1})."""
    p, size = comm.rank, comm.size
    C = f.element_offsets
    n = C[-1]
    O = [ideal_offset(q, n, size) for q in range(size + 1)]
    flat = list(f.iter_leaves())
    mine_lo, mine_hi = C[p], C[p + 1]
    pieces: dict[int, list[tuple[int, Element]]] = {}
    if mine_hi > mine_lo:
        q0 = owner_rank(mine_lo, n, size)
        q1 = owner_rank(mine_hi - 1, n, size)
        for q in range(q0, q1 + 1):
            a, b = max(O[q], mine_lo), min(O[q + 1], mine_hi)
            if a >= b:
                continue
            chunk = flat[a - mine_lo : b - mine_lo]
            if q == p:
                pieces[p] = chunk
            else:
                rows = array("q", chain.from_iterable((t, *e) for t, e in chunk))
                comm.send(q, TAG_PARTITION, pack_ints(rows))
    lo, hi = O[p], O[p + 1]
    if hi > lo:
        s0 = bisect_right(C, lo) - 1
        s1 = bisect_right(C, hi - 1) - 1
        got = comm.recv_range(s0, s1, TAG_PARTITION, include=lambda s: s != p and C[s + 1] > C[s])
        for s, payload in got.items():
            rows = unpack_ints(payload).reshape(-1, 7).tolist()
            pieces[s] = [(r[0], Element._make(r[1:])) for r in rows]
    leaves: dict[int, list[Element]] = {}
    for s in sorted(pieces):
        for t, e in pieces[s]:
            lst = leaves.get(t)
            if lst is None:
                lst = leaves[t] = []
            lst.append(e)
    if leaves:
        ft, lt = min(leaves), max(leaves)
    else:
        ft, lt = f.first_tree, f.first_tree - 1
    nf = Forest(f.cmesh, p, size, f.level, ft, lt, leaves)
    _sync_global(nf, comm)
    return nf


# -- checksum and stats --------------------------------------------------------

_M64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _splitmix(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        x = x + np.uint64(0x9E3779B97F4A7C15)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return x ^ (x >> np.uint64(31))


def leaf_hashes(arr: np.ndarray) -> np.ndarray:
    """Per-leaf 64-bit hash of (tree, level, x, y, z, type) from rows of _leaf_array."""
    h = np.zeros(len(arr), dtype=np.uint64)
    for col in (0, 4, 1, 2, 3, 5):
        h = _splitmix(h ^ arr[:, col].astype(np.uint64))
    return h


def forest_checksum(f: Forest, comm: Comm) -> int:
    """Order-independent sum of leaf hashes modulo 2^64; identical for any partition."""
    local = int(leaf_hashes(_leaf_array(f)).sum(dtype=np.uint64))
    return comm.allreduce(local) % (1 << 64)


@dataclass(frozen=True)
class ForestStats:
    num_trees: int
    global_leaves: int
    rank_leaves: tuple[int, ...]
    shape_leaves: dict[str, int]
    min_level: int
    max_level: int

    def lines(self) -> list[str]:
        out = [
            f"trees {self.num_trees}",
            f"leaves {self.global_leaves}",
            f"ranks {len(self.rank_leaves)}",
            f"rank_leaves {','.join(map(str, self.rank_leaves))}",
            f"imbalance {max(self.rank_leaves) - min(self.rank_leaves)}",
        ]
        out += [f"leaves_{s} {c}" for s, c in self.shape_leaves.items()]
        out += [f"min_level {self.min_level}", f"max_level {self.max_level}"]
        return out


def forest_stats(f: Forest, comm: Comm) -> ForestStats:
    per_shape = {s.value: 0 for s in TreeShape}
    lmin, lmax = L_MAX + 1, -1
    for t, ls in f.leaves.items():
        per_shape[f.cmesh.shapes[t].value] += len(ls)
        for e in ls:
            if e.level < lmin:
                lmin = e.level
            if e.level > lmax:
                lmax = e.level
    allinfo = comm.allgather((f.num_local_leaves, per_shape, lmin, lmax))
    shapes = {s.value: sum(i[1][s.value] for i in allinfo) for s in TreeShape}
    return ForestStats(
        num_trees=f.cmesh.num_trees,
        global_leaves=sum(i[0] for i in allinfo),
        rank_leaves=tuple(i[0] for i in allinfo),
        shape_leaves=shapes,
        min_level=min(i[2] for i in allinfo),
        max_level=max(i[3] for i in allinfo),
    )
