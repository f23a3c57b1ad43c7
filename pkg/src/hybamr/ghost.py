"""Face ghost layer: remote leaves that share a face with a local leaf."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cmesh import CoarseMesh
from .forest import Forest
from .procgroup import Comm, pack_ints, unpack_ints
from .sfc import Element

TAG_GHOST = 13


@dataclass
class GhostLayer:
    rank: int
    # owner rank -> sorted (tree, element) pairs
    ghosts: dict[int, list[tuple[int, Element]]] = field(default_factory=dict)
    # destination rank -> local leaves sent there
    mirrors: dict[int, list[tuple[int, Element]]] = field(default_factory=dict)

    @property
    def num_ghosts(self) -> int:
        return sum(len(v) for v in self.ghosts.values())

    def as_set(self) -> set[tuple[int, int, Element]]:
        return {(o, t, e) for o, lst in self.ghosts.items() for t, e in lst}


def face_neighbor(cmesh: CoarseMesh, tree: int, e: Element, f: int) -> tuple[int, Element, int] | None:
    """Same-level neighbor across face ``f``, also across tree links; None on the domain boundary."""
    k = cmesh.kernel(tree)
    r = k.face_neighbor(e, f)
    if r is not None:
        return tree, r.neighbor, r.dual_face
    g, fe = k.collapse_to_face(e, f)
    link = cmesh.link(tree, g)
    if link is None:
        return None
    t2, g2 = link
    n, nf = cmesh.kernel(t2).extrude_from_face(fe, g2)
    return t2, n, nf


def owners_at_face(f: Forest, tree: int, e: Element, face: int, out: set[int]) -> None:
    """Ranks owning a leaf that overlaps face ``face`` of the (not necessarily leaf) element ``e``."""
    k = f.cmesh.kernel(tree)
    lo, hi = k.descendant_keys(e)
    r_lo = f.owner_of(tree, lo)
    r_hi = f.owner_of(tree, hi)
    if r_lo == r_hi:
        out.add(r_lo)
        return
    for c, cf in k.children_at_face(e, face):
        owners_at_face(f, tree, c, cf, out)


def forest_ghost(f: Forest, comm: Comm) -> GhostLayer:
    p, size = comm.rank, comm.size
    send: dict[int, list[tuple[int, Element]]] = {}
    for tree, e in f.iter_leaves():
        k = f.cmesh.kernel(tree)
        targets: set[int] = set()
        for face in range(k.num_faces(e)):
            nb = face_neighbor(f.cmesh, tree, e, face)
            if nb is None:
                continue
            t2, n, nf = nb
            owners_at_face(f, t2, n, nf, targets)
        targets.discard(p)
        for q in targets:
            send.setdefault(q, []).append((tree, e))

    # everybody learns who sends to whom, then the leaves go point to point
    counts = comm.allgather({q: len(v) for q, v in send.items()})
    for q in sorted(send):
        rows = [(t, *e) for t, e in send[q]]
        comm.send(q, TAG_GHOST, pack_ints(np.array(rows, dtype=np.int64).ravel()))
    senders = [s for s in range(size) if p in counts[s]]
    layer = GhostLayer(p, mirrors=send)
    for s in senders:
        arr = unpack_ints(comm.recv(s, TAG_GHOST)).reshape(-1, 7).tolist()
        layer.ghosts[s] = [(row[0], Element(*row[1:])) for row in arr]
    return layer
