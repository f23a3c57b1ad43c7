"""Coarse meshes: one tree per root element plus face-to-face links.

Text format, one record per line (``#`` starts a comment)::

    tree <id> <hex|tet|pyramid>
    link <tree> <face> <tree> <face>

A link line glues both directions; repeating it reversed is allowed. Links
carry the identity orientation: the face-element coordinates computed on one
side are taken unchanged on the other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .elements import ElementKernel, TreeShape, shape_kernel


class CmeshError(ValueError):
    pass


@dataclass
class CoarseMesh:
    shapes: list[TreeShape]
    links: dict[tuple[int, int], tuple[int, int]] = field(default_factory=dict)
    name: str = ""

    @property
    def num_trees(self) -> int:
        return len(self.shapes)

    def kernel(self, tree: int) -> ElementKernel:
        return shape_kernel(self.shapes[tree])

    def link(self, tree: int, face: int) -> tuple[int, int] | None:
        return self.links.get((tree, face))

    def boundary_faces(self) -> Iterator[tuple[int, int]]:
        for t, s in enumerate(self.shapes):
            for f in range(shape_kernel(s).num_root_faces):
                if (t, f) not in self.links:
                    yield t, f

    def validate(self) -> None:
        n = self.num_trees
        if n == 0:
            raise CmeshError("coarse mesh has no trees")
        for (t, f), (u, g) in self.links.items():
            for tree, face in ((t, f), (u, g)):
                if not 0 <= tree < n:
                    raise CmeshError(f"link {t}:{f} -> {u}:{g} references missing tree {tree}")
                if not 0 <= face < self.kernel(tree).num_root_faces:
                    raise CmeshError(
                        f"link {t}:{f} -> {u}:{g}: face {face} does not exist on "
                        f"{self.shapes[tree].value} tree {tree}"
                    )
            if (t, f) == (u, g):
                raise CmeshError(f"face {f} of tree {t} is linked to itself")
            back = self.links.get((u, g))
            if back != (t, f):
                raise CmeshError(
                    f"link {t}:{f} -> {u}:{g} is not involutive (reverse is {back})"
                )
            sa = self.kernel(t).root_face_shape(f)
            sb = self.kernel(u).root_face_shape(g)
            if sa != sb:
                raise CmeshError(f"link {t}:{f} -> {u}:{g} joins a {sa} to a {sb}")

    def add_link(self, t: int, f: int, u: int, g: int) -> None:
        for key, val in (((t, f), (u, g)), ((u, g), (t, f))):
            old = self.links.get(key)
            if old is not None and old != val:
                raise CmeshError(
                    f"face {key[1]} of tree {key[0]} linked twice: to {old[0]}:{old[1]} and {val[0]}:{val[1]}"
                )
            self.links[key] = val

    def to_text(self) -> str:
        lines = [f"tree {i} {s.value}" for i, s in enumerate(self.shapes)]
        for (t, f), (u, g) in sorted(self.links.items()):
            if (t, f) < (u, g):
                lines.append(f"link {t} {f} {u} {g}")
        return "\n".join(lines) + "\n"


def cmesh_load(text: str, name: str = "") -> CoarseMesh:
    trees: dict[int, TreeShape] = {}
    raw_links: list[tuple[int, tuple[int, int, int, int]]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "tree" and len(tok) == 3:
                tid = int(tok[1])
                if tid in trees:
                    raise CmeshError(f"line {lineno}: tree {tid} defined twice")
                trees[tid] = TreeShape(tok[2])
            elif tok[0] == "link" and len(tok) == 5:
                a, b, c, d = (int(v) for v in tok[1:])
                raw_links.append((lineno, (a, b, c, d)))
            else:
                raise CmeshError(f"line {lineno}: cannot parse {line!r}")
        except ValueError as exc:
            if isinstance(exc, CmeshError):
                raise
            raise CmeshError(f"line {lineno}: {exc}") from None
    if sorted(trees) != list(range(len(trees))):
        raise CmeshError("tree ids must be dense from 0")
    cm = CoarseMesh([trees[i] for i in range(len(trees))], name=name)
    for lineno, (a, b, c, d) in raw_links:
        try:
            cm.add_link(a, b, c, d)
        except CmeshError as exc:
            raise CmeshError(f"line {lineno}: {exc}") from None
    cm.validate()
    return cm


def cmesh_read(path: str) -> CoarseMesh:
    with open(path) as fh:
        return cmesh_load(fh.read(), name=path)


# -- builtins ------------------------------------------------------------------

H, T, P = TreeShape.HEX, TreeShape.TET, TreeShape.PYRAMID


def _build(name: str, shapes: list[TreeShape], links: list[tuple[int, int, int, int]]) -> CoarseMesh:
    cm = CoarseMesh(shapes, name=f"builtin:{name}")
    for link in links:
        cm.add_link(*link)
    cm.validate()
    return cm


def _pyramids8() -> CoarseMesh:
    # four base-to-base pairs chained through the f1 faces
    links = [(2 * i, 4, 2 * i + 1, 4) for i in range(4)]
    links += [(2 * i + 1, 1, 2 * i + 2, 1) for i in range(3)]
    return _build("pyramids8", [P] * 8, links)


def _hybrid40() -> CoarseMesh:
    # 2 hexes, 2 pyramids and 36 tetrahedra, roughly the shape mix of a
    # tetrahedral far field with a few hexahedra and pyramidal transitions
    shapes = [H, H, P, P] + [T] * 36
    links = [(0, 1, 1, 0), (0, 5, 2, 4), (1, 5, 3, 4)]
    links += [(2, f, 4 + f, 0) for f in range(4)]
    links += [(3, f, 8 + f, 0) for f in range(4)]
    links += [(k, 2, k + 1, 3) for k in range(4, 39)]
    links += [(k, 0, k + 1, 0) for k in range(12, 40, 2)]
    links += [(k, 1, k + 1, 1) for k in range(4, 40, 2)]
    return _build("hybrid40", shapes, links)


BUILTINS = {
    "hex": lambda: _build("hex", [H], []),
    "tet": lambda: _build("tet", [T], []),
    "pyramid": lambda: _build("pyramid", [P], []),
    "two_hex": lambda: _build("two_hex", [H, H], [(0, 1, 1, 0)]),
    "two_tet": lambda: _build("two_tet", [T, T], [(0, 0, 1, 0)]),
    "two_pyramid": lambda: _build("two_pyramid", [P, P], [(0, 4, 1, 4)]),
    "pyramids8": _pyramids8,
    "hybrid": lambda: _build("hybrid", [H, P, T], [(0, 5, 1, 4), (1, 1, 2, 0)]),
    "hybrid40": _hybrid40,
}


def cmesh_builtin(name: str) -> CoarseMesh:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise CmeshError(f"unknown builtin mesh {name!r}; choose from {', '.join(BUILTINS)}") from None


def cmesh_from_spec(spec: str) -> CoarseMesh:
    """``builtin:NAME`` or a path to a text file."""
    if spec.startswith("builtin:"):
        return cmesh_builtin(spec[len("builtin:"):])
    return cmesh_read(spec)
