"""Legacy ASCII VTK export of a forest (all ranks gathered)."""

from __future__ import annotations

from typing import Sequence

from .forest import Forest
from .sfc import ROOT_LEN


def export_vtk(forests: Sequence[Forest], path: str) -> tuple[int, int]:
    """Write the leaves of every rank's forest; returns (points, cells) written.

    Each tree is drawn in its own unit cube, so trees overlap in the picture.
    Cell data: owner rank, tree, level, element type and global SFC rank.
    """
    points: list[tuple[int, int, int]] = []
    cells: list[tuple[int, list[int]]] = []
    data: dict[str, list[int]] = {"owner": [], "tree": [], "level": [], "type": [], "sfc_rank": []}
    index: dict[tuple[int, tuple[int, int, int]], int] = {}
    for f in forests:
        sfc_rank = f.element_offsets[f.rank]
        for tree, e in f.iter_leaves():
            vtype, verts = f.cmesh.kernel(tree).vtk_cell(e)
            ids = []
            for v in verts:
                key = (tree, v)
                i = index.get(key)
                if i is None:
                    i = index[key] = len(points)
                    points.append(v)
                ids.append(i)
            cells.append((vtype, ids))
            data["owner"].append(f.rank)
            data["tree"].append(tree)
            data["level"].append(e.level)
            data["type"].append(e.etype)
            data["sfc_rank"].append(sfc_rank)
            sfc_rank += 1

    lines = ["# vtk DataFile Version 3.0", "forest leaves", "ASCII", "DATASET UNSTRUCTURED_GRID"]
    lines.append(f"POINTS {len(points)} double")
    s = float(ROOT_LEN)
    lines += [f"{x / s:.9g} {y / s:.9g} {z / s:.9g}" for x, y, z in points]
    size = sum(len(ids) + 1 for _, ids in cells)
    lines.append(f"CELLS {len(cells)} {size}")
    lines += [" ".join(map(str, [len(ids), *ids])) for _, ids in cells]
    lines.append(f"CELL_TYPES {len(cells)}")
    lines += [str(t) for t, _ in cells]
    lines.append(f"CELL_DATA {len(cells)}")
    for name, vals in data.items():
        lines.append(f"SCALARS {name} int 1")
        lines.append("LOOKUP_TABLE default")
        lines += [str(v) for v in vals]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return len(points), len(cells)


def read_vtk_counts(path: str) -> tuple[int, int, list[int]]:
    """(number of points, number of cells, cell types) of a legacy file written above."""
    with open(path) as fh:
        lines = fh.read().split("\n")
    npts = ncells = 0
    types: list[int] = []
    for i, line in enumerate(lines):
        if line.startswith("POINTS"):
            npts = int(line.split()[1])
        elif line.startswith("CELLS"):
            ncells = int(line.split()[1])
        elif line.startswith("CELL_TYPES"):
            n = int(line.split()[1])
            types = [int(v) for v in lines[i + 1 : i + 1 + n]]
    return npts, ncells, types
