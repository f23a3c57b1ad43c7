"""Command line driver: ``hybamr new | adapt-loop | bench``."""

from __future__ import annotations

import argparse
import hashlib
import sys
import time
from dataclasses import dataclass
from typing import Callable, Sequence

from . import procgroup as pg
from .cmesh import CmeshError, CoarseMesh, cmesh_from_spec
from .elements import TreeShape, shape_kernel
from .forest import (
    COARSEN,
    KEEP,
    REFINE,
    AdaptCallback,
    Forest,
    forest_adapt,
    forest_checksum,
    forest_new,
    forest_partition,
    forest_stats,
)
from .ghost import forest_ghost
from .sfc import L_MAX, ROOT_LEN, DomainError, Element
from .vtk import export_vtk


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Criterion:
    name: str
    params: dict[str, str]

    def get(self, key: str, default: float) -> float:
        try:
            return float(self.params.get(key, default))
        except ValueError:
            raise ConfigError(f"criterion parameter {key}={self.params[key]!r} is not a number") from None


def parse_criterion(text: str) -> Criterion:
    """``name`` or ``name:key=value,key=value``."""
    name, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigError(f"criterion parameter {item!r} lacks '='")
        params[key.strip()] = val.strip()
    if name not in CRITERIA:
        raise ConfigError(f"unknown criterion {name!r}; choose from {', '.join(CRITERIA)}")
    return Criterion(name, params)


# -- adapt criteria ------------------------------------------------------------


def _wall(c: Criterion, step: int, steps: int, base: int, seed: int) -> AdaptCallback:
    """Skewed slab that moves through the unit cube; refine inside up to ``depth`` extra levels."""
    width = c.get("width", 0.1)
    depth = int(c.get("depth", 2))
    n = (1.0, 0.5, 0.25)
    norm = sum(v * v for v in n) ** 0.5
    n = tuple(v / norm for v in n)
    top = sum(n)
    pos = top * (step + 1) / (steps + 1)

    def inside(f: Forest, tree: int, e: Element) -> bool:
        cx, cy, cz = f.cmesh.kernel(tree).centroid(e)
        d = (n[0] * cx + n[1] * cy + n[2] * cz) / ROOT_LEN - pos
        return abs(d) < width / 2

    def cb(f: Forest, tree: int, elems: Sequence[Element]) -> int:
        e = elems[0]
        if len(elems) > 1 and e.level > base and not any(inside(f, tree, x) for x in elems):
            return COARSEN
        if e.level < base + depth and inside(f, tree, e):
            return REFINE
        return KEEP

    return cb


def _types(c: Criterion, step: int, steps: int, base: int, seed: int) -> AdaptCallback:
    wanted = {int(v) for v in c.params.get("list", "0.2.4.6").split(".")}

    def cb(f: Forest, tree: int, elems: Sequence[Element]) -> int:
        e = elems[0]
        if f.cmesh.shapes[tree] is TreeShape.PYRAMID:
            return REFINE if e.etype in wanted else KEEP
        # other shapes: every second element in SFC order within its parent
        return REFINE if e.level == 0 or f.cmesh.kernel(tree).local_index(e) % 2 == 0 else KEEP

    return cb


def _random(c: Criterion, step: int, steps: int, base: int, seed: int) -> AdaptCallback:
    frac = c.get("fraction", 0.2)
    salt = f"{seed}:{step}".encode()

    def cb(f: Forest, tree: int, elems: Sequence[Element]) -> int:
        e = elems[0]
        h = hashlib.blake2b(repr((tree, tuple(e))).encode(), digest_size=8, key=salt[:64]).digest()
        return REFINE if int.from_bytes(h, "little") < frac * 2**64 else KEEP

    return cb


def _none(c: Criterion, step: int, steps: int, base: int, seed: int) -> AdaptCallback:
    return lambda f, tree, elems: KEEP


CRITERIA: dict[str, Callable[..., AdaptCallback]] = {
    "wall": _wall,
    "types": _types,
    "random": _random,
    "none": _none,
}


# -- subcommands ---------------------------------------------------------------


def _load(args: argparse.Namespace) -> CoarseMesh:
    if args.level < 0 or args.level > L_MAX:
        raise ConfigError(f"--level must lie in [0, {L_MAX}]")
    if args.procs < 1:
        raise ConfigError("--procs must be at least 1")
    return cmesh_from_spec(args.cmesh)


def _emit(lines: list[str], path: str | None) -> None:
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if path:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_new(args: argparse.Namespace) -> list[str]:
    cm = _load(args)

    def prog(rank: int, comm: pg.Comm, _state: object) -> tuple[Forest, float, object, int]:
        comm.barrier()
        t0 = time.perf_counter()
        f = forest_new(cm, args.level, comm)
        comm.barrier()
        dt = time.perf_counter() - t0
        return f, dt, forest_stats(f, comm), forest_checksum(f, comm)

    res, _ = pg.run(args.procs, prog)
    forests = [r[0] for r in res]
    lines = res[0][2].lines()
    lines += [f"checksum {res[0][3]:016x}", f"time_new {res[0][1]:.6f}"]
    if args.export:
        npts, ncells = export_vtk(forests, args.export)
        lines += [f"vtk_points {npts}", f"vtk_cells {ncells}"]
    return lines


def cmd_adapt_loop(args: argparse.Namespace) -> list[str]:
    cm = _load(args)
    crit = parse_criterion(args.criterion)
    steps = args.iterations
    if steps < 0:
        raise ConfigError("--iterations must be non-negative")

    def prog(rank: int, comm: pg.Comm, _state: object):
        clock = {"new": 0.0, "adapt": 0.0, "partition": 0.0, "ghost": 0.0}
        out = []

        def timed(key: str, fn, *a):
            comm.barrier()
            t0 = time.perf_counter()
            r = fn(*a)
            comm.barrier()
            clock[key] += time.perf_counter() - t0
            return r

        f = timed("new", forest_new, cm, args.level, comm)
        for step in range(steps):
            cb = CRITERIA[crit.name](crit, step, steps, args.level, args.seed)
            f = timed("adapt", forest_adapt, f, cb, comm, 2 if crit.name == "wall" else 1)
            f = timed("partition", forest_partition, f, comm)
            g = timed("ghost", forest_ghost, f, comm)
            st = forest_stats(f, comm)
            ghosts = comm.allreduce(g.num_ghosts)
            out.append((st, ghosts, forest_checksum(f, comm)))
        return f, clock, out

    res, _ = pg.run(args.procs, prog)
    f0, clock, out = res[0]
    lines = []
    for step, (st, ghosts, chk) in enumerate(out):
        imb = max(st.rank_leaves) - min(st.rank_leaves)
        lines.append(
            f"iteration {step} leaves {st.global_leaves} imbalance {imb} ghosts {ghosts} "
            f"max_level {st.max_level} checksum {chk:016x}"
        )
    total = sum(clock.values())
    lines += [f"time_{k} {v:.6f}" for k, v in clock.items()]
    lines.append(f"time_total {total:.6f}")
    lines.append(f"adapt_share {clock['adapt'] / total if total else 0.0:.4f}")
    if args.export:
        npts, ncells = export_vtk([r[0] for r in res], args.export)
        lines += [f"vtk_points {npts}", f"vtk_cells {ncells}"]
    return lines


BENCH_OPS = ("child", "parent", "face_neighbor", "sfc_index", "linear_id")


def bench_table(iterations: int, level: int = 6) -> list[tuple[str, str, int, float]]:
    """(shape, operation, count, ns per op) for every shape and kernel operation."""
    if iterations < 1:
        raise ConfigError("--iterations must be at least 1")
    rows = []
    for shape in TreeShape:
        k = shape_kernel(shape)
        total = k.num_descendants_at_level(k.root, level)
        sample = [k.element_from_linear_id(level, (i * 7919) % total) for i in range(min(iterations, 512))]
        elems = [sample[i % len(sample)] for i in range(iterations)]
        nfaces = [k.num_faces(e) for e in elems]
        ops: dict[str, Callable[[], None]] = {
            "child": lambda: [k.child(e, 0) for e in elems],
            "parent": lambda: [k.parent(e) for e in elems],
            "face_neighbor": lambda: [k.face_neighbor(e, i % nf) for i, (e, nf) in enumerate(zip(elems, nfaces))],
            "sfc_index": lambda: [k.sfc_index(e) for e in elems],
            "linear_id": lambda: [k.linear_id(e) for e in elems],
        }
        for name in BENCH_OPS:
            t0 = time.perf_counter()
            ops[name]()
            dt = time.perf_counter() - t0
            rows.append((shape.value, name, iterations, dt * 1e9 / iterations))
    return rows


def cmd_bench(args: argparse.Namespace) -> list[str]:
    rows = bench_table(args.iterations)
    return ["shape\toperation\tcount\tns_per_op"] + [f"{s}\t{o}\t{n}\t{t:.1f}" for s, o, n, t in rows]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hybamr", description="Hybrid hex/tet/pyramid forest driver.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--cmesh", default="builtin:hybrid", help="path or builtin:NAME")
        p.add_argument("--level", type=int, default=2)
        p.add_argument("--procs", type=int, default=4)
        p.add_argument("--export", help="write a legacy VTK file")
        p.add_argument("--stats", help="also write the key/value output here")
        p.add_argument("--seed", type=int, default=0)

    p_new = sub.add_parser("new", help="uniform forest")
    common(p_new)
    p_loop = sub.add_parser("adapt-loop", help="New, then (Adapt, Partition, Ghost) repeatedly")
    common(p_loop)
    p_loop.add_argument("--iterations", type=int, default=5)
    p_loop.add_argument("--criterion", default="wall:width=0.1,depth=2")
    p_bench = sub.add_parser("bench", help="per-operation timings")
    p_bench.add_argument("--iterations", type=int, default=10000)
    p_bench.add_argument("--stats", help="also write the table here")
    p_bench.add_argument("--seed", type=int, default=0)
    return ap


COMMANDS = {"new": cmd_new, "adapt-loop": cmd_adapt_loop, "bench": cmd_bench}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        lines = COMMANDS[args.command](args)
    except (ConfigError, CmeshError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(lines, args.stats)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
