"""Deterministic in-process stand-in for a group of message-passing ranks.

Every rank runs its program in its own thread. Messages are buffered and are
matched on (source, destination, tag) in send order, so the outcome never
depends on thread scheduling. The run fails loudly on a deadlock and on
messages that were sent but never received.
"""

from __future__ import annotations

import sys
import threading
from array import array
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np


class ProcGroupError(RuntimeError):
    pass


class DeadlockError(ProcGroupError):
    pass


class UndeliveredMessageError(ProcGroupError):
    pass


@dataclass(frozen=True)
class MessageRecord:
    src: int
    dst: int
    tag: int
    nbytes: int


@dataclass
class GroupRun:
    size: int
    log: list[MessageRecord] = field(default_factory=list)

    def dump(self) -> str:
        return "".join(f"{m.src} {m.dst} {m.tag} {m.nbytes}\n" for m in self.log)

    def write(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(self.dump())

    @property
    def total_bytes(self) -> int:
        return sum(m.nbytes for m in self.log)


def pack_ints(values: Iterable[int] | np.ndarray) -> bytes:
    """Little-endian int64 framing used for every payload in this package."""
    if isinstance(values, array) and values.itemsize == 8 and sys.byteorder == "little":
        return values.tobytes()
    return np.asarray(values, dtype="<i8").tobytes()


def unpack_ints(payload: bytes) -> np.ndarray:
    return np.frombuffer(payload, dtype="<i8")


class _Shared:
    def __init__(self, size: int) -> None:
        self.size = size
        self.cond = threading.Condition()
        self.boxes: dict[tuple[int, int, int], deque[bytes]] = {}
        self.records: list[tuple[int, int, MessageRecord]] = []
        self.send_seq = [0] * size
        self.alive = size
        self.waiting: dict[int, tuple[str, Callable[[], bool]]] = {}
        self.failure: BaseException | None = None
        self.slots: dict[int, dict[str, Any]] = {}


class Comm:
    """Handle a rank program uses to talk to the rest of the group."""

    def __init__(self, shared: _Shared, rank: int) -> None:
        self._s = shared
        self.rank = rank
        self.size = shared.size
        self._coll = 0

    # -- blocking helper ---------------------------------------------------
    def _wait(self, what: str, ready: Callable[[], bool]) -> None:
        s = self._s
        while True:
            if s.failure is not None:
                raise ProcGroupError(f"rank {self.rank} aborted: {s.failure}")
            if ready():
                return
            s.waiting[self.rank] = (what, ready)
            try:
                if len(s.waiting) == s.alive and not any(p() for _, p in s.waiting.values()):
                    desc = "; ".join(f"rank {r} waits for {w}" for r, (w, _) in sorted(s.waiting.items()))
                    s.failure = DeadlockError(desc)
                    s.cond.notify_all()
                    raise s.failure
                s.cond.wait()
            finally:
                s.waiting.pop(self.rank, None)

    # -- point to point ----------------------------------------------------
    def send(self, dst: int, tag: int, payload: bytes) -> None:
        if not 0 <= dst < self.size:
            raise ProcGroupError(f"destination {dst} outside [0, {self.size})")
        payload = bytes(payload)
        s = self._s
        with s.cond:
            s.boxes.setdefault((self.rank, dst, tag), deque()).append(payload)
            seq = s.send_seq[self.rank]
            s.send_seq[self.rank] += 1
            s.records.append((self.rank, seq, MessageRecord(self.rank, dst, tag, len(payload))))
            s.cond.notify_all()

    def recv(self, src: int, tag: int) -> bytes:
        if not 0 <= src < self.size:
            raise ProcGroupError(f"source {src} outside [0, {self.size})")
        s = self._s
        key = (src, self.rank, tag)
        with s.cond:
            self._wait(f"message from {src} tag {tag}", lambda: bool(s.boxes.get(key)))
            return s.boxes[key].popleft()

    def recv_range(
        self, first: int, last: int, tag: int, include: Callable[[int], bool] | None = None
    ) -> dict[int, bytes]:
        """One message from every source in [first, last] (optionally filtered)."""
        return {q: self.recv(q, tag) for q in range(first, last + 1) if include is None or include(q)}

    # -- collectives -------------------------------------------------------
    def _collective(self, kind: str, value: Any) -> list[Any]:
        s = self._s
        seq = self._coll
        self._coll += 1
        with s.cond:
            slot = s.slots.setdefault(seq, {"kind": kind, "vals": [None] * self.size, "n": 0, "read": 0})
            if slot["kind"] != kind:
                s.failure = ProcGroupError(
                    f"collective mismatch at step {seq}: {slot['kind']} vs {kind} on rank {self.rank}"
                )
                s.cond.notify_all()
                raise s.failure
            slot["vals"][self.rank] = value
            slot["n"] += 1
            if slot["n"] == self.size:
                s.cond.notify_all()
            self._wait(f"collective {kind} #{seq}", lambda: slot["n"] == self.size)
            vals = slot["vals"]
            slot["read"] += 1
            if slot["read"] == self.size:
                del s.slots[seq]
            return list(vals)

    def allgather(self, value: Any) -> list[Any]:
        return self._collective("allgather", value)

    def exclusive_prefix_scan(self, value: int) -> int:
        vals = self._collective("scan", int(value))
        return sum(vals[: self.rank])

    def allreduce(self, value: Any, op: Callable[[Sequence[Any]], Any] = sum) -> Any:
        return op(self._collective("allreduce", value))

    def barrier(self) -> None:
        self._collective("barrier", None)


RankProgram = Callable[[int, Comm, Any], Any]


def run(size: int, program: RankProgram, states: Sequence[Any] | None = None) -> tuple[list[Any], GroupRun]:
    """Run ``program(rank, comm, state)`` on ``size`` ranks; returns (per-rank results, run record)."""
    if size < 1:
        raise ProcGroupError("a process group needs at least one rank")
    if states is not None and len(states) != size:
        raise ProcGroupError(f"{len(states)} rank states given for {size} ranks")
    shared = _Shared(size)
    results: list[Any] = [None] * size
    errors: list[BaseException | None] = [None] * size

    def body(rank: int) -> None:
        comm = Comm(shared, rank)
        try:
            results[rank] = program(rank, comm, None if states is None else states[rank])
        except BaseException as exc:  # reported after join
            errors[rank] = exc
            with shared.cond:
                if shared.failure is None:
                    shared.failure = exc
        finally:
            with shared.cond:
                shared.alive -= 1
                shared.cond.notify_all()
                # the ranks still waiting may now be stuck for good
                w = shared.waiting
                if shared.failure is None and w and len(w) == shared.alive and not any(
                    p() for _, p in w.values()
                ):
                    desc = "; ".join(f"rank {r} waits for {d}" for r, (d, _) in sorted(w.items()))
                    shared.failure = DeadlockError(desc)

    if size == 1:
        body(0)
    else:
        threads = [threading.Thread(target=body, args=(r,), daemon=True) for r in range(size)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

    if shared.failure is not None:
        # prefer the exception that started the failure over follow-up aborts
        first = shared.failure
        if any(e is first for e in errors) or isinstance(first, DeadlockError):
            raise first
        raise next(e for e in errors if e is not None)
    left = [(k, len(v)) for k, v in sorted(shared.boxes.items()) if v]
    if left:
        desc = ", ".join(f"{n} from {k[0]} to {k[1]} tag {k[2]}" for k, n in left)
        raise UndeliveredMessageError(f"undelivered messages: {desc}")
    log = [r for _, _, r in sorted(shared.records, key=lambda t: (t[0], t[1]))]
    return results, GroupRun(size, log)
