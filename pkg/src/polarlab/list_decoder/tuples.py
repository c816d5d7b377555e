"""Splitting a code into single-unreliable-bit tuples (SUBTs)."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..polar_code import BitClass, CodeSpec, log2_exact


class TupleClass(enum.IntEnum):
    SP1 = 0
    SP2_FROZEN = 1
    SP2_RELIABLE = 2
    RATE_INV_T = 3

    @property
    def is_sp2(self) -> bool:
        return self in (TupleClass.SP2_FROZEN, TupleClass.SP2_RELIABLE)


@dataclass(frozen=True)
class Tuple:
    """A leaf of the trimmed schedule tree.

    ``unreliable_pos`` is the index of the Unreliable bit inside the tuple,
    or ``None`` for SP2 tuples.
    """

    offset: int
    length: int
    cls: TupleClass
    unreliable_pos: int | None = None

    @property
    def t(self) -> int:
        return self.length.bit_length() - 1

    @property
    def stop(self) -> int:
        return self.offset + self.length


def classify_block(classes) -> tuple[TupleClass, int | None] | None:
    """Tuple class of a block of bit classes, or ``None`` if not admissible.

    An SP1 block is decoded as a single-parity-check code whose parity is the
    first bit of the block, so its Unreliable bit must sit at position 0.
    """
    c = np.asarray(classes)
    n_u = int(np.count_nonzero(c == BitClass.UNRELIABLE))
    n_f = int(np.count_nonzero(c == BitClass.FROZEN))
    T = c.size
    if n_u == 0:
        if n_f == T:
            return TupleClass.SP2_FROZEN, None
        if n_f == 0:
            return TupleClass.SP2_RELIABLE, None
        return None
    if n_u > 1:
        return None
    pos = int(np.flatnonzero(c == BitClass.UNRELIABLE)[0])
    if T == 1:
        return TupleClass.SP1, 0
    if n_f == T - 1:
        return TupleClass.RATE_INV_T, pos
    if n_f == 0 and pos == 0:
        return TupleClass.SP1, 0
    return None


def _divide(classes: np.ndarray, offset: int, out: list) -> None:
    found = classify_block(classes)
    if found is not None:
        cls, pos = found
        out.append(Tuple(offset, classes.size, cls, pos))
        return
    h = classes.size // 2
    _divide(classes[:h], offset, out)
    _divide(classes[h:], offset + h, out)


def tuple_divide(spec: CodeSpec, M: int) -> list[Tuple]:
    """Recursively split every aligned M-bit block until each leaf is admissible.

    Tuples come back in decoding order and exactly tile ``[0, N)``.
    """
    log2_exact(M)
    if M > spec.N:
        raise ValueError(f"M={M} exceeds the code length {spec.N}")
    bc = spec.bit_class
    out: list[Tuple] = []
    for start in range(0, spec.N, M):
        _divide(bc[start : start + M], start, out)
    return out


def trimmed_node_count(tuples, M: int) -> int:
    """Non-root nodes of all trimmed M-bit block subtrees.

    A block split into ``k`` leaves is a full binary tree with ``2k - 1``
    nodes, so it contributes ``2k - 2``.
    """
    leaves = Counter(tp.offset // M for tp in tuples)
    return sum(2 * k - 2 for k in leaves.values())


@dataclass(frozen=True)
class Census:
    """Tuple counts keyed by length, as printed in the SUBT table."""

    M: int
    singles: int
    by_length: dict  # length -> {"SP1": n, "SP2": n, "rate-1/T": n}
    n_leaf: int
    n_sp1: int
    n_sp2: int
    n_node: int

    def rows(self) -> list[tuple[str, int]]:
        out = [("1", self.singles)]
        for length in sorted(self.by_length):
            for key in ("SP1", "SP2", "rate-1/T"):
                out.append((f"{length}/{key}", self.by_length[length][key]))
        return out


def census(tuples, M: int) -> Census:
    by_length: dict = {}
    singles = n_sp1 = n_sp2 = 0
    for tp in tuples:
        if tp.cls == TupleClass.SP1:
            n_sp1 += 1
        elif tp.cls.is_sp2:
            n_sp2 += 1
        if tp.length == 1:
            singles += 1
            continue
        row = by_length.setdefault(tp.length, {"SP1": 0, "SP2": 0, "rate-1/T": 0})
        key = "SP1" if tp.cls == TupleClass.SP1 else "SP2" if tp.cls.is_sp2 else "rate-1/T"
        row[key] += 1
    length = 2
    while length <= M:
        by_length.setdefault(length, {"SP1": 0, "SP2": 0, "rate-1/T": 0})
        length *= 2
    return Census(M=M, singles=singles, by_length=by_length, n_leaf=len(tuples),
                  n_sp1=n_sp1, n_sp2=n_sp2, n_node=trimmed_node_count(tuples, M))
