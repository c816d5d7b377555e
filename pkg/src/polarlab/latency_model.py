"""Cycle counts for the list decoder architecture.

Stages are numbered by the LLRs a node produces: a stage-s node outputs
``2^s`` LLRs and there are ``2^(n-s)`` of them (half F, half G). With ``P``
processing elements a stage is fully parallel when ``2^s <= P``; there the
G-node is looked ahead together with its F-node so only F-nodes cost a
cycle. Semi-parallel stages cost ``2^(s-p)`` cycles per node.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from .list_decoder.tuples import TupleClass, trimmed_node_count, tuple_divide
from .polar_code import CodeSpec, log2_exact
from .scd_core import OP_F, OP_G, OP_LEAF, build_schedule

DEFAULT_P = 64
SPLIT_STAGE = 3


def d_trd(N: int, P: int = DEFAULT_P) -> int:
    """Traditional semi-parallel SCD: 2N + (N/P) log2(N / 4P)."""
    return 2 * N + (N // P) * log2_exact(N // (4 * P))


def pglah_closed_form(N: int, P: int = DEFAULT_P) -> int:
    """Whole-tree P-GLAH latency: N + N/(2P) + (N/P) log2(N / 4P)."""
    if P > N // 4:
        raise ValueError("closed form needs P <= N/4")
    return N + N // (2 * P) + (N // P) * log2_exact(N // (4 * P))


def stage_cycles(n: int, p: int, s: int) -> int:
    """P-GLAH cycles spent on all nodes of output stage ``s``."""
    nodes = 1 << (n - s)
    if s <= p:
        return nodes // 2
    return nodes * (1 << (s - p))


def scd_cycles(N: int, P: int = DEFAULT_P, m: int = 0,
               split: int = SPLIT_STAGE) -> tuple[int, int]:
    """SCD cycles of stages ``m .. n-1`` split into ``(below split, at or above)``."""
    n, p = log2_exact(N), log2_exact(P)
    if m > p:
        raise ValueError("m > log2(P) is not supported")
    below = sum(stage_cycles(n, p, s) for s in range(m, min(split, n)))
    above = sum(stage_cycles(n, p, s) for s in range(max(m, split), n))
    return below, above


def traditional_cycles(N: int, lo: int, hi: int) -> int:
    """Traditional schedule (one cycle per node) for output stages lo..hi-1,
    fully parallel nodes only."""
    return sum(1 << (log2_exact(N) - s) for s in range(lo, hi))


def _node_cost(n, p, m, op, s_out):
    if s_out > p:
        return 1 << (s_out - p)
    if s_out <= m:
        return 0
    return 1 if op == OP_F else 0


def scd_cycles_walk(N: int, P: int = DEFAULT_P, m: int = 0,
                    split: int = SPLIT_STAGE) -> tuple[int, int]:
    """Same as :func:`scd_cycles` by walking the depth-first schedule."""
    n, p = log2_exact(N), log2_exact(P)
    M = 1 << m
    ops = build_schedule(n, [(o, m) for o in range(0, N, M)])
    below = above = 0
    for op, s, _ in ops.tolist():
        if op not in (OP_F, OP_G):
            continue
        s_out = s - 1
        if s_out > p:
            cost = 1 << (s_out - p)
        else:
            cost = 1 if op == OP_F else 0
        if s_out < split:
            below += cost
        else:
            above += cost
    return below, above


def lm_cycles(tuples, simplified: bool = True, M: int | None = None) -> int:
    """List-management cycles of a tuple set.

    Every leaf costs three cycles, an SP1 leaf (including a single
    unreliable bit) saves one and an SP2 leaf saves two. The non-simplified
    count adds one cycle per non-root node of the trimmed block trees, which
    needs the block size ``M``.
    """
    tuples = list(tuples)
    n_sp1 = sum(tp.cls == TupleClass.SP1 for tp in tuples)
    n_sp2 = sum(tp.cls.is_sp2 for tp in tuples)
    cycles = 3 * len(tuples) - n_sp1 - 2 * n_sp2
    if simplified:
        return cycles
    if M is None:
        raise ValueError("the non-simplified count needs M")
    return cycles + trimmed_node_count(tuples, M)


def _tuple_lm(tp) -> int:
    return 3 - (tp.cls == TupleClass.SP1) - 2 * tp.cls.is_sp2


def fine_tune_saving(N: int, M: int) -> int:
    """Stage-m F-nodes merged into the tuple update: N / 2M."""
    return N // (2 * M)


def zero_prefix_saving(spec: CodeSpec, tuples, P: int = DEFAULT_P, M: int | None = None) -> int:
    """Cycles skipped because every bit before the first information bit is frozen.

    The regular schedule up to the tuple holding the first information bit
    costs its SCD nodes at stages >= m (stage-m F-nodes already merged) plus
    one LM cycle per all-frozen tuple before it. Jumping straight there costs
    only the nodes on the root-to-tuple path, where a stage-m G-node still
    takes one cycle. The saving is the difference; for an all-frozen code
    the whole schedule is skipped.
    """
    tuples = list(tuples)
    if M is None:
        M = max(tp.length for tp in tuples)
    n, p, m = spec.n, log2_exact(P), log2_exact(M)
    first = spec.first_info_index
    if first is None:
        return total_latency(spec, M, P, d_zero_override=0).total
    target = next(tp for tp in tuples if tp.offset <= first < tp.stop)
    ops = build_schedule(n, [(tp.offset, tp.t) for tp in tuples])
    normal = sum(_tuple_lm(tp) for tp in tuples if tp.stop <= target.offset)
    for op, s, off in ops.tolist():
        if op == OP_LEAF:
            if off == target.offset:
                break
            continue
        if op in (OP_F, OP_G) and s - 1 >= m:
            normal += _node_cost(n, p, m, op, s - 1)
    direct = 0
    for s_out in range(n - 1, m - 1, -1):
        is_right = (first >> s_out) & 1
        if s_out > p:
            direct += 1 << (s_out - p)
        elif s_out > m:
            direct += 1
        else:
            direct += is_right
    return normal - direct


@dataclass(frozen=True)
class LatencyReport:
    N: int
    P: int
    M: int
    m: int
    lm_cycles: int
    scd_below_m: int
    scd_at_or_above_m: int
    d_fine: int
    d_zero: int
    total: int

    def __post_init__(self):
        assert self.total == (self.lm_cycles + self.scd_below_m + self.scd_at_or_above_m
                              - self.d_fine - self.d_zero)

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def total_latency(spec: CodeSpec, M: int, P: int = DEFAULT_P,
                  d_zero_override: int | None = None) -> LatencyReport:
    m = log2_exact(M)
    tuples = tuple_divide(spec, M)
    lm = lm_cycles(tuples)
    below, above = scd_cycles(spec.N, P, m)
    fine = fine_tune_saving(spec.N, M)
    if d_zero_override is None:
        zero = zero_prefix_saving(spec, tuples, P, M)
    else:
        zero = d_zero_override
    total = lm + below + above - fine - zero
    return LatencyReport(N=spec.N, P=P, M=M, m=m, lm_cycles=lm, scd_below_m=below,
                         scd_at_or_above_m=above, d_fine=fine, d_zero=zero, total=total)


# Published list-management cycles of the selective-expansion DTS decoder;
# its LM count depends on a code construction that is not reproducible here.
SE_DTS_LM_CYCLES = 422


@dataclass(frozen=True)
class ReferenceColumn:
    name: str
    lm_cycles: int
    scd_below: int
    scd_at_or_above: int

    @property
    def total(self) -> int:
        return self.lm_cycles + self.scd_below + self.scd_at_or_above


def reference_columns(spec: CodeSpec, P: int = DEFAULT_P) -> list[ReferenceColumn]:
    """Baseline decoders on the same code.

    The conventional decoder spends one LM cycle per information bit and a
    traditional schedule below the split stage; the selective-expansion DTS
    decoder decides bits at stage 1 with its published LM count.
    """
    N = spec.N
    n, p = spec.n, log2_exact(P)
    above_trad = traditional_cycles(N, SPLIT_STAGE, p + 1) + (n - 1 - p) * (N // P)
    return [
        ReferenceColumn("conventional", spec.K, traditional_cycles(N, 0, SPLIT_STAGE), above_trad),
        ReferenceColumn("SE-DTS", SE_DTS_LM_CYCLES, traditional_cycles(N, 1, SPLIT_STAGE),
                        above_trad),
    ]


def format_table(spec: CodeSpec, Ms=(2, 4, 8), P: int = DEFAULT_P) -> str:
    reports = [total_latency(spec, M, P) for M in Ms]
    refs = reference_columns(spec, P)
    heads = [r.name for r in refs] + [f"M={r.M}" for r in reports]
    rows = [
        ("LM", [r.lm_cycles for r in refs] + [r.lm_cycles for r in reports]),
        (f"SCD stage<{SPLIT_STAGE}", [r.scd_below for r in refs] + [r.scd_below_m for r in reports]),
        (f"SCD stage>={SPLIT_STAGE}",
         [r.scd_at_or_above for r in refs] + [r.scd_at_or_above_m for r in reports]),
        ("D_fine", [0 for _ in refs] + [r.d_fine for r in reports]),
        ("D_zero", [0 for _ in refs] + [r.d_zero for r in reports]),
        ("total", [r.total for r in refs] + [r.total for r in reports]),
    ]
    width = max(len(h) for h in heads) + 2
    lines = ["".ljust(14) + "".join(h.rjust(width) for h in heads)]
    for name, vals in rows:
        lines.append(name.ljust(14) + "".join(str(v).rjust(width) for v in vals))
    return "\n".join(lines)
