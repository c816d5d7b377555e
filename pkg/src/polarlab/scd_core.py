"""Successive-cancellation decoding kernels and the depth-first schedule.

LLRs are carried as float64. Quantized decoding keeps them integral and
saturates at ``cap`` (31 for 6-bit LLRs); passing ``cap=inf`` gives the
floating-point decoder through the same code.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .channel import LLR_MAX
from .polar_code import CodeSpec, kron_encode

OP_F, OP_G, OP_LEAF, OP_STORE, OP_COMBINE = 0, 1, 2, 3, 4
OP_NAMES = ("F", "G", "LEAF", "STORE", "COMBINE")


def f_exact(a: float, b: float) -> float:
    """Exact check-node (boxplus) update, floating point only."""
    if math.isinf(a) and math.isinf(b):
        return math.copysign(math.inf, a * b)
    if math.isinf(b):
        return a if b > 0 else -a
    if math.isinf(a):
        return b if a > 0 else -b
    p = math.tanh(a / 2.0) * math.tanh(b / 2.0)
    p = min(max(p, -1.0 + 1e-16), 1.0 - 1e-16)
    return 2.0 * math.atanh(p)


@njit(cache=True)
def hard_decision(llr):
    """Theta: 0 for a strictly positive LLR, 1 otherwise."""
    return 0 if llr > 0 else 1


@njit(cache=True)
def f_minsum(a, b):
    m = min(abs(a), abs(b))
    return -m if (a < 0) != (b < 0) else m


@njit(cache=True)
def g_node(a, b, ps, cap=LLR_MAX):
    v = b - a if ps else b + a
    if v > cap:
        return cap
    if v < -cap:
        return -cap
    return v


@njit(cache=True)
def glah_pair(a, b, cap=LLR_MAX):
    """F output plus both speculative G outputs (partial sum 0 and 1)."""
    return f_minsum(a, b), g_node(a, b, 0, cap), g_node(a, b, 1, cap)


def build_schedule(n: int, leaves) -> np.ndarray:
    """Depth-first op list for a tree whose leaves are ``(offset, t)`` pairs.

    Rows are ``(op, s, offset)``. ``F(s)`` / ``G(s)`` fill stage ``s - 1``
    from stage ``s``; ``STORE(s)`` saves the finished left child of a stage-s
    node; ``COMBINE(s)`` forms the node's partial sums from both children.
    ``LEAF`` rows carry the leaf stage ``t`` in the ``s`` column.
    """
    leaf_set = {(int(o), int(t)) for o, t in leaves}
    ops: list[tuple[int, int, int]] = []

    def visit(s, offset):
        if (offset, s) in leaf_set:
            ops.append((OP_LEAF, s, offset))
            return
        if s == 0:
            raise ValueError(f"bit {offset} is not covered by any leaf")
        h = 1 << (s - 1)
        ops.append((OP_F, s, offset))
        visit(s - 1, offset)
        ops.append((OP_STORE, s, offset))
        ops.append((OP_G, s, offset))
        visit(s - 1, offset + h)
        ops.append((OP_COMBINE, s, offset))

    visit(n, 0)
    return np.array(ops, dtype=np.int64).reshape(-1, 3)


def bit_schedule(n: int) -> np.ndarray:
    return build_schedule(n, [(i, 0) for i in range(1 << n)])


def scd_decode(llrs, spec: CodeSpec, glah: bool = False, cap: float = LLR_MAX,
               check_partial_sums: bool = False) -> np.ndarray:
    """Plain successive-cancellation decoding of one frame.

    With ``glah=True`` every F step also evaluates both candidate G outputs
    and the later G step only selects between them by the partial sum.
    ``check_partial_sums`` asserts at every G step that the stored partial
    sums equal the re-encoded decoded prefix.
    """
    alpha_n = np.asarray(llrs, dtype=float)
    if alpha_n.shape != (spec.N,):
        raise ValueError(f"expected {spec.N} LLRs, got shape {alpha_n.shape}")
    n = spec.n
    frozen = spec.frozen_mask
    alpha = [np.zeros(1 << s) for s in range(n)] + [alpha_n]
    beta = [np.zeros(1 << s, dtype=np.uint8) for s in range(n + 1)]
    look0 = [np.zeros(1 << s) for s in range(n)]
    look1 = [np.zeros(1 << s) for s in range(n)]
    u_hat = np.zeros(spec.N, dtype=np.uint8)
    for op, s, off in bit_schedule(n):
        if op == OP_LEAF:
            bit = 0 if frozen[off] else hard_decision(alpha[0][0])
            u_hat[off] = bit
            beta[0][0] = bit
            continue
        h = 1 << (s - 1)
        if op == OP_F:
            a, b = alpha[s][:h], alpha[s][h:]
            m = np.minimum(np.abs(a), np.abs(b))
            alpha[s - 1][:] = np.where((a < 0) != (b < 0), -m, m)
            if glah:
                look0[s - 1][:] = np.clip(a + b, -cap, cap)
                look1[s - 1][:] = np.clip(b - a, -cap, cap)
        elif op == OP_STORE:
            beta[s][:h] = beta[s - 1]
        elif op == OP_G:
            ps = beta[s][:h]
            if check_partial_sums:
                assert np.array_equal(ps, kron_encode(u_hat[off : off + h]))
            if glah:
                alpha[s - 1][:] = np.where(ps == 1, look1[s - 1], look0[s - 1])
            else:
                a, b = alpha[s][:h], alpha[s][h:]
                alpha[s - 1][:] = np.clip(np.where(ps == 1, b - a, b + a), -cap, cap)
        else:  # OP_COMBINE
            beta[s][:h] ^= beta[s - 1]
            beta[s][h:] = beta[s - 1]
    return u_hat
