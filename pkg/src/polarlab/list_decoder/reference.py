"""Slow list decoder that deep-copies every path's memories on expansion.

It shares the leaf kernels and pruning rules with the compiled engine but
none of its memory management, so agreement between the two checks that
lazy copying is transparent.
"""

from __future__ import annotations

import copy

import numpy as np

from ..polar_code import BitClass, kron_encode
from .decoder import ListDecoder, ListDecodeResult, Scheme
from .pmu import dts_select, exact_select, mismatch_penalty, rate1t_candidates, sp1_candidates
from .tuples import TupleClass


class _Path:
    def __init__(self, N):
        self.alpha = {}
        self.beta = {}
        self.pm = 0.0
        self.N = N


def _candidates(kind_cls, llrs, pos, info):
    T = llrs.size
    hd = (llrs <= 0).astype(np.uint8)
    if kind_cls == "mbd":
        idx = np.flatnonzero(info)
        out = []
        for c in range(1 << idx.size):
            u = np.zeros(T, dtype=np.uint8)
            for b, j in enumerate(idx):
                u[j] = (c >> (idx.size - 1 - b)) & 1
            v = kron_encode(u)
            out.append((mismatch_penalty(llrs, v), v))
        return out
    if kind_cls == TupleClass.SP2_FROZEN:
        v = np.zeros(T, dtype=np.uint8)
        return [(mismatch_penalty(llrs, v), v)]
    if kind_cls == TupleClass.SP2_RELIABLE:
        return [(0.0, hd)]
    va = np.zeros(T, dtype=np.uint8)
    vb = np.zeros(T, dtype=np.uint8)
    if kind_cls == TupleClass.SP1:
        da, db = sp1_candidates(llrs, va, vb)
    else:
        da, db = rate1t_candidates(llrs, pos, va, vb)
    return [(da, va), (db, vb)]


def reference_decode(dec: ListDecoder, llrs) -> ListDecodeResult:
    """Decode with the configuration of ``dec`` using deep-copied paths."""
    spec = dec.spec
    N, n, L = spec.N, spec.n, dec.L
    llr_cap, pm_cap = dec.llr_cap, dec.pm_cap
    leaves = {}
    for i in range(dec.leaf_kind.size):
        off, t = int(dec.leaf_offset[i]), int(dec.leaf_t[i])
        if dec.scheme == Scheme.FULL_MBD:
            cls = "mbd"
        else:
            cls = dec.tuples[i].cls
        leaves[(off, t)] = (cls, int(dec.leaf_pos[i]), dec.leaf_info[i, : 1 << t])
    root = _Path(N)
    root.alpha[n] = np.asarray(llrs, dtype=float).copy()
    paths = [root]

    def leaf(t, off, paths):
        cls, pos, info = leaves[(off, t)]
        expanded = []
        for l, p in enumerate(paths):
            for c, (pen, v) in enumerate(_candidates(cls, p.alpha[t], pos, info)):
                expanded.append((min(p.pm + pen, pm_cap), l, c, v))
        per_path = len(expanded) // len(paths)
        if per_path == 1:
            new = paths
            for p, (m, _, _, v) in zip(paths, expanded):
                p.pm = m
                p.beta[t] = v.copy()
            return new
        metrics = np.array([e[0] for e in expanded])
        if metrics.size <= L:
            keep = np.ones(metrics.size, dtype=bool)
        elif dec.mode == 2 and len(paths) == L:
            theta = np.sort(metrics.reshape(L, per_path).min(axis=1))
            keep = dts_select(metrics, L, theta[dec.at_index], theta[dec.rt_index])
        else:
            keep = exact_select(metrics, L)
        new = []
        for k in np.flatnonzero(keep):
            m, l, c, v = expanded[k]
            p = copy.deepcopy(paths[l])
            p.pm = m
            p.beta[t] = v.copy()
            new.append(p)
        return new

    def visit(s, off, paths):
        if (off, s) in leaves:
            return leaf(s, off, paths)
        h = 1 << (s - 1)
        for p in paths:
            a, b = p.alpha[s][:h], p.alpha[s][h:]
            m = np.minimum(np.abs(a), np.abs(b))
            p.alpha[s - 1] = np.where((a < 0) != (b < 0), -m, m)
        paths = visit(s - 1, off, paths)
        for p in paths:
            p.beta[("left", s)] = p.beta[s - 1].copy()
            a, b = p.alpha[s][:h], p.alpha[s][h:]
            ps = p.beta[("left", s)]
            p.alpha[s - 1] = np.clip(np.where(ps == 1, b - a, b + a), -llr_cap, llr_cap)
        paths = visit(s - 1, off + h, paths)
        for p in paths:
            right = p.beta[s - 1]
            p.beta[s] = np.concatenate([p.beta[("left", s)] ^ right, right])
        return paths

    paths = visit(n, 0, paths)
    u = kron_encode(np.array([p.beta[n] for p in paths]))
    pm = np.array([p.pm for p in paths])
    ok = spec.crc_ok(spec.extract(u))
    order = np.argsort(pm, kind="stable")
    passing = order[ok[order]]
    best = int(passing[0]) if passing.size else int(order[0])
    return ListDecodeResult(u_hat=u[best], passed=bool(ok[best]), metric=float(pm[best]), path=best)


__all__ = ["reference_decode", "BitClass"]
