"""Compiled list decoder core with lazy-copy stage memories.

Every stage ``s < n`` owns ``L`` LLR banks and ``L`` partial-sum banks; a path
holds one pointer per stage and per memory kind. Pruning only rewrites the
pointer rows, and a bank is duplicated the first time a path writes to it
while it is still shared (copy on write). The channel stage is read-only
and shared by every path.
"""

import numpy as np
from numba import njit

from ..scd_core import OP_COMBINE, OP_F, OP_G, OP_LEAF, OP_STORE
from .pmu import dts_select, exact_select, rate1t_candidates, sp1_candidates

KIND_FROZEN, KIND_RELIABLE, KIND_SP1, KIND_RATE1T, KIND_MBD = 0, 1, 2, 3, 4
MODE_KEEP, MODE_EXACT, MODE_DTS = 0, 1, 2


@njit(cache=True)
def _claim(ptr, ref, l, s):
    # give path l a private bank at stage s; returns (old, new) bank ids
    b = ptr[l, s]
    if ref[s, b] <= 1:
        return b, b
    for nb in range(ref.shape[1]):
        if ref[s, nb] == 0:
            ref[s, b] -= 1
            ref[s, nb] = 1
            ptr[l, s] = nb
            return b, nb
    raise RuntimeError("no free memory bank")


@njit(cache=True)
def _recount(ptr, ref, n_active):
    ref[:, :] = 0
    for j in range(n_active):
        for s in range(ref.shape[0]):
            ref[s, ptr[j, s]] += 1


@njit(cache=True)
def _kron_inplace(v, T):
    h = 1
    while h < T:
        for start in range(0, T, 2 * h):
            for j in range(start, start + h):
                v[j] ^= v[j + h]
        h *= 2


@njit(cache=True)
def decode_frame(chan, ops, leaf_kind, leaf_t, leaf_pos, leaf_info, L, mode,
                 at_index, rt_index, llr_cap, pm_cap, c_max, log_events,
                 ev_metrics, ev_meta, ev_thresh, ev_surv, ev_parent_pm):
    """Decode one frame.

    Returns ``(xhat, pm, n_active, n_events)``: the root partial sums (the
    codeword estimate) and metric of every active path, and the number of
    logged pruning events. ``mode`` selects exact sorting or double
    thresholding once the list is full; ``c_max`` bounds candidates per path.
    """
    N = chan.size
    n = 0
    while (1 << n) < N:
        n += 1
    alpha = np.zeros((L, 2 * N))
    beta = np.zeros((L, 2 * N), dtype=np.uint8)
    aptr = np.zeros((L, n + 1), dtype=np.int64)
    bptr = np.zeros((L, n + 1), dtype=np.int64)
    aref = np.zeros((n + 1, L), dtype=np.int64)
    bref = np.zeros((n + 1, L), dtype=np.int64)
    aref[:, 0] = 1
    bref[:, 0] = 1
    alpha[0, N - 1 : 2 * N - 1] = chan
    pm = np.zeros(L)
    n_active = 1

    e_max = L * c_max
    t_max = leaf_info.shape[1]
    cand_pm = np.zeros(e_max)
    cand_v = np.zeros((e_max, t_max), dtype=np.uint8)
    theta = np.zeros(L)
    new_aptr = np.zeros_like(aptr)
    new_bptr = np.zeros_like(bptr)
    new_pm = np.zeros(L)
    src = np.zeros(L, dtype=np.int64)
    llrs = np.zeros(t_max)
    ub = np.zeros(t_max, dtype=np.uint8)
    hd = np.zeros(t_max, dtype=np.uint8)
    leaf = 0
    n_events = 0

    for row in range(ops.shape[0]):
        op = ops[row, 0]
        s = ops[row, 1]
        if op == OP_F or op == OP_G:
            h = 1 << (s - 1)
            base_in = (1 << s) - 1
            base_out = h - 1
            for l in range(n_active):
                a_in = aptr[l, s]
                _claim(aptr, aref, l, s - 1)
                a_out = aptr[l, s - 1]
                b_ps = bptr[l, s]
                for j in range(h):
                    a = alpha[a_in, base_in + j]
                    b = alpha[a_in, base_in + h + j]
                    if op == OP_F:
                        m = min(abs(a), abs(b))
                        alpha[a_out, base_out + j] = -m if (a < 0) != (b < 0) else m
                    else:
                        v = b - a if beta[b_ps, base_in + j] else b + a
                        if v > llr_cap:
                            v = llr_cap
                        elif v < -llr_cap:
                            v = -llr_cap
                        alpha[a_out, base_out + j] = v
        elif op == OP_STORE:
            h = 1 << (s - 1)
            base = (1 << s) - 1
            for l in range(n_active):
                _claim(bptr, bref, l, s)
                dst = bptr[l, s]
                child = bptr[l, s - 1]
                for j in range(h):
                    beta[dst, base + j] = beta[child, h - 1 + j]
        elif op == OP_COMBINE:
            h = 1 << (s - 1)
            base = (1 << s) - 1
            for l in range(n_active):
                old, dst = _claim(bptr, bref, l, s)
                if old != dst:
                    for j in range(h):
                        beta[dst, base + j] = beta[old, base + j]
                child = bptr[l, s - 1]
                for j in range(h):
                    c = beta[child, h - 1 + j]
                    beta[dst, base + j] ^= c
                    beta[dst, base + h + j] = c
        else:  # OP_LEAF
            t = s
            T = 1 << t
            base = T - 1
            kind = leaf_kind[leaf]
            pos = leaf_pos[leaf]
            n_cand = 1
            for l in range(n_active):
                a = aptr[l, t]
                for j in range(T):
                    llrs[j] = alpha[a, base + j]
                    hd[j] = 0 if llrs[j] > 0 else 1
                k0 = l * c_max
                if kind == KIND_FROZEN:
                    pen = 0.0
                    for j in range(T):
                        cand_v[k0, j] = 0
                        if hd[j]:
                            pen += abs(llrs[j])
                    cand_pm[k0] = min(pm[l] + pen, pm_cap)
                    n_cand = 1
                elif kind == KIND_RELIABLE:
                    for j in range(T):
                        cand_v[k0, j] = hd[j]
                    cand_pm[k0] = pm[l]
                    n_cand = 1
                elif kind == KIND_SP1 or kind == KIND_RATE1T:
                    if kind == KIND_SP1:
                        da, db = sp1_candidates(llrs[:T], cand_v[k0, :T], cand_v[k0 + 1, :T])
                    else:
                        da, db = rate1t_candidates(llrs[:T], pos, cand_v[k0, :T],
                                                   cand_v[k0 + 1, :T])
                    cand_pm[k0] = min(pm[l] + da, pm_cap)
                    cand_pm[k0 + 1] = min(pm[l] + db, pm_cap)
                    n_cand = 2
                else:  # KIND_MBD: every assignment of the block's info bits
                    n_info = 0
                    for j in range(T):
                        n_info += leaf_info[leaf, j]
                    n_cand = 1 << n_info
                    for c in range(n_cand):
                        bit = n_info - 1
                        for j in range(T):
                            if leaf_info[leaf, j]:
                                ub[j] = (c >> bit) & 1
                                bit -= 1
                            else:
                                ub[j] = 0
                        _kron_inplace(ub, T)
                        pen = 0.0
                        for j in range(T):
                            cand_v[k0 + c, j] = ub[j]
                            if ub[j] != hd[j]:
                                pen += abs(llrs[j])
                        cand_pm[k0 + c] = min(pm[l] + pen, pm_cap)

            if n_cand == 1:
                for l in range(n_active):
                    pm[l] = cand_pm[l * c_max]
                    _claim(bptr, bref, l, t)
                    dst = bptr[l, t]
                    for j in range(T):
                        beta[dst, base + j] = cand_v[l * c_max, j]
                leaf += 1
                continue

            # expansion: entry k = l * n_cand + c, parent l, candidate c
            E = n_active * n_cand
            metrics = np.empty(E)
            for l in range(n_active):
                for c in range(n_cand):
                    metrics[l * n_cand + c] = cand_pm[l * c_max + c]
            at = 0.0
            rt = 0.0
            if E <= L:
                ev_mode = MODE_KEEP
                keep = np.ones(E, dtype=np.bool_)
            elif mode == MODE_DTS and n_active == L:
                ev_mode = MODE_DTS
                for l in range(L):
                    best = metrics[l * n_cand]
                    for c in range(1, n_cand):
                        best = min(best, metrics[l * n_cand + c])
                    theta[l] = best
                srt = np.sort(theta)
                at = srt[at_index]
                rt = srt[rt_index]
                keep = dts_select(metrics, L, at, rt)
            else:
                ev_mode = MODE_EXACT
                keep = exact_select(metrics, L)

            if log_events and n_events < ev_meta.shape[0]:
                ev_meta[n_events, 0] = leaf
                ev_meta[n_events, 1] = ev_mode
                ev_meta[n_events, 2] = n_active
                ev_meta[n_events, 3] = n_cand
                ev_thresh[n_events, 0] = at
                ev_thresh[n_events, 1] = rt
                ev_metrics[n_events, :E] = metrics
                ev_parent_pm[n_events, :n_active] = pm[:n_active]
                ev_surv[n_events, :] = -1
                cnt = 0
                for k in range(E):
                    if keep[k]:
                        ev_surv[n_events, cnt] = k
                        cnt += 1
                n_events += 1

            n_new = 0
            for k in range(E):
                if keep[k]:
                    p = k // n_cand
                    src[n_new] = p * c_max + k % n_cand
                    new_pm[n_new] = metrics[k]
                    new_aptr[n_new, :] = aptr[p, :]
                    new_bptr[n_new, :] = bptr[p, :]
                    n_new += 1
            n_active = n_new
            aptr[:n_active, :] = new_aptr[:n_active, :]
            bptr[:n_active, :] = new_bptr[:n_active, :]
            pm[:n_active] = new_pm[:n_active]
            _recount(aptr, aref, n_active)
            _recount(bptr, bref, n_active)
            for l in range(n_active):
                _claim(bptr, bref, l, t)
                dst = bptr[l, t]
                for j in range(T):
                    beta[dst, base + j] = cand_v[src[l], j]
            leaf += 1

    xhat = np.zeros((n_active, N), dtype=np.uint8)
    for l in range(n_active):
        b = bptr[l, n]
        for j in range(N):
            xhat[l, j] = beta[b, N - 1 + j]
    return xhat, pm[:n_active].copy(), n_active, n_events
