"""Path-metric updates and list pruning rules.

Metrics are float64 so that the same kernels run saturated (``pm_max=255``
for 8-bit metrics) or unbounded (``pm_max=inf``). Tuple kernels work on the
stage-t LLRs of a tuple and produce candidate ``V`` vectors; the decoded
``u`` sub-vector is ``V . F^{(x)t}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..polar_code import kron_encode
from .tuples import TupleClass

Q_PM = 8
PM_MAX = (1 << Q_PM) - 1  # 255

ADVANCE_RT_INDEX = {8: 6, 16: 12, 32: 25}


@njit(cache=True)
def sat_add(gamma, delta, pm_max=PM_MAX):
    v = gamma + delta
    return pm_max if v > pm_max else v


@njit(cache=True)
def pmu_bit(gamma, llr, pm_max=PM_MAX):
    """Single-bit update: the hard-decision branch keeps ``gamma``, the other
    pays ``|llr|``. Returns ``(gamma_same, gamma_flip)``."""
    return gamma, sat_add(gamma, abs(llr), pm_max)


@njit(cache=True)
def _hd(llrs, out):
    for j in range(llrs.size):
        out[j] = 0 if llrs[j] > 0 else 1


@njit(cache=True)
def mismatch_penalty(llrs, v):
    """Sum of |L_j| over positions where ``v`` disagrees with the hard decision."""
    acc = 0.0
    for j in range(llrs.size):
        hd = 0 if llrs[j] > 0 else 1
        if v[j] != hd:
            acc += abs(llrs[j])
    return acc


@njit(cache=True)
def rate1t_candidates(llrs, pos, va, vb):
    """Rate-1/T tuple: the unreliable bit at ``pos`` is 0 (A) or 1 (B) and all
    other bits are frozen, so ``V_A = 0`` and ``V_B`` is row ``pos`` of the
    Kronecker matrix. Fills ``va``/``vb`` and returns ``(delta_a, delta_b)``."""
    T = llrs.size
    da = 0.0
    db = 0.0
    for j in range(T):
        va[j] = 0
        vb[j] = 1 if (j & ~pos) == 0 else 0
        hd = 0 if llrs[j] > 0 else 1
        if hd:
            da += abs(llrs[j])
        if vb[j] != hd:
            db += abs(llrs[j])
    return da, db


@njit(cache=True)
def sp1_candidates(llrs, va, vb):
    """SP1 tuple decoded as a single-parity-check code.

    ``V_A`` has even parity (first bit 0), ``V_B`` odd parity (first bit 1);
    each starts from the hard decisions and flips the least reliable position
    if its parity is wrong. Returns ``(delta_a, delta_b)``.
    """
    T = llrs.size
    k = 0
    best = abs(llrs[0])
    eta = 0
    for j in range(T):
        hd = 0 if llrs[j] > 0 else 1
        va[j] = hd
        vb[j] = hd
        eta ^= hd
        if abs(llrs[j]) < best:
            best = abs(llrs[j])
            k = j
    if eta:
        va[k] ^= 1
        return best, 0.0
    vb[k] ^= 1
    return 0.0, best


def subt_pmu(gamma, llrs, pos, pm_max=PM_MAX):
    """Rate-1/T tuple update.

    Returns ``(gamma_a, gamma_b, bits_a, bits_b)`` where the bits are the
    decoded ``u`` sub-vectors with the unreliable bit set to 0 and 1.
    """
    llrs = np.asarray(llrs, dtype=float)
    T = llrs.size
    if T & (T - 1) or not 0 <= pos < T:
        raise ValueError("tuple length must be a power of two and pos inside it")
    va = np.zeros(T, dtype=np.uint8)
    vb = np.zeros(T, dtype=np.uint8)
    da, db = rate1t_candidates(llrs, pos, va, vb)
    return (sat_add(gamma, da, pm_max), sat_add(gamma, db, pm_max),
            kron_encode(va), kron_encode(vb))


def sp1_decode(gamma, llrs, pm_max=PM_MAX):
    """SP1 tuple update, see :func:`sp1_candidates`; outputs as :func:`subt_pmu`."""
    llrs = np.asarray(llrs, dtype=float)
    T = llrs.size
    if T == 0 or T & (T - 1):
        raise ValueError("tuple length must be a power of two")
    va = np.zeros(T, dtype=np.uint8)
    vb = np.zeros(T, dtype=np.uint8)
    da, db = sp1_candidates(llrs, va, vb)
    return (sat_add(gamma, da, pm_max), sat_add(gamma, db, pm_max),
            kron_encode(va), kron_encode(vb))


def sp2_decode(gamma, llrs, cls, pm_max=PM_MAX):
    """SP2 tuple: no expansion. Frozen tuples decode to zeros and pay for every
    negative-or-zero LLR; reliable tuples follow the hard decisions for free."""
    llrs = np.asarray(llrs, dtype=float)
    cls = TupleClass(cls)
    if cls == TupleClass.SP2_FROZEN:
        v = np.zeros(llrs.size, dtype=np.uint8)
        return sat_add(gamma, mismatch_penalty(llrs, v), pm_max), v
    if cls == TupleClass.SP2_RELIABLE:
        v = np.zeros(llrs.size, dtype=np.uint8)
        _hd(llrs, v)
        return gamma, kron_encode(v)
    raise ValueError(f"{cls.name} is not an SP2 class")


# -- pruning -----------------------------------------------------------------


@dataclass(frozen=True)
class Thresholds:
    AT: float
    RT: float

    def __post_init__(self):
        if self.AT > self.RT:
            raise ValueError("acceptance threshold exceeds rejection threshold")


def rt_index_for(L: int, variant: str = "standard", rt_index: int | None = None) -> int:
    if rt_index is not None:
        if not 0 <= rt_index < L:
            raise ValueError("rt_index must lie in [0, L)")
        return rt_index
    if variant == "advance":
        return ADVANCE_RT_INDEX.get(L, L - 1)
    if variant != "standard":
        raise ValueError(f"unknown threshold variant {variant!r}")
    return L - 1


def dts_thresholds(sorted_metrics, variant: str = "standard",
                   rt_index: int | None = None) -> Thresholds:
    """AT is element L/2 of the ascending metrics; RT is element L-1, or the
    advance index (6/12/25 for L = 8/16/32)."""
    m = np.asarray(sorted_metrics, dtype=float)
    L = m.size
    if L < 2:
        raise ValueError("need at least two metrics")
    if np.any(np.diff(m) < 0):
        raise ValueError("metrics must be sorted ascending")
    rt = rt_index_for(L, variant, rt_index)
    at = L // 2
    return Thresholds(AT=float(m[min(at, rt)]), RT=float(m[rt]))


@njit(cache=True)
def exact_select(metrics, L):
    """Mask of the L smallest metrics; ties go to the lower index."""
    E = metrics.size
    keep = np.zeros(E, dtype=np.bool_)
    if E <= L:
        keep[:] = True
        return keep
    order = np.argsort(metrics, kind="mergesort")
    for i in range(L):
        keep[order[i]] = True
    return keep


@njit(cache=True)
def dts_select(metrics, L, at, rt):
    """Mask of exactly ``min(L, E)`` survivors under the double threshold rule.

    Everything below AT is accepted, the band AT..RT fills the remaining
    slots in index order, and only if that band underfills are entries above
    RT admitted, again in index order.
    """
    E = metrics.size
    keep = np.zeros(E, dtype=np.bool_)
    need = min(L, E)
    got = 0
    for k in range(E):
        if got < need and metrics[k] < at:
            keep[k] = True
            got += 1
    for k in range(E):
        if got < need and not keep[k] and metrics[k] <= rt:
            keep[k] = True
            got += 1
    for k in range(E):
        if got < need and not keep[k]:
            keep[k] = True
            got += 1
    return keep


def prune_exact(metrics, L: int, parents=None, bits=None) -> np.ndarray:
    """Indices of the L best expanded entries, ascending by index.

    Ranking is by metric, then parent index, then bit value. Without explicit
    parents/bits the entry index already encodes ``2 * parent + bit``.
    """
    metrics = np.asarray(metrics, dtype=float)
    if parents is None and bits is None:
        return np.flatnonzero(exact_select(metrics, L))
    parents = np.arange(metrics.size) if parents is None else np.asarray(parents)
    bits = np.zeros(metrics.size, dtype=int) if bits is None else np.asarray(bits)
    order = np.lexsort((bits, parents, metrics))
    return np.sort(order[:L])


def dts_prune(metrics, th: Thresholds, L: int) -> np.ndarray:
    """Indices of the survivors of a DTS pruning event, ascending by index."""
    metrics = np.asarray(metrics, dtype=float)
    return np.flatnonzero(dts_select(metrics, L, th.AT, th.RT))
