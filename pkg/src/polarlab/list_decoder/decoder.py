"""CRC-aided list decoding front end: schemes, leaf tables and path selection."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..channel import LLR_MAX
from ..polar_code import BitClass, CodeSpec, kron_encode, log2_exact
from ..scd_core import build_schedule
from . import engine
from .pmu import PM_MAX, rt_index_for
from .tuples import TupleClass, tuple_divide


class Scheme(str, enum.Enum):
    EXACT_SORT = "ExactSort"
    DTS = "DTS"
    DTS_ADVANCE = "DTSAdvance"
    SMB_DTS = "SMBDTS"
    FULL_MBD = "FullMBD"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        key = str(value).replace("-", "").replace("_", "").lower()
        for member in cls:
            if member.value.lower() == key:
                return member
        raise ValueError(f"unknown scheme {value!r}")

    @property
    def needs_m(self) -> bool:
        return self in (Scheme.SMB_DTS, Scheme.FULL_MBD)


_MODE = {"exact": engine.MODE_EXACT, "dts": engine.MODE_DTS}
_KIND_OF_CLASS = {
    TupleClass.SP2_FROZEN: engine.KIND_FROZEN,
    TupleClass.SP2_RELIABLE: engine.KIND_RELIABLE,
    TupleClass.SP1: engine.KIND_SP1,
    TupleClass.RATE_INV_T: engine.KIND_RATE1T,
}
_MODE_NAMES = {engine.MODE_KEEP: "keep", engine.MODE_EXACT: "exact", engine.MODE_DTS: "dts"}


@dataclass
class ListDecodeResult:
    u_hat: np.ndarray
    passed: bool
    metric: float
    path: int
    events: list = field(default_factory=list)


class ListDecoder:
    """Reusable decoder for one (spec, L, scheme, M) combination.

    ``quantized=True`` saturates LLRs at 31 and metrics at 255; with
    ``quantized=False`` arithmetic is unbounded floating point. ``rt_index``
    overrides the rejection-threshold rank; DTS-advance and SMB-DTS default
    to the advance ranks (6/12/25 for L = 8/16/32).
    """

    def __init__(self, spec: CodeSpec, L: int, scheme="ExactSort", M: int | None = None,
                 rt_index: int | None = None, quantized: bool = True,
                 llr_cap: float | None = None, pm_cap: float | None = None):
        log2_exact(L)
        self.spec = spec
        self.L = L
        self.scheme = Scheme.parse(scheme)
        if self.scheme.needs_m:
            if M is None:
                raise ValueError(f"{self.scheme.value} needs a tuple size M")
            log2_exact(M)
        self.M = M if self.scheme.needs_m else None
        self.llr_cap = llr_cap if llr_cap is not None else (LLR_MAX if quantized else math.inf)
        self.pm_cap = pm_cap if pm_cap is not None else (PM_MAX if quantized else math.inf)
        variant = "advance" if self.scheme in (Scheme.DTS_ADVANCE, Scheme.SMB_DTS) else "standard"
        self.rt_index = rt_index_for(L, variant, rt_index) if L > 1 else 0
        self.at_index = min(L // 2, self.rt_index)
        dts = self.scheme in (Scheme.DTS, Scheme.DTS_ADVANCE, Scheme.SMB_DTS)
        self.mode = _MODE["dts" if dts else "exact"]
        self._build_leaves()

    def _build_leaves(self):
        spec = self.spec
        bc = spec.bit_class
        kinds, ts, poss, offsets = [], [], [], []
        if self.scheme == Scheme.FULL_MBD:
            t = log2_exact(self.M)
            T = self.M
            info = np.zeros((spec.N // T, T), dtype=np.int64)
            for b, start in enumerate(range(0, spec.N, T)):
                info[b] = bc[start : start + T] != BitClass.FROZEN
                kinds.append(engine.KIND_MBD)
                ts.append(t)
                poss.append(0)
                offsets.append(start)
            self.c_max = 1 << int(info.sum(axis=1).max(initial=0))
        else:
            if self.scheme == Scheme.SMB_DTS:
                tuples = tuple_divide(spec, self.M)
            else:
                from .tuples import Tuple
                cls_of = {BitClass.FROZEN: TupleClass.SP2_FROZEN,
                          BitClass.RELIABLE: TupleClass.SP2_RELIABLE,
                          BitClass.UNRELIABLE: TupleClass.RATE_INV_T}
                tuples = [Tuple(i, 1, cls_of[BitClass(c)], 0 if c == BitClass.UNRELIABLE else None)
                          for i, c in enumerate(bc)]
            self.tuples = tuples
            T = max(tp.length for tp in tuples)
            info = np.zeros((len(tuples), T), dtype=np.int64)
            for tp in tuples:
                kinds.append(_KIND_OF_CLASS[tp.cls])
                ts.append(tp.t)
                poss.append(tp.unreliable_pos or 0)
                offsets.append(tp.offset)
            self.c_max = 2
        self.leaf_kind = np.array(kinds, dtype=np.int64)
        self.leaf_t = np.array(ts, dtype=np.int64)
        self.leaf_pos = np.array(poss, dtype=np.int64)
        self.leaf_offset = np.array(offsets, dtype=np.int64)
        self.leaf_info = info
        self.ops = build_schedule(spec.n, list(zip(offsets, ts)))
        self.n_expansions = int(np.count_nonzero(
            np.isin(self.leaf_kind, [engine.KIND_SP1, engine.KIND_RATE1T, engine.KIND_MBD])))

    def _run(self, llrs, log_events):
        n_ev = max(self.n_expansions, 1) if log_events else 1
        width = self.L * self.c_max if log_events else 1
        ev_metrics = np.zeros((n_ev, width))
        ev_meta = np.zeros((n_ev, 4), dtype=np.int64)
        ev_thresh = np.zeros((n_ev, 2))
        ev_surv = np.zeros((n_ev, self.L if log_events else 1), dtype=np.int64)
        ev_parent = np.zeros((n_ev, self.L if log_events else 1))
        xhat, pm, n_active, n_events = engine.decode_frame(
            llrs, self.ops, self.leaf_kind, self.leaf_t, self.leaf_pos, self.leaf_info,
            self.L, self.mode, self.at_index, self.rt_index, float(self.llr_cap),
            float(self.pm_cap), self.c_max, log_events, ev_metrics, ev_meta, ev_thresh,
            ev_surv, ev_parent)
        events = []
        for e in range(n_events):
            leaf, mode, n_act, n_cand = (int(v) for v in ev_meta[e])
            E = n_act * n_cand
            events.append({
                "leaf": leaf,
                "offset": int(self.leaf_offset[leaf]),
                "length": 1 << int(self.leaf_t[leaf]),
                "mode": _MODE_NAMES[mode],
                "n_active": n_act,
                "n_cand": n_cand,
                "parent_metrics": ev_parent[e, :n_act].tolist(),
                "expanded": ev_metrics[e, :E].tolist(),
                "AT": float(ev_thresh[e, 0]),
                "RT": float(ev_thresh[e, 1]),
                "survivors": [int(k) for k in ev_surv[e] if k >= 0],
            })
        return xhat, pm, events

    def candidates(self, llrs, log_events: bool = False):
        """Final list: decoded ``u`` per path, metrics, CRC flags, events."""
        llrs = np.ascontiguousarray(llrs, dtype=float)
        if llrs.shape != (self.spec.N,):
            raise ValueError(f"expected {self.spec.N} LLRs, got shape {llrs.shape}")
        xhat, pm, events = self._run(llrs, log_events)
        u = kron_encode(xhat)
        ok = self.spec.crc_ok(self.spec.extract(u))
        return u, pm, ok, events

    def decode(self, llrs, log_events: bool = False) -> ListDecodeResult:
        u, pm, ok, events = self.candidates(llrs, log_events)
        order = np.argsort(pm, kind="stable")
        passing = order[ok[order]]
        best = int(passing[0]) if passing.size else int(order[0])
        return ListDecodeResult(u_hat=u[best], passed=bool(ok[best]), metric=float(pm[best]),
                                path=best, events=events)


@lru_cache(maxsize=32)
def _cached_decoder(spec, L, scheme, M, quantized):
    return ListDecoder(spec, L, scheme, M, quantized=quantized)


def lscd_decode(llrs, spec: CodeSpec, L: int, scheme="ExactSort", M: int | None = None,
                quantized: bool = True) -> tuple[np.ndarray, bool]:
    """Decode one frame; returns ``(u_hat, crc_passed)``."""
    dec = _cached_decoder(spec, L, Scheme.parse(scheme), M, quantized)
    res = dec.decode(llrs)
    return res.u_hat, res.passed


def write_event_log(events, fh) -> None:
    """One JSON object per pruning event."""
    for ev in events:
        fh.write(json.dumps(ev) + "\n")
