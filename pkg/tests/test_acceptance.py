"""End-to-end acceptance checks, one PASS/FAIL line each."""

import itertools
import time

import numpy as np
import pytest

from polarlab.channel import quantize, rng_for_frame, transmit
from polarlab.latency_model import (
    d_trd,
    fine_tune_saving,
    lm_cycles,
    pglah_closed_form,
    scd_cycles,
    total_latency,
)
from polarlab.list_decoder import ListDecoder, sp1_decode, subt_pmu, tuple_divide
from polarlab.list_decoder.pmu import dts_select, exact_select
from polarlab.polar_code import build_codespec, kron_encode
from polarlab.sim_harness import (
    SweepConfig,
    census_report,
    intervals_overlap,
    mcnemar_one_sided,
    paired_flags,
    run_sweep,
    wilson_interval,
)

from conftest import gf2_kron_matrix
from oracles import bit_serial_metric, genie_metric
from test_tuples import spec_from

CENSUS = {
    2: {"1": 34, "2/SP1": 64, "2/SP2": 377, "2/rate-1/T": 54},
    4: {"1": 34, "2/SP1": 32, "2/SP2": 3, "2/rate-1/T": 30,
        "4/SP1": 32, "4/SP2": 159, "4/rate-1/T": 24},
    8: {"1": 34, "2/SP1": 32, "2/SP2": 3, "2/rate-1/T": 30, "4/SP1": 17, "4/SP2": 5,
        "4/rate-1/T": 13, "8/SP1": 15, "8/SP2": 64, "8/rate-1/T": 11},
}


def test_a01_latency_closed_forms(acceptance):
    t0 = time.perf_counter()
    pg, trd = pglah_closed_form(1024, 64), d_trd(1024, 64)
    ratio = f"{100 * pg / trd:.1f}%"
    ok = pg == 1064 and trd == 2080 and ratio == "51.2%" and time.perf_counter() - t0 < 1
    acceptance("A1", "P-GLAH closed form and traditional latency", ok,
               f"{pg} / {trd} cycles, ratio {ratio}")


def test_a02_lm_row_and_census(acceptance, default_spec):
    lms = [lm_cycles(tuple_divide(default_spec, M)) for M in (2, 4, 8)]
    census = census_report(default_spec)
    ok = lms == [735, 520, 430] and census == CENSUS
    acceptance("A2", "LM cycles and SUBT census", ok,
               f"LM {lms}, census {'matches' if census == CENSUS else census}")


def test_a03_scd_rows_and_totals(acceptance, default_spec):
    rows = {M: total_latency(default_spec, M) for M in (2, 4, 8)}
    got = {M: (r.scd_below_m, r.scd_at_or_above_m, r.d_fine, r.d_zero, r.total)
           for M, r in rows.items()}
    want = {2: (384, 168, 256, 88, 943), 4: (128, 168, 128, 41, 647),
            8: (0, 168, 64, 18, 516)}
    ok = (got == want and scd_cycles(1024, 64, 3) == (0, 168)
          and [fine_tune_saving(1024, M) for M in (2, 4, 8)] == [256, 128, 64])
    acceptance("A3", "SCD rows, fine-tuning, zero-prefix and totals", ok,
               "totals " + "/".join(str(got[M][4]) for M in (2, 4, 8)))


def test_a04_trimmed_tree_example(acceptance):
    d = lm_cycles(tuple_divide(spec_from("FFUUFFFU"), 8), simplified=False, M=8)
    acceptance("A4", "trimmed tree [F,F,U,U,F,F,F,U]", d == 14, f"{d} cycles")


def test_a05_dts_theorems(acceptance):
    rng = np.random.default_rng(20240501)
    t0 = time.perf_counter()
    events = 100_000
    bad = 0
    for e in range(events):
        L = 1 << int(rng.integers(1, 6))
        parent = rng.integers(0, 200, L).astype(float)
        pen = rng.integers(0, 60, 2 * L).astype(float)
        if e % 2 == 0:
            pen[rng.integers(0, 2, L) + 2 * np.arange(L)] = 0  # per-bit: one free child
        metrics = np.minimum(np.repeat(parent, 2) + pen, 255.0)
        theta = np.sort(metrics.reshape(L, 2).min(axis=1))
        at, rt = theta[L // 2] if L > 1 else theta[0], theta[L - 1]
        keep = dts_select(metrics, L, at, rt)
        exact = exact_select(metrics, L)
        if keep.sum() != L or np.any((metrics < at) & ~exact) or np.any(exact & (metrics > rt)):
            bad += 1
    dt = time.perf_counter() - t0
    acceptance("A5", "DTS acceptance/rejection bands", bad == 0 and dt < 60,
               f"{events} events, {bad} violations, {dt:.1f} s")


def _codebook(t):
    T = 1 << t
    us = np.array(list(itertools.product((0, 1), repeat=T)), dtype=np.int64)
    return us, (us @ gf2_kron_matrix(t)) % 2


def test_a06_subt_oracle(acceptance):
    rng = np.random.default_rng(7)
    books = {t: _codebook(t) for t in range(4)}
    n_tuples, bad = 10_000, 0
    for i in range(n_tuples):
        t = int(rng.integers(0, 4))
        T = 1 << t
        llrs = rng.integers(-31, 32, T).astype(float)
        us, vs = books[t]
        pen = (np.abs(llrs) * (vs != (llrs <= 0))).sum(axis=1)
        if i % 2:
            pos = int(rng.integers(0, T))
            allowed = np.all(us[:, [j for j in range(T) if j != pos]] == 0, axis=1)
            ga, gb, ua, ub = subt_pmu(0.0, llrs, pos, np.inf)
        else:
            pos = 0
            allowed = np.ones(len(us), dtype=bool)
            ga, gb, ua, ub = sp1_decode(0.0, llrs, np.inf)
        for g, u, b in ((ga, ua, 0), (gb, ub, 1)):
            sel = allowed & (us[:, pos] == b)
            best = pen[sel].min()
            winners = us[sel][pen[sel] == best]
            if g != best:
                bad += 1
            elif len(winners) == 1 and not np.array_equal(winners[0], u):
                bad += 1
            elif not any(np.array_equal(w, u) for w in winners):
                bad += 1
    acceptance("A6", "SUBT and SP1 updates against exhaustive enumeration", bad == 0,
               f"{n_tuples} tuples, {bad} mismatches")


def test_a07_ml_equivalence(acceptance):
    frames, bad = 1000, 0
    decoders = {}
    for f in range(frames):
        K = 1 + f % 6
        if K not in decoders:
            spec = build_codespec(3, K, 0)
            msgs = [np.array(m, dtype=np.uint8) for m in itertools.product((0, 1), repeat=K)]
            decoders[K] = (spec, ListDecoder(spec, 1 << K, "ExactSort"),
                           [spec.embed(m) for m in msgs])
        spec, dec, cands = decoders[K]
        rng = rng_for_frame(77, f)
        x = kron_encode(spec.embed(rng.integers(0, 2, K)))
        llrs = quantize(transmit(x, 1.0, rng, spec.rate).rx_llrs).astype(float)
        metrics = np.array([genie_metric(llrs, u) for u in cands])
        res = dec.decode(llrs)
        winners = np.flatnonzero(metrics == metrics.min())
        hit = [k for k in winners if np.array_equal(cands[k], res.u_hat)]
        if res.metric != metrics.min() or not hit:
            bad += 1
    acceptance("A7", "list decoding equals exhaustive metric minimisation (N=8)", bad == 0,
               f"{frames} frames, {bad} mismatches")


def test_a08_dominance(acceptance):
    rng = np.random.default_rng(11)
    n_tuples, bad = 10_000, 0
    for i in range(n_tuples):
        t = int(rng.integers(1, 4))
        T = 1 << t
        llrs = rng.integers(-31, 32, T).astype(float)
        gamma = float(rng.integers(0, 100))
        if i % 2:
            pos = int(rng.integers(0, T))
            classes = [2 if j == pos else 0 for j in range(T)]
            ga, gb, _, _ = subt_pmu(gamma, llrs, pos, np.inf)
        else:
            pos = 0
            classes = [2] + [1] * (T - 1)
            ga, gb, _, _ = sp1_decode(gamma, llrs, np.inf)
        for g, b in ((ga, 0), (gb, 1)):
            serial, _ = bit_serial_metric(llrs, classes, pos, b)
            if g > gamma + serial:
                bad += 1
    acceptance("A8", "tuple metrics never exceed bit-serial metrics", bad == 0,
               f"{n_tuples} tuples, {bad} violations")


BLER_FRAMES = 20_000


@pytest.mark.slow
def test_a09_bler_behaviour(acceptance):
    cfg = SweepConfig(max_frames=BLER_FRAMES, master_seed=2024)
    runs = [("SMBDTS", 8, 8), ("SMBDTS", 16, 8), ("SMBDTS", 32, 8), ("SMBDTS", 32, 2),
            ("SMBDTS", 32, 4), ("ExactSort", 16, 0)]
    t0 = time.perf_counter()
    flags = dict(zip(runs, paired_flags(cfg, runs, 2.0)))
    errs = {r: int(f.sum()) for r, f in flags.items()}
    ci = {r: wilson_interval(e, BLER_FRAMES) for r, e in errs.items()}
    p_16_8 = mcnemar_one_sided(flags[runs[0]], flags[runs[1]])
    p_32_16 = mcnemar_one_sided(flags[runs[1]], flags[runs[2]])
    order_ok = p_16_8 < 0.05 and p_32_16 < 0.05
    m_runs = [("SMBDTS", 32, 2), ("SMBDTS", 32, 4), ("SMBDTS", 32, 8)]
    m_ok = all(intervals_overlap(ci[a], ci[b]) for a, b in itertools.combinations(m_runs, 2))
    es_ok = intervals_overlap(ci[("SMBDTS", 16, 8)], ci[("ExactSort", 16, 0)])
    summary = ", ".join(f"{s}(L={L},M={M})={e}" for (s, L, M), e in errs.items())
    dt = time.perf_counter() - t0
    print(f"block errors out of {BLER_FRAMES} at 2.0 dB: {summary} ({dt:.0f} s)")
    ok = order_ok and m_ok and es_ok
    acceptance("A9", "BLER ordering and scheme agreement at 2.0 dB", ok,
               f"p(L16<L8)={p_16_8:.2g}, p(L32<L16)={p_32_16:.2g}, "
               f"M overlap {m_ok}, SMB-DTS vs ExactSort overlap {es_ok}")


def test_a10_determinism(acceptance, tmp_path):
    base = dict(schemes=["SMBDTS", "DTS"], L=[4], M=[8], ebn0=[1.5, 2.5], max_frames=1200,
                max_errors=15, master_seed=99)
    blobs = []
    for tag, workers in (("a", 1), ("b", 1), ("c", 3)):
        out = tmp_path / tag
        run_sweep(SweepConfig(workers=workers, out=str(out), **base))
        blobs.append((out.with_suffix(".csv").read_bytes(), out.with_suffix(".json").read_bytes()))
    ok = blobs[0] == blobs[1] == blobs[2]
    acceptance("A10", "sweep output independent of re-runs and worker count", ok,
               "byte-identical CSV and JSON" if ok else "outputs differ")
