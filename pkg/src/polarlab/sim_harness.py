"""Monte-Carlo BLER sweeps, paired scheme comparisons and table reports."""

from __future__ import annotations

import configparser
import csv
import io
import json
import logging
import multiprocessing
import time
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.stats import binomtest

from .channel import quantize, rng_for_frame, transmit
from .latency_model import format_table, reference_columns, total_latency
from .list_decoder import ListDecoder, Scheme, census, tuple_divide
from .polar_code import CodeSpec, default_spec_path, kron_encode

log = logging.getLogger(__name__)

RESULT_VERSION = 1
CSV_COLUMNS = ["version", "scheme", "L", "M", "ebn0_db", "frames", "block_errors", "bler"]
CHUNK = 500


@dataclass
class SweepConfig:
    spec_path: str = "default"
    schemes: list = field(default_factory=lambda: ["SMBDTS"])
    L: list = field(default_factory=lambda: [8])
    M: list = field(default_factory=lambda: [8])
    ebn0: list = field(default_factory=lambda: [2.0])
    max_frames: int = 20000
    max_errors: int = 1000
    master_seed: int = 1
    workers: int = 1
    out: str | None = None
    quantized: bool = True
    llr_scale: float = 1.0

    def __post_init__(self):
        if self.max_errors < 1:
            raise ValueError("max_errors must be at least 1")
        if not self.ebn0:
            raise ValueError("the Eb/N0 grid is empty")
        if self.max_frames < 0:
            raise ValueError("max_frames must be non-negative")
        self.schemes = [Scheme.parse(s).value for s in self.schemes]

    @classmethod
    def from_ini(cls, text: str) -> "SweepConfig":
        """Parse a ``[sweep]`` section; list values are comma separated."""
        cp = configparser.ConfigParser()
        cp.read_string(text)
        if "sweep" not in cp:
            raise ValueError("config needs a [sweep] section")
        sec = cp["sweep"]

        def lst(key, conv, default):
            if key not in sec:
                return default
            return [conv(v.strip()) for v in sec[key].split(",") if v.strip()]

        base = cls()
        return cls(
            spec_path=sec.get("spec", base.spec_path),
            schemes=lst("schemes", str, base.schemes),
            L=lst("L", int, base.L),
            M=lst("M", int, base.M),
            ebn0=lst("ebn0", float, base.ebn0),
            max_frames=sec.getint("max_frames", base.max_frames),
            max_errors=sec.getint("max_errors", base.max_errors),
            master_seed=sec.getint("seed", base.master_seed),
            workers=sec.getint("workers", base.workers),
            out=sec.get("out", base.out),
            quantized=sec.getboolean("quantized", base.quantized),
            llr_scale=sec.getfloat("llr_scale", base.llr_scale),
        )

    @classmethod
    def load(cls, path) -> "SweepConfig":
        return cls.from_ini(Path(path).read_text())

    def load_spec(self) -> CodeSpec:
        path = default_spec_path() if self.spec_path == "default" else Path(self.spec_path)
        return CodeSpec.load(path)

    def points(self):
        """Every (scheme, L, M, ebn0) combination; M is 0 for per-bit schemes."""
        for scheme in self.schemes:
            Ms = self.M if Scheme(scheme).needs_m else [0]
            for L in self.L:
                for M in Ms:
                    for e in self.ebn0:
                        yield scheme, L, M, e


@dataclass
class BlerPoint:
    scheme: str
    L: int
    M: int
    ebn0_db: float
    frames: int
    block_errors: int
    bler: float
    wall_time: float = 0.0

    def row(self) -> dict:
        return {"version": RESULT_VERSION, "scheme": self.scheme, "L": self.L, "M": self.M,
                "ebn0_db": self.ebn0_db, "frames": self.frames,
                "block_errors": self.block_errors, "bler": self.bler}


# -- frame simulation --------------------------------------------------------


@lru_cache(maxsize=4)
def _spec_from_text(text: str) -> CodeSpec:
    return CodeSpec.from_text(text)


@lru_cache(maxsize=16)
def _decoder(spec_text, scheme, L, M, quantized):
    return ListDecoder(_spec_from_text(spec_text), L, scheme, M or None, quantized=quantized)


def make_frame(spec: CodeSpec, ebn0_db: float, master_seed: int, index: int,
               quantized: bool = True, llr_scale: float = 1.0):
    """Transmitted ``u`` and decoder input LLRs of frame ``index``."""
    rng = rng_for_frame(master_seed, index)
    data = rng.integers(0, 2, spec.K - spec.r, dtype=np.uint8)
    u = spec.embed(spec.attach_crc(data))
    frame = transmit(kron_encode(u), ebn0_db, rng, spec.rate, noise_seed=index)
    llrs = quantize(frame.rx_llrs, llr_scale).astype(float) if quantized else frame.rx_llrs
    return u, llrs


def simulate_frames(spec_text: str, scheme: str, L: int, M: int, ebn0_db: float,
                    master_seed: int, start: int, stop: int, quantized: bool = True,
                    llr_scale: float = 1.0) -> np.ndarray:
    """Per-frame block-error flags for frames ``start .. stop-1``."""
    spec = _spec_from_text(spec_text)
    dec = _decoder(spec_text, scheme, L, M, quantized)
    flags = np.zeros(stop - start, dtype=np.uint8)
    for i in range(start, stop):
        u, llrs = make_frame(spec, ebn0_db, master_seed, i, quantized, llr_scale)
        flags[i - start] = not np.array_equal(dec.decode(llrs).u_hat, u)
    return flags


def _sim_task(args):
    return simulate_frames(*args)


class _Runner:
    def __init__(self, workers: int):
        self.workers = max(1, int(workers))
        self.pool = None
        if self.workers > 1:
            self.pool = multiprocessing.get_context("fork").Pool(self.workers)

    def map(self, tasks):
        if self.pool is None:
            return map(_sim_task, tasks)
        return self.pool.imap(_sim_task, tasks)

    def close(self):
        if self.pool is not None:
            self.pool.terminate()
            self.pool.join()


def _run_point(runner, spec_text, cfg, scheme, L, M, ebn0, max_frames, max_errors):
    """Error flags in frame order, cut at the frame where ``max_errors`` is hit."""
    flags = []
    errors = 0
    start = 0
    batch = CHUNK * runner.workers
    while start < max_frames:
        stop = min(start + batch, max_frames)
        tasks = [(spec_text, scheme, L, M, ebn0, cfg.master_seed, a, min(a + CHUNK, stop),
                  cfg.quantized, cfg.llr_scale) for a in range(start, stop, CHUNK)]
        for chunk in runner.map(tasks):
            for f in chunk:
                if errors >= max_errors:
                    break
                flags.append(f)
                errors += int(f)
        if errors >= max_errors:
            break
        start = stop
    return np.array(flags, dtype=np.uint8)


def run_sweep(cfg: SweepConfig) -> list[BlerPoint]:
    """Simulate every configured point; output independent of ``cfg.workers``."""
    spec_text = cfg.load_spec().to_text()
    points: list[BlerPoint] = []
    runner = _Runner(cfg.workers)
    try:
        for scheme, L, M, ebn0 in cfg.points():
            if cfg.max_frames == 0:
                continue
            t0 = time.perf_counter()
            flags = _run_point(runner, spec_text, cfg, scheme, L, M, ebn0,
                               cfg.max_frames, cfg.max_errors)
            frames = int(flags.size)
            errs = int(flags.sum())
            pt = BlerPoint(scheme, L, M, ebn0, frames, errs, errs / frames,
                           time.perf_counter() - t0)
            log.info("%s L=%d M=%d %.2f dB: %d/%d errors (%.1f s)", scheme, L, M, ebn0,
                     errs, frames, pt.wall_time)
            points.append(pt)
    except KeyboardInterrupt:
        log.warning("interrupted; keeping %d finished points", len(points))
        if cfg.out:
            write_results(points, cfg.out)
        raise
    finally:
        runner.close()
    if cfg.out:
        write_results(points, cfg.out)
    return points


# -- persistence -------------------------------------------------------------


def results_csv(points) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for p in points:
        w.writerow(p.row())
    return buf.getvalue()


def results_json(points) -> str:
    return json.dumps({"version": RESULT_VERSION, "columns": CSV_COLUMNS,
                       "rows": [p.row() for p in points]}, indent=1) + "\n"


def write_results(points, out) -> None:
    """Write ``<out>.csv`` and ``<out>.json`` (deterministic) and
    ``<out>.timing.json`` with wall-clock times."""
    out = Path(out)
    stem = out.with_suffix("") if out.suffix in (".csv", ".json") else out
    stem.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{stem}.csv").write_text(results_csv(points))
    Path(f"{stem}.json").write_text(results_json(points))
    timing = [dict(p.row(), wall_time=p.wall_time) for p in points]
    Path(f"{stem}.timing.json").write_text(json.dumps(timing, indent=1) + "\n")


def curves(points) -> dict:
    """(ebn0, bler) series per (scheme, L, M) curve, ready for plotting."""
    out: dict = {}
    for p in points:
        out.setdefault(f"{p.scheme} L={p.L} M={p.M}", []).append((p.ebn0_db, p.bler))
    return out


# -- statistics --------------------------------------------------------------


def wilson_interval(errors: int, frames: int, confidence: float = 0.95) -> tuple[float, float]:
    if frames == 0:
        return 0.0, 1.0
    ci = binomtest(errors, frames).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def intervals_overlap(a: tuple[float, float], b: tuple[float, float]) -> bool:
    return a[0] <= b[1] and b[0] <= a[1]


def mcnemar_one_sided(worse_flags, better_flags) -> float:
    """Exact paired p-value for "better" having fewer errors than "worse".

    Only discordant frames count: under the null each is equally likely to
    favour either decoder.
    """
    worse = np.asarray(worse_flags, dtype=bool)
    better = np.asarray(better_flags, dtype=bool)
    b = int(np.count_nonzero(worse & ~better))
    c = int(np.count_nonzero(better & ~worse))
    if b + c == 0:
        return 1.0
    return float(binomtest(b, b + c, 0.5, alternative="greater").pvalue)


@dataclass
class PairReport:
    a: str
    b: str
    ebn0_db: float
    frames: int
    errors_a: int
    errors_b: int
    ci_a: tuple
    ci_b: tuple
    delta: float
    discordant: tuple
    overlap: bool

    def line(self) -> str:
        return (f"{self.a} vs {self.b} @ {self.ebn0_db:.2f} dB: "
                f"{self.errors_a}/{self.frames} [{self.ci_a[0]:.2e}, {self.ci_a[1]:.2e}] vs "
                f"{self.errors_b}/{self.frames} [{self.ci_b[0]:.2e}, {self.ci_b[1]:.2e}], "
                f"delta {self.delta:+.2e}, discordant {self.discordant}, "
                f"CI overlap {'yes' if self.overlap else 'no'}")


def paired_flags(cfg: SweepConfig, runs, ebn0_db: float) -> list:
    """Per-frame error flags of several (scheme, L, M) runs on identical frames.

    Early stopping is disabled so every run sees the same ``cfg.max_frames``.
    Returned in the order of ``runs``; repeated runs are simulated once.
    """
    spec_text = cfg.load_spec().to_text()
    runner = _Runner(cfg.workers)
    done: dict = {}
    try:
        for scheme, L, M in runs:
            key = (Scheme.parse(scheme).value, L, M)
            if key not in done:
                done[key] = _run_point(runner, spec_text, cfg, key[0], L, M, ebn0_db,
                                       cfg.max_frames, cfg.max_frames + 1)
    finally:
        runner.close()
    return [done[(Scheme.parse(s).value, L, M)] for s, L, M in runs]


def run_label(run) -> str:
    scheme, L, M = run
    return f"{scheme}(L={L}{', M=%d' % M if M else ''})"


def compare_pair(flags_a, flags_b, label_a, label_b, ebn0_db) -> PairReport:
    fa = np.asarray(flags_a, dtype=bool)
    fb = np.asarray(flags_b, dtype=bool)
    n = fa.size
    ea, eb = int(fa.sum()), int(fb.sum())
    ci_a, ci_b = wilson_interval(ea, n), wilson_interval(eb, n)
    return PairReport(label_a, label_b, ebn0_db, n, ea, eb, ci_a, ci_b,
                      (eb - ea) / n if n else 0.0,
                      (int(np.count_nonzero(fa & ~fb)), int(np.count_nonzero(fb & ~fa))),
                      intervals_overlap(ci_a, ci_b))


def compare_schemes(cfg: SweepConfig, runs=None) -> list[PairReport]:
    """Paired comparison of every run against the first one at each Eb/N0."""
    if runs is None:
        runs = list(dict.fromkeys((s, L, M) for s, L, M, _ in cfg.points()))
    reports = []
    for e in cfg.ebn0:
        flags = paired_flags(cfg, runs, e)
        for run, fl in zip(runs[1:], flags[1:]):
            reports.append(compare_pair(flags[0], fl, run_label(runs[0]), run_label(run), e))
    return reports


# -- census and latency reports ----------------------------------------------

#: SUBT census of the committed (1024, 512, 24) code, per M.
REFERENCE_CENSUS = {
    2: {"1": 34, "2/SP1": 64, "2/SP2": 377, "2/rate-1/T": 54},
    4: {"1": 34, "2/SP1": 32, "2/SP2": 3, "2/rate-1/T": 30,
        "4/SP1": 32, "4/SP2": 159, "4/rate-1/T": 24},
    8: {"1": 34, "2/SP1": 32, "2/SP2": 3, "2/rate-1/T": 30, "4/SP1": 17, "4/SP2": 5,
        "4/rate-1/T": 13, "8/SP1": 15, "8/SP2": 64, "8/rate-1/T": 11},
}
REFERENCE_LATENCY = {
    2: {"lm_cycles": 735, "scd_below_m": 384, "scd_at_or_above_m": 168, "d_fine": 256,
        "d_zero": 88, "total": 943},
    4: {"lm_cycles": 520, "scd_below_m": 128, "scd_at_or_above_m": 168, "d_fine": 128,
        "d_zero": 41, "total": 647},
    8: {"lm_cycles": 430, "scd_below_m": 0, "scd_at_or_above_m": 168, "d_fine": 64,
        "d_zero": 18, "total": 516},
}


def census_report(spec: CodeSpec, Ms=(2, 4, 8)) -> dict:
    return {M: dict(census(tuple_divide(spec, M), M).rows()) for M in Ms}


def format_census(report: dict) -> str:
    keys = []
    for rows in report.values():
        keys += [k for k in rows if k not in keys]
    heads = [f"M={M}" for M in report]
    lines = ["length/class".ljust(14) + "".join(h.rjust(8) for h in heads)]
    for k in keys:
        lines.append(k.ljust(14) + "".join(
            (str(report[M][k]) if k in report[M] else "-").rjust(8) for M in report))
    return "\n".join(lines)


def latency_report(spec: CodeSpec, Ms=(2, 4, 8), L: int = 32, f_clk_mhz: float | None = None,
                   P: int = 64) -> dict:
    """Latency per M plus the baseline columns; throughput if a clock is given."""
    reports = [total_latency(spec, M, P) for M in Ms]
    out = {"L": L, "P": P, "reports": [asdict(r) for r in reports],
           "baselines": [dict(asdict(c), total=c.total) for c in reference_columns(spec, P)],
           "table": format_table(spec, Ms, P)}
    if f_clk_mhz is not None:
        for r in out["reports"]:
            r["throughput_mbps"] = spec.N * f_clk_mhz / r["total"]
    return out
