import itertools

import numpy as np
import pytest

from polarlab.channel import quantize, rng_for_frame, transmit
from polarlab.list_decoder import ListDecoder, Scheme, lscd_decode, prune_exact, write_event_log
from polarlab.list_decoder.reference import reference_decode
from polarlab.polar_code import BitClass, build_codespec, kron_encode
from polarlab.scd_core import scd_decode

from oracles import genie_metric

SCHEMES = [("ExactSort", None), ("DTS", None), ("DTSAdvance", None), ("SMBDTS", 2),
           ("SMBDTS", 4), ("SMBDTS", 8), ("FullMBD", 2), ("FullMBD", 4)]


def noisy_frame(spec, seed, i, ebn0, quantized=True):
    rng = rng_for_frame(seed, i)
    data = rng.integers(0, 2, spec.K - spec.r)
    u = spec.embed(spec.attach_crc(data))
    llrs = transmit(kron_encode(u), ebn0, rng, spec.rate).rx_llrs
    return u, (quantize(llrs).astype(float) if quantized else llrs)


@pytest.mark.parametrize("scheme,M", SCHEMES[:6])
def test_noiseless_recovery(default_spec, scheme, M):
    rng = np.random.default_rng(0)
    dec = ListDecoder(default_spec, 8, scheme, M)
    u = default_spec.embed(default_spec.attach_crc(rng.integers(0, 2, 488)))
    res = dec.decode(12.0 * (1 - 2.0 * kron_encode(u)))
    assert res.passed and np.array_equal(res.u_hat, u)


@pytest.mark.parametrize("scheme,M", SCHEMES)
@pytest.mark.parametrize("L", [2, 8])
def test_lazy_copy_matches_deep_copy(small_spec, scheme, M, L):
    dec = ListDecoder(small_spec, L, scheme, M)
    for i in range(40):
        _, llrs = noisy_frame(small_spec, 3, i, 1.0)
        a, b = dec.decode(llrs), reference_decode(dec, llrs)
        assert np.array_equal(a.u_hat, b.u_hat)
        assert (a.metric, a.path, a.passed) == (b.metric, b.path, b.passed)


def test_exhaustive_codebook_minimum():
    for K in (2, 4, 5):
        spec = build_codespec(3, K, 0)
        dec = ListDecoder(spec, 1 << K, "ExactSort")
        msgs = [np.array(m, dtype=np.uint8) for m in itertools.product((0, 1), repeat=K)]
        for i in range(100):
            _, llrs = noisy_frame(spec, 8, i, 0.0)
            metrics = np.array([genie_metric(llrs, spec.embed(m)) for m in msgs])
            res = dec.decode(llrs)
            assert res.metric == metrics.min()
            winners = [spec.embed(msgs[k]) for k in np.flatnonzero(metrics == metrics.min())]
            assert any(np.array_equal(res.u_hat, w) for w in winners)


def _events(spec, scheme, M, L, frames=20, ebn0=1.0):
    dec = ListDecoder(spec, L, scheme, M)
    for i in range(frames):
        _, llrs = noisy_frame(spec, 4, i, ebn0)
        yield dec, dec.decode(llrs, log_events=True).events


def test_list_growth(small_spec):
    first_u = int(np.flatnonzero(small_spec.bit_class == BitClass.UNRELIABLE)[0])
    for dec, events in _events(small_spec, "DTS", None, 8):
        assert events[0]["offset"] == first_u
        sizes = [ev["n_active"] for ev in events]
        assert sizes[:4] == [1, 2, 4, 8]
        assert all(s == 8 for s in sizes[3:])


def test_metric_monotone_and_full_list(small_spec):
    for scheme, M in SCHEMES:
        for dec, events in _events(small_spec, scheme, M, 4):
            for ev in events:
                parents = ev["parent_metrics"]
                for k in ev["survivors"]:
                    assert ev["expanded"][k] >= parents[k // ev["n_cand"]]
                want = min(dec.L, ev["n_active"] * ev["n_cand"])
                assert len(ev["survivors"]) == want


def test_dts_bands_on_logged_events(default_spec):
    seen = 0
    for dec, events in _events(default_spec, "DTS", None, 8, frames=5, ebn0=1.5):
        for ev in events:
            if ev["mode"] != "dts":
                continue
            seen += 1
            m = np.array(ev["expanded"])
            exact = set(prune_exact(m, dec.L).tolist())
            assert set(np.flatnonzero(m < ev["AT"]).tolist()) <= exact
            assert not any(m[k] > ev["RT"] for k in exact)
    assert seen > 100


def test_event_log_json(small_spec, tmp_path):
    import json
    _, events = next(_events(small_spec, "SMBDTS", 4, 4, frames=1))
    path = tmp_path / "ev.jsonl"
    with open(path, "w") as fh:
        write_event_log(events, fh)
    lines = path.read_text().splitlines()
    assert len(lines) == len(events) and json.loads(lines[0])["leaf"] == events[0]["leaf"]


@pytest.mark.parametrize("n,K,M", [(3, 5, 2), (3, 4, 4), (4, 6, 4), (4, 5, 2)])
def test_full_mbd_equals_bitwise_exact_sort_without_pruning(n, K, M):
    spec = build_codespec(n, K, 0)
    L = 1 << K
    bitwise = ListDecoder(spec, L, "ExactSort", quantized=False)
    mbd = ListDecoder(spec, L, "FullMBD", M, quantized=False)
    for i in range(200):
        _, llrs = noisy_frame(spec, 6, i, 0.0, quantized=False)
        a, b = bitwise.decode(llrs), mbd.decode(llrs)
        assert np.array_equal(a.u_hat, b.u_hat)
        assert a.metric == pytest.approx(b.metric)


def test_zero_budget_never_expands(small_spec):
    spec = build_codespec(6, 32, 6, unreliable_budget=0, crc_poly=0x43)
    dec = ListDecoder(spec, 8, "DTS")
    for i in range(20):
        _, llrs = noisy_frame(spec, 2, i, 1.0)
        res = dec.decode(llrs, log_events=True)
        assert res.events == []
        assert np.array_equal(res.u_hat, scd_decode(llrs, spec))


def test_lscd_decode_wrapper(small_spec):
    u, llrs = noisy_frame(small_spec, 1, 0, 8.0)
    u_hat, ok = lscd_decode(llrs, small_spec, 4, "SMBDTS", 4)
    assert ok and np.array_equal(u_hat, u)


def test_argument_errors(small_spec):
    with pytest.raises(ValueError):
        ListDecoder(small_spec, 6, "DTS")
    with pytest.raises(ValueError):
        ListDecoder(small_spec, 4, "FullMBD")
    with pytest.raises(ValueError):
        ListDecoder(small_spec, 4, "Bogus")
    with pytest.raises(ValueError):
        ListDecoder(small_spec, 4, "DTS").decode(np.zeros(10))
    assert Scheme.parse("smb-dts") == Scheme.SMB_DTS
