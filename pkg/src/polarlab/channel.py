"""BPSK over AWGN, channel LLRs and fixed-point quantization."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

Q_LLR = 6
LLR_MAX = (1 << (Q_LLR - 1)) - 1  # 31


def noise_variance(ebn0_db: float, rate: float) -> float:
    """sigma^2 = 1 / (2 R 10^(Eb/N0 / 10))."""
    if rate <= 0:
        raise ValueError("code rate must be positive")
    return 1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0))


def rng_for_frame(master_seed: int, frame_index: int) -> np.random.Generator:
    """Independent RNG stream for one frame, the same for any worker layout."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(frame_index)]))


@dataclass(frozen=True)
class ChannelFrame:
    tx_bits: np.ndarray
    rx_llrs: np.ndarray
    ebn0_db: float
    noise_seed: int | None = None

    def __post_init__(self):
        if self.tx_bits.shape != self.rx_llrs.shape:
            raise ValueError("tx_bits and rx_llrs must have the same length")


def transmit(x, ebn0_db: float, rng: np.random.Generator, rate: float = 0.5,
             noise_seed: int | None = None) -> ChannelFrame:
    """Send codeword ``x`` with BPSK (0 -> +1, 1 -> -1) through AWGN.

    ``rate`` is K/N and sets the noise level for a given Eb/N0. Returns the
    real LLRs ``2 y / sigma^2``.
    """
    x = np.asarray(x, dtype=np.uint8)
    sigma2 = noise_variance(ebn0_db, rate)
    y = 1.0 - 2.0 * x + rng.normal(0.0, np.sqrt(sigma2), size=x.shape)
    return ChannelFrame(tx_bits=x.copy(), rx_llrs=2.0 * y / sigma2,
                        ebn0_db=float(ebn0_db), noise_seed=noise_seed)


def quantize(l, scale: float = 1.0, llr_max: int = LLR_MAX) -> np.ndarray:
    """Symmetric saturating quantizer, round half away from zero.

    Returns signed integers in ``[-llr_max, llr_max]``; the sign bit is the
    sign of the integer and the magnitude ``min(round(|l| * scale), llr_max)``.
    NaN inputs saturate to ``+llr_max``.
    """
    arr = np.asarray(l, dtype=float)
    nan = np.isnan(arr)
    if nan.any():
        log.warning("quantize: %d NaN LLR(s) saturated to +%d", int(nan.sum()), llr_max)
    mag = np.minimum(np.floor(np.abs(arr) * scale + 0.5), llr_max)
    out = np.where(arr < 0, -mag, mag)
    out = np.where(nan, llr_max, out).astype(np.int64)
    return out if out.ndim else out.item()


def to_sign_magnitude(q) -> tuple[np.ndarray, np.ndarray]:
    """Split signed quantized LLRs into (sign bit, magnitude)."""
    q = np.asarray(q, dtype=np.int64)
    return (q < 0).astype(np.uint8), np.abs(q)
