"""Polar code construction, Kronecker encoding, bit classification and CRC.

Bits are indexed in natural (non bit-reversed) order, so ``x = u . F^{(x)n}``
with ``F = [[1, 0], [1, 1]]``.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

#: CRC-24 "Radix-64" generator, leading x^24 term included.
CRC24_RADIX64 = 0x1864CFB

DEFAULT_DESIGN_SNR_DB = 2.5


class BitClass(enum.IntEnum):
    FROZEN = 0
    RELIABLE = 1
    UNRELIABLE = 2

    @property
    def letter(self) -> str:
        return "FRU"[self.value]


_LETTERS = {"F": BitClass.FROZEN, "R": BitClass.RELIABLE, "U": BitClass.UNRELIABLE}


def _as_bits(u) -> np.ndarray:
    bits = np.asarray(u)
    if bits.dtype == bool:
        bits = bits.astype(np.uint8)
    if bits.size and (np.any(bits < 0) or np.any(bits > 1)):
        raise ValueError("bit vectors may only contain 0 and 1")
    return bits.astype(np.uint8, copy=False)


def kron_encode(u, n: int | None = None) -> np.ndarray:
    """Return ``u . F^{(x)n}`` over GF(2) via an in-place butterfly.

    Works on the last axis, so a ``(frames, N)`` batch is encoded row-wise.
    The transform is an involution: encoding twice gives ``u`` back.
    """
    x = _as_bits(u).copy()
    length = x.shape[-1] if x.ndim else 0
    if length == 0 or length & (length - 1):
        raise ValueError(f"length must be a power of two, got {length}")
    if n is not None and length != 1 << n:
        raise ValueError(f"expected length 2**{n} = {1 << n}, got {length}")
    lead = x.shape[:-1]
    h = 1
    while h < length:
        view = x.reshape(*lead, length // (2 * h), 2, h)
        view[..., 0, :] ^= view[..., 1, :]
        h *= 2
    return x


# -- CRC ---------------------------------------------------------------------


def crc_poly_bits(poly: int | str, r: int | None = None) -> np.ndarray:
    """Generator polynomial as an MSB-first bit array of length ``r + 1``.

    ``poly`` may be given with its leading term (``0x1864cfb`` for CRC-24) or
    without it (``0x864cfb``); in the latter case ``r`` is required.
    """
    value = int(poly, 16) if isinstance(poly, str) else int(poly)
    if value <= 0:
        raise ValueError("CRC polynomial must be positive")
    if r is None:
        r = value.bit_length() - 1
    if value.bit_length() <= r:
        value |= 1 << r
    if value.bit_length() != r + 1:
        raise ValueError(f"polynomial 0x{value:x} does not have degree {r}")
    if r < 1:
        raise ValueError("CRC degree must be at least 1")
    return np.array([(value >> (r - i)) & 1 for i in range(r + 1)], dtype=np.uint8)


def crc_remainder(message, poly) -> np.ndarray:
    """r-bit remainder of ``message(x) . x^r mod poly(x)``, MSB first.

    ``poly`` is an MSB-first bit array (see :func:`crc_poly_bits`) or an int.
    """
    msg = _as_bits(message)
    if msg.ndim != 1 or msg.size == 0:
        raise ValueError("message must be a non-empty 1-D bit vector")
    g = crc_poly_bits(poly) if not isinstance(poly, np.ndarray) else _as_bits(poly)
    r = g.size - 1
    if r < 1 or g[0] != 1:
        raise ValueError("polynomial must have degree >= 1 with a leading one")
    buf = np.concatenate([msg, np.zeros(r, dtype=np.uint8)])
    for i in range(msg.size):
        if buf[i]:
            buf[i : i + r + 1] ^= g
    return buf[-r:].copy()


def crc_attach(message, poly) -> np.ndarray:
    msg = _as_bits(message)
    return np.concatenate([msg, crc_remainder(msg, poly)])


def crc_check(word, poly) -> bool:
    return not crc_remainder(word, poly).any()


def crc_generator_matrix(k: int, poly) -> np.ndarray:
    """Matrix ``G`` with ``crc_remainder(m) == (m @ G) % 2`` for length-k ``m``.

    Row ``i`` is the remainder of the unit vector ``e_i``; used for fast batch
    checks of many candidate paths.
    """
    g = crc_poly_bits(poly) if not isinstance(poly, np.ndarray) else _as_bits(poly)
    r = g.size - 1
    rows = np.zeros((k, r), dtype=np.uint8)
    # row i is x^(k-1-i+r) mod g; walk upwards multiplying by x each step
    state = crc_remainder(np.array([1], dtype=np.uint8), g)
    for i in range(k - 1, -1, -1):
        rows[i] = state
        carry = state[0]
        state = np.concatenate([state[1:], [0]]).astype(np.uint8)
        if carry:
            state ^= g[1:]
    return rows


# -- construction ------------------------------------------------------------


_PHI_LOW = 0.6715  # below this the quadratic segment is used (phi(0) = 1)


def _log_phi(x: np.ndarray) -> np.ndarray:
    """log of the piecewise phi approximation (log domain avoids underflow)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    low = x < _PHI_LOW
    mid = (x >= _PHI_LOW) & (x < 10)
    big = x >= 10
    out[low] = 0.0564 * x[low] ** 2 - 0.4856 * x[low]
    out[mid] = -0.4527 * x[mid] ** 0.86 + 0.0218
    xb = x[big]
    out[big] = 0.5 * np.log(np.pi / xb) - xb / 4 + np.log1p(-10 / (7 * xb))
    return out


def _phi_inv_log(log_y: np.ndarray) -> np.ndarray:
    """Solve log_phi(x) = log_y for x (phi is decreasing)."""
    log_y = np.minimum(np.asarray(log_y, dtype=float), 0.0)
    # quadratic segment in closed form, written without cancellation
    disc = np.sqrt(np.maximum(0.4856 ** 2 + 4 * 0.0564 * log_y, 0.0))
    x_low = -2 * log_y / (0.4856 + disc)
    lo = np.full_like(log_y, _PHI_LOW)
    hi = np.full_like(log_y, 2 * _PHI_LOW)
    while np.any(_log_phi(hi) > log_y):
        hi = np.where(_log_phi(hi) > log_y, hi * 2, hi)
    for _ in range(100):
        mid = (lo + hi) / 2
        above = _log_phi(mid) > log_y
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return np.where(log_y >= _log_phi(np.array(_PHI_LOW)), x_low + 0.0, (lo + hi) / 2)


def _check_node_mean(m: np.ndarray) -> np.ndarray:
    # phi^-1(1 - (1 - phi(m))^2), with log(phi (2 - phi)) = lp + log1p(1 - phi)
    lp = _log_phi(m)
    return _phi_inv_log(lp + np.log1p(-np.expm1(lp)))


def ga_reliabilities(n: int, design_snr_db: float = DEFAULT_DESIGN_SNR_DB,
                     rate: float = 0.5) -> np.ndarray:
    """Mean LLR of every synthetic channel under the Gaussian approximation.

    ``design_snr_db`` is Eb/N0; a larger returned value means a more reliable
    bit. The check-node update uses Chung's phi approximation.
    """
    sigma2 = 1.0 / (2.0 * rate * 10 ** (design_snr_db / 10))
    means = np.array([2.0 / sigma2])
    for _ in range(n):
        minus = _check_node_mean(means)
        plus = 2 * means
        # MSB of the index selects the first (outermost) polarization step
        means = np.concatenate([minus, plus])
    return _reorder_msb_first(means, n)


def _reorder_msb_first(means: np.ndarray, n: int) -> np.ndarray:
    # Each split above lands in the most significant index bit, but the first
    # split applied to the channel belongs in the MSB, so reverse bit order.
    N = 1 << n
    idx = np.arange(N)
    rev = np.zeros(N, dtype=np.int64)
    for b in range(n):
        rev |= ((idx >> b) & 1) << (n - 1 - b)
    return means[rev]


@dataclass(frozen=True, eq=False)
class CodeSpec:
    """Code parameters plus the frozen / reliable / unreliable partition."""

    n: int
    K: int
    r: int
    crc_poly: np.ndarray
    bit_class: np.ndarray
    reliabilities: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        bc = np.asarray(self.bit_class, dtype=np.uint8).copy()
        if bc.shape != (self.N,):
            raise ValueError(f"bit_class must have length {self.N}")
        if np.any(bc > 2):
            raise ValueError("bit_class entries must be F, R or U")
        if int(np.count_nonzero(bc != BitClass.FROZEN)) != self.K:
            raise ValueError("number of non-frozen bits must equal K")
        if not 0 <= self.r <= self.K:
            raise ValueError("CRC length must satisfy 0 <= r <= K")
        poly = np.asarray(self.crc_poly, dtype=np.uint8).copy()
        if self.r:
            if poly.size != self.r + 1 or poly[0] != 1:
                raise ValueError(f"crc_poly must have degree exactly {self.r}")
        elif poly.size > 1:
            raise ValueError("crc_poly given for a code without CRC")
        bc.setflags(write=False)
        poly.setflags(write=False)
        object.__setattr__(self, "bit_class", bc)
        object.__setattr__(self, "crc_poly", poly)
        if self.reliabilities is not None:
            rel = np.asarray(self.reliabilities, dtype=float).copy()
            rel.setflags(write=False)
            object.__setattr__(self, "reliabilities", rel)

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def rate(self) -> float:
        return self.K / self.N

    @cached_property
    def info_indices(self) -> np.ndarray:
        return np.flatnonzero(self.bit_class != BitClass.FROZEN)

    @cached_property
    def frozen_mask(self) -> np.ndarray:
        return self.bit_class == BitClass.FROZEN

    @property
    def first_info_index(self) -> int | None:
        idx = self.info_indices
        return int(idx[0]) if idx.size else None

    def count(self, cls: BitClass) -> int:
        return int(np.count_nonzero(self.bit_class == cls))

    @cached_property
    def crc_matrix(self) -> np.ndarray:
        if not self.r:
            return np.zeros((self.K, 0), dtype=np.uint8)
        return crc_generator_matrix(self.K - self.r, self.crc_poly)

    def class_string(self) -> str:
        return "".join("FRU"[c] for c in self.bit_class)

    # -- message handling -------------------------------------------------

    def attach_crc(self, data) -> np.ndarray:
        """Append the checksum to ``K - r`` data bits (any leading batch dims)."""
        data = _as_bits(data)
        if data.shape[-1] != self.K - self.r:
            raise ValueError(f"expected {self.K - self.r} data bits")
        if not self.r:
            return data.copy()
        parity = (data.astype(np.int64) @ self.crc_matrix.astype(np.int64)) & 1
        return np.concatenate([data, parity.astype(np.uint8)], axis=-1)

    def crc_ok(self, messages) -> np.ndarray:
        """Vectorised CRC check of K-bit messages (last axis)."""
        messages = _as_bits(messages)
        if not self.r:
            return np.ones(messages.shape[:-1], dtype=bool)
        data = messages[..., : self.K - self.r].astype(np.int64)
        parity = (data @ self.crc_matrix.astype(np.int64)) & 1
        return np.all(parity == messages[..., self.K - self.r :], axis=-1)

    def embed(self, messages) -> np.ndarray:
        """Place K-bit messages on the information positions of ``u``."""
        messages = _as_bits(messages)
        u = np.zeros(messages.shape[:-1] + (self.N,), dtype=np.uint8)
        u[..., self.info_indices] = messages
        return u

    def extract(self, u) -> np.ndarray:
        return _as_bits(u)[..., self.info_indices]

    # -- persistence ------------------------------------------------------

    def to_text(self) -> str:
        poly = 0
        for b in self.crc_poly:
            poly = (poly << 1) | int(b)
        lines = [f"{self.n} {self.K} {self.r} 0x{poly:x}"]
        s = self.class_string()
        lines += [s[i : i + 64] for i in range(0, len(s), 64)]
        return "\n".join(lines) + "\n"

    def save(self, path: str | os.PathLike) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "CodeSpec":
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not lines:
            raise ValueError("empty CodeSpec text")
        header = lines[0].split()
        if len(header) != 4:
            raise ValueError("header must read 'n K r poly_hex'")
        n, K, r = (int(v) for v in header[:3])
        body = "".join("".join(lines[1:]).split())
        try:
            classes = np.array([_LETTERS[c] for c in body.upper()], dtype=np.uint8)
        except KeyError as exc:
            raise ValueError(f"unknown bit class letter {exc.args[0]!r}") from None
        poly = crc_poly_bits(header[3], r) if r else np.ones(1, dtype=np.uint8)
        return cls(n=n, K=K, r=r, crc_poly=poly, bit_class=classes)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "CodeSpec":
        return cls.from_text(Path(path).read_text())


def build_codespec(n: int, K: int, r: int, reliabilities=None,
                   unreliable_budget: int | None = None,
                   crc_poly: int | str = CRC24_RADIX64,
                   design_snr_db: float = DEFAULT_DESIGN_SNR_DB) -> CodeSpec:
    """Classify every bit from a reliability ranking.

    The ``N - K`` least reliable bits are frozen; of the K information bits
    the ``unreliable_budget`` least reliable are Unreliable and the rest
    Reliable. Without explicit reliabilities the Gaussian-approximation
    constructor is run at ``design_snr_db``. The budget defaults to K
    (plain list decoding, nothing hard-decided).
    """
    N = 1 << n
    if not 0 <= K <= N:
        raise ValueError(f"K must lie in [0, {N}]")
    if unreliable_budget is None:
        unreliable_budget = K
    if not 0 <= unreliable_budget <= K:
        raise ValueError("unreliable_budget must lie in [0, K]")
    if reliabilities is None:
        reliabilities = ga_reliabilities(n, design_snr_db, rate=K / N if K else 0.5)
    rel = np.asarray(reliabilities, dtype=float)
    if rel.shape != (N,):
        raise ValueError(f"reliabilities must have length {N}")
    order = np.argsort(rel, kind="stable")  # least reliable first
    classes = np.full(N, BitClass.RELIABLE, dtype=np.uint8)
    classes[order[: N - K]] = BitClass.FROZEN
    info_order = order[N - K :]
    classes[info_order[:unreliable_budget]] = BitClass.UNRELIABLE
    poly = crc_poly_bits(crc_poly, r) if r else np.ones(1, dtype=np.uint8)
    return CodeSpec(n=n, K=K, r=r, crc_poly=poly, bit_class=classes,
                    reliabilities=rel)


def load_reliabilities(path: str | os.PathLike) -> np.ndarray:
    """Whitespace-separated reliability scores, one per bit index."""
    return np.loadtxt(path, dtype=float).reshape(-1)


def default_spec_path() -> Path:
    return Path(__file__).with_name("data") / "codespec_1024_512_24.txt"


def load_default_spec() -> CodeSpec:
    """The committed (1024, 512, 24) code used for the latency tables."""
    return CodeSpec.load(default_spec_path())


def log2_exact(value: int) -> int:
    if value < 1 or value & (value - 1):
        raise ValueError(f"{value} is not a power of two")
    return int(math.log2(value))
