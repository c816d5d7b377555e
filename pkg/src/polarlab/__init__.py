"""Successive-cancellation list decoding of CRC-aided polar codes with
multi-bit tuple decoding, threshold-based path pruning and a cycle-level
latency model."""

__version__ = "0.1.0"
