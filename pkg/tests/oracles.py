"""Brute-force references shared by several test modules."""

import itertools

import numpy as np

from polarlab.polar_code import kron_encode


def v_penalty(llrs, v):
    hd = (np.asarray(llrs) <= 0).astype(int)
    return float(np.sum(np.abs(llrs) * (np.asarray(v) != hd)))


def subt_bruteforce(llrs, info_mask, upos):
    """Minimum penalty and argmin ``u`` sets for each value of the unreliable bit.

    Every ``u`` with zeros on non-info positions is enumerated, mapped to
    ``V = u F`` and scored by its sign mismatches.
    """
    T = len(llrs)
    info = [j for j in range(T) if info_mask[j]]
    best = {0: (np.inf, []), 1: (np.inf, [])}
    for assign in itertools.product((0, 1), repeat=len(info)):
        u = np.zeros(T, dtype=np.uint8)
        u[info] = assign
        pen = v_penalty(llrs, kron_encode(u))
        b = int(u[upos])
        if pen < best[b][0]:
            best[b] = (pen, [u])
        elif pen == best[b][0]:
            best[b][1].append(u)
    return best


def bit_serial_metric(llrs, classes, upos, ubit):
    """Metric of successive-cancellation decoding of one tuple.

    Frozen bits are 0, reliable bits follow their hard decision and the
    unreliable bit is forced to ``ubit``; each decision against the bit LLR
    costs its magnitude. Arithmetic is unsaturated min-sum.
    """
    llrs = np.asarray(llrs, dtype=float)
    total = 0.0

    def rec(alpha, cls, offset):
        nonlocal total
        if alpha.size == 1:
            lam = alpha[0]
            hd = 0 if lam > 0 else 1
            c = cls[0]
            bit = 0 if c == 0 else hd if c == 1 else ubit
            if bit != hd:
                total += abs(lam)
            return [bit]
        h = alpha.size // 2
        a, b = alpha[:h], alpha[h:]
        m = np.minimum(abs(a), abs(b))
        left = rec(np.where((a < 0) != (b < 0), -m, m), cls[:h], offset)
        ps = kron_encode(np.array(left, dtype=np.uint8))
        right = rec(np.where(ps == 1, b - a, b + a), cls[h:], offset + h)
        return left + right

    u = rec(llrs, list(classes), 0)
    return total, np.array(u, dtype=np.uint8)


def genie_metric(llrs, u, llr_cap=31.0, pm_cap=255.0):
    """Path metric of the single SC path forced to decide ``u``.

    Min-sum F, saturating G, and every decision against the bit LLR adds its
    magnitude to a saturating metric.
    """
    total = 0.0

    def rec(alpha, uu):
        nonlocal total
        if alpha.size == 1:
            hd = 0 if alpha[0] > 0 else 1
            if uu[0] != hd:
                total = min(total + abs(alpha[0]), pm_cap)
            return np.array([uu[0]], dtype=np.uint8)
        h = alpha.size // 2
        a, b = alpha[:h], alpha[h:]
        m = np.minimum(abs(a), abs(b))
        left = rec(np.where((a < 0) != (b < 0), -m, m), uu[:h])
        right = rec(np.clip(np.where(left == 1, b - a, b + a), -llr_cap, llr_cap), uu[h:])
        return np.concatenate([left ^ right, right])

    rec(np.asarray(llrs, dtype=float), np.asarray(u, dtype=np.uint8))
    return total
