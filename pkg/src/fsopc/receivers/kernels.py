"""Compiled inner loops for the sequence and feedback receivers.

These mirror the reference implementations in trellis.py / dfb.py expression
for expression (same operand order, no fastmath) so that both paths produce
bit-identical decisions; the equivalence is enforced by tests.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_RING = 32  # ongoing ring capacity, power of two above the 30-slot cap
_MASK = _RING - 1

# int-state layout shared by the python wrappers in engines.py
POS0, POS1, SUM0, SUM1, HEAD, DEPTH, OSUM, PATH0, PATH1, NON0, RON0, NON1, \
    RON1, EMIT, EXCL = range(15)


@njit(cache=True)
def _xlogy(x, y):
    if x == 0.0:
        return 0.0
    return x * math.log(y)


@njit(cache=True)
def seq_kernel(counts, truth, kind, nb, store0, store1, ist, fst,
               oring, otruth, dec):
    """Run the two-survivor search over one burst of counts.

    kind 0 is the background-agnostic metric over a dual store, kind 1 the
    known-background metric over a mark-only store. Returns (number of firm
    decisions written to dec, bit errors among tallied ones, tallied count).
    """
    pos0 = ist[POS0]
    pos1 = ist[POS1]
    sum0 = ist[SUM0]
    sum1 = ist[SUM1]
    head = ist[HEAD]
    d = ist[DEPTH]
    osum = ist[OSUM]
    path0 = ist[PATH0]
    path1 = ist[PATH1]
    non0 = ist[NON0]
    ron0 = ist[RON0]
    non1 = ist[NON1]
    ron1 = ist[RON1]
    emit_idx = ist[EMIT]
    excl = ist[EXCL]
    m0 = fst[0]
    m1 = fst[1]
    n_st0 = store0.size
    n_st1 = store1.size

    n_emit = 0
    errors = 0
    counted = 0

    for i in range(counts.size):
        r = counts[i]
        d_new = d + 1
        osum_new = osum + r

        # Four extension candidates; per node keep the strictly better one
        # (ties keep the node-0 predecessor).
        best_m0 = -np.inf
        best_p0 = np.int64(0)
        best_n0 = np.int64(0)
        best_r0 = np.int64(0)
        best_m1 = -np.inf
        best_p1 = np.int64(0)
        best_n1 = np.int64(0)
        best_r1 = np.int64(0)
        for b in range(2):
            for a in range(2):
                if a == 0:
                    path_a = path0
                    non = non0 + b
                    ron = ron0 + b * r
                else:
                    path_a = path1
                    non = non1 + b
                    ron = ron1 + b * r
                ron_t = sum1 + ron
                non_t = n_st1 + non
                if kind == 0:
                    roff_t = sum0 + (osum_new - ron)
                    noff_t = n_st0 + (d_new - non)
                    m = _xlogy(roff_t, roff_t / noff_t) + _xlogy(
                        ron_t, ron_t / non_t
                    )
                else:
                    m = _xlogy(ron_t, ron_t / (non_t * nb)) - ron_t + nb * non_t
                if b == 0:
                    if m > best_m0:
                        best_m0 = m
                        best_p0 = path_a
                        best_n0 = non
                        best_r0 = ron
                else:
                    if m > best_m1:
                        best_m1 = m
                        best_p1 = path_a | (np.int64(1) << (d_new - 1))
                        best_n1 = non
                        best_r1 = ron
        m0 = best_m0
        path0 = best_p0
        non0 = best_n0
        ron0 = best_r0
        m1 = best_m1
        path1 = best_p1
        non1 = best_n1
        ron1 = best_r1
        oring[(head + d) & _MASK] = r
        otruth[(head + d) & _MASK] = truth[i]
        d = d_new
        osum = osum_new

        # Natural merge: the common prefix of the survivors is firm.
        diff = path0 ^ path1
        if diff == 0:
            prefix = d
        else:
            prefix = 0
            while ((diff >> prefix) & 1) == 0:
                prefix += 1
            if prefix > d:
                prefix = d
        for _ in range(prefix):
            bit = path0 & 1
            c = oring[head & _MASK]
            tb = otruth[head & _MASK]
            if path0 & 1:
                non0 -= 1
                ron0 -= c
            if path1 & 1:
                non1 -= 1
                ron1 -= c
            path0 >>= 1
            path1 >>= 1
            osum -= c
            d -= 1
            head += 1
            if bit == 1:
                ev = store1[pos1]
                store1[pos1] = c
                pos1 = (pos1 + 1) % n_st1
                sum1 += c - ev
            elif n_st0 > 0:
                ev = store0[pos0]
                store0[pos0] = c
                pos0 = (pos0 + 1) % n_st0
                sum0 += c - ev
            dec[n_emit] = bit
            n_emit += 1
            if emit_idx >= excl:
                counted += 1
                if bit != tb:
                    errors += 1
            emit_idx += 1

        # Buffer full without a merge: force out the oldest slot of the
        # higher-metric survivor (ties to node 0).
        if d == _RING - 2:
            if m0 >= m1:
                bit = path0 & 1
            else:
                bit = path1 & 1
            c = oring[head & _MASK]
            tb = otruth[head & _MASK]
            if path0 & 1:
                non0 -= 1
                ron0 -= c
            if path1 & 1:
                non1 -= 1
                ron1 -= c
            path0 >>= 1
            path1 >>= 1
            osum -= c
            d -= 1
            head += 1
            if bit == 1:
                ev = store1[pos1]
                store1[pos1] = c
                pos1 = (pos1 + 1) % n_st1
                sum1 += c - ev
            elif n_st0 > 0:
                ev = store0[pos0]
                store0[pos0] = c
                pos0 = (pos0 + 1) % n_st0
                sum0 += c - ev
            dec[n_emit] = bit
            n_emit += 1
            if emit_idx >= excl:
                counted += 1
                if bit != tb:
                    errors += 1
            emit_idx += 1

    ist[POS0] = pos0
    ist[POS1] = pos1
    ist[SUM0] = sum0
    ist[SUM1] = sum1
    ist[HEAD] = head
    ist[DEPTH] = d
    ist[OSUM] = osum
    ist[PATH0] = path0
    ist[PATH1] = path1
    ist[NON0] = non0
    ist[RON0] = ron0
    ist[NON1] = non1
    ist[RON1] = ron1
    ist[EMIT] = emit_idx
    fst[0] = m0
    fst[1] = m1
    return n_emit, errors, counted


# int-state layout of the feedback kernel
D_POS0, D_POS1, D_SUM0, D_SUM1, D_EMIT, D_EXCL = range(6)


@njit(cache=True)
def dfb_kernel(counts, truth, kind, nb, store0, store1, ist, dec):
    """Symbol-by-symbol feedback loop; one decision per count."""
    pos0 = ist[D_POS0]
    pos1 = ist[D_POS1]
    sum0 = ist[D_SUM0]
    sum1 = ist[D_SUM1]
    emit_idx = ist[D_EMIT]
    excl = ist[D_EXCL]
    n0 = store0.size
    n1 = store1.size

    errors = 0
    counted = 0

    for i in range(counts.size):
        r = counts[i]
        if kind == 0:
            if r > 0:
                term_new = r * math.log(
                    (n0 + 1) / (sum0 + r) * (sum1 + r) / (n1 + 1)
                )
            else:
                term_new = 0.0
            if sum1 > 0:
                term_on = sum1 * math.log((n1 + 1) / (sum1 + r) * sum1 / n1)
            else:
                term_on = 0.0
            if sum0 > 0:
                term_off = sum0 * math.log((sum0 + r) / (n0 + 1) * n0 / sum0)
            else:
                term_off = 0.0
            psi = term_new - term_on - term_off
        else:
            psi = (
                _xlogy(sum1 + r, (sum1 + r) / ((n1 + 1) * nb))
                - _xlogy(sum1, sum1 / (n1 * nb))
                - r
                + nb
            )
        bit = 1 if psi > 0 else 0
        if bit == 1:
            ev = store1[pos1]
            store1[pos1] = r
            pos1 = (pos1 + 1) % n1
            sum1 += r - ev
        elif n0 > 0:
            ev = store0[pos0]
            store0[pos0] = r
            pos0 = (pos0 + 1) % n0
            sum0 += r - ev
        dec[i] = bit
        if emit_idx >= excl:
            counted += 1
            if bit != truth[i]:
                errors += 1
        emit_idx += 1

    ist[D_POS0] = pos0
    ist[D_POS1] = pos1
    ist[D_SUM0] = sum0
    ist[D_SUM1] = sum1
    ist[D_EMIT] = emit_idx
    return counts.size, errors, counted
