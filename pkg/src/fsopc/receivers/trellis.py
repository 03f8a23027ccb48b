"""Two-survivor trellis search with the selective-store strategy.

This is the readable reference implementation; the Monte-Carlo harness runs a
compiled twin (see kernels.py) that is equivalence-tested against it
decision-for-decision.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np

from ..numerics import xlogy

ONGOING_CAPACITY = 30  # ongoing-part buffer length; forced commit at the cap


class SelectiveStore:
    """Ring buffers of the most recent space/mark-detected counts.

    Each class keeps a fixed number of entries with a running sum that is
    updated by evicting the oldest entry as a new one is pushed.
    """

    def __init__(self, space_counts, mark_counts):
        self.buf0 = np.asarray(space_counts, dtype=np.int64).copy()
        self.buf1 = np.asarray(mark_counts, dtype=np.int64).copy()
        self.pos0 = 0
        self.pos1 = 0
        self.sum0 = int(self.buf0.sum())
        self.sum1 = int(self.buf1.sum())

    @property
    def n_off(self):
        return self.buf0.size

    @property
    def n_on(self):
        return self.buf1.size

    def push(self, bit, count):
        """Insert a detected count, evicting the oldest of the same class."""
        if bit:
            evicted = int(self.buf1[self.pos1])
            self.buf1[self.pos1] = count
            self.pos1 = (self.pos1 + 1) % self.buf1.size
            self.sum1 += count - evicted
        else:
            evicted = int(self.buf0[self.pos0])
            self.buf0[self.pos0] = count
            self.pos0 = (self.pos0 + 1) % self.buf0.size
            self.sum0 += count - evicted
        return evicted

    def consistent(self):
        """Running sums equal a fresh recomputation from the buffers."""
        return self.sum0 == int(self.buf0.sum()) and self.sum1 == int(
            self.buf1.sum()
        )


def bootstrap_warmup(counts, space_size, mark_size):
    """Cold-start store fill from the first observed counts.

    Sorts the warm-up counts (stably, so equal counts keep arrival order);
    the smallest fill the space buffer and the largest fill the mark buffer,
    both in arrival order. Provisional bits label the upper half as marks.
    """
    counts = np.asarray(counts, dtype=np.int64)
    if counts.size < space_size + mark_size:
        raise ValueError("not enough warm-up counts to fill the store")
    order = np.argsort(counts, kind="stable")
    low = np.sort(order[:space_size]) if space_size else np.empty(0, dtype=int)
    high = np.sort(order[counts.size - mark_size:]) if mark_size else np.empty(
        0, dtype=int
    )
    store = SelectiveStore(counts[low], counts[high])
    provisional = np.zeros(counts.size, dtype=np.int64)
    provisional[order[counts.size // 2:]] = 1
    return store, provisional


class SequenceReceiver:
    """Sequence detector: two trellis survivors over a selective store.

    metric "glrt" keeps window//2 detected counts of each class and needs no
    channel knowledge; metric "gmlsd" keeps the window most recent
    mark-detected counts and needs the background mean.
    """

    def __init__(self, metric, window, assumed_nb=None,
                 capacity=ONGOING_CAPACITY, auto_commit=True):
        if metric == "glrt":
            if window < 2:
                raise ValueError("background-agnostic metric needs window >= 2")
            self._space_size = window // 2
            self._mark_size = window // 2
        elif metric == "gmlsd":
            if window < 1:
                raise ValueError("window must be >= 1")
            if assumed_nb is None or assumed_nb <= 0:
                raise ValueError("known-background metric needs assumed_nb > 0")
            self._space_size = 0
            self._mark_size = window
        else:
            raise ValueError(f"unknown metric kind {metric!r}")
        if not 1 <= capacity <= 62:
            raise ValueError("ongoing capacity must be in [1, 62]")
        self.metric = metric
        self.window = window
        self.assumed_nb = assumed_nb
        self.capacity = capacity
        self.auto_commit = auto_commit
        self.warmup_slots = 2 * window

        self.store = None
        self._warmup = []
        self.ongoing = deque()
        self.ongoing_sum = 0
        # Survivor paths as bitmasks, oldest ongoing slot at bit 0; the
        # node-b survivor always ends in bit b.
        self.path0 = 0
        self.path1 = 0
        self.non0 = 0
        self.ron0 = 0
        self.non1 = 0
        self.ron1 = 0
        self.metric0 = 0.0
        self.metric1 = 0.0
        self.slots_in = 0
        self.emitted = 0

    @property
    def ongoing_len(self):
        return len(self.ongoing)

    def _candidate_metric(self, non, ron, d_new, osum_new):
        """Metric of a full hypothesis: detected store plus one ongoing labelling."""
        ron_t = self.store.sum1 + ron
        non_t = self.store.n_on + non
        if self.metric == "glrt":
            roff_t = self.store.sum0 + (osum_new - ron)
            noff_t = self.store.n_off + (d_new - non)
            return xlogy(roff_t, roff_t / noff_t) + xlogy(ron_t, ron_t / non_t)
        nb = self.assumed_nb
        return xlogy(ron_t, ron_t / (non_t * nb)) - ron_t + nb * non_t

    def trellis_step(self, count):
        """Extend both survivors by one slot and reselect the node survivors.

        For each target bit the higher-metric extension survives; exact ties
        keep the extension from the node-0 predecessor.
        """
        d_new = len(self.ongoing) + 1
        osum_new = self.ongoing_sum + count
        old = (
            (self.path0, self.non0, self.ron0),
            (self.path1, self.non1, self.ron1),
        )
        new_state = []
        for b in (0, 1):
            best = None
            for a in (0, 1):
                path_a, non_a, ron_a = old[a]
                non = non_a + b
                ron = ron_a + b * count
                m = self._candidate_metric(non, ron, d_new, osum_new)
                if best is None or m > best[0]:
                    best = (m, path_a | (b << (d_new - 1)), non, ron)
            new_state.append(best)
        (self.metric0, self.path0, self.non0, self.ron0) = new_state[0]
        (self.metric1, self.path1, self.non1, self.ron1) = new_state[1]
        self.ongoing.append(count)
        self.ongoing_sum = osum_new

    def _commit_front(self, bit):
        """Emit the oldest ongoing slot as `bit` and absorb it into the store."""
        count = self.ongoing.popleft()
        for name_path, name_non, name_ron in (
            ("path0", "non0", "ron0"),
            ("path1", "non1", "ron1"),
        ):
            path = getattr(self, name_path)
            if path & 1:
                setattr(self, name_non, getattr(self, name_non) - 1)
                setattr(self, name_ron, getattr(self, name_ron) - count)
            setattr(self, name_path, path >> 1)
        self.ongoing_sum -= count
        # A class without a buffer (space side of the known-background store)
        # simply drops its detected counts.
        if (self._mark_size if bit else self._space_size):
            self.store.push(bit, count)
        slot = self.emitted
        self.emitted += 1
        return slot, bit

    def merge_and_commit(self):
        """Emit the common prefix of the two survivor paths as firm decisions."""
        emitted = []
        diff = self.path0 ^ self.path1
        depth = len(self.ongoing)
        prefix = depth if diff == 0 else min(depth, (diff & -diff).bit_length() - 1)
        for _ in range(prefix):
            emitted.append(self._commit_front(self.path0 & 1))
        return emitted

    def forced_commit(self):
        """Buffer full: emit the oldest slot of the higher-metric survivor and
        re-root the other survivor to agree on it."""
        winner = self.path0 if self.metric0 >= self.metric1 else self.path1
        return [self._commit_front(winner & 1)]

    def push(self, count):
        """Feed one received count; returns [(slot_index, bit)] firm decisions.

        Decisions for slots below `warmup_slots` are the provisional
        bootstrap labels.
        """
        count = int(count)
        if count < 0:
            raise ValueError("counts must be nonnegative")
        self.slots_in += 1
        if self.store is None:
            self._warmup.append(count)
            if len(self._warmup) < self.warmup_slots:
                return []
            self.store, provisional = bootstrap_warmup(
                self._warmup, self._space_size, self._mark_size
            )
            self._warmup = []
            out = []
            for bit in provisional:
                slot = self.emitted
                self.emitted += 1
                out.append((slot, int(bit)))
            return out
        self.trellis_step(count)
        if not self.auto_commit:
            if len(self.ongoing) >= self.capacity:
                raise RuntimeError("ongoing buffer full with auto_commit off")
            return []
        emitted = self.merge_and_commit()
        if len(self.ongoing) == self.capacity:
            emitted.extend(self.forced_commit())
        return emitted

    def consistent(self):
        """Debug check: running sums and path statistics match a recount."""
        if self.store is not None and not self.store.consistent():
            return False
        counts = list(self.ongoing)
        if sum(counts) != self.ongoing_sum:
            return False
        for path, non, ron in (
            (self.path0, self.non0, self.ron0),
            (self.path1, self.non1, self.ron1),
        ):
            bits = [(path >> i) & 1 for i in range(len(counts))]
            if sum(bits) != non:
                return False
            if sum(b * c for b, c in zip(bits, counts)) != ron:
                return False
        return True

    def best_path(self):
        """Current higher-metric survivor as (metric, list of ongoing bits)."""
        depth = len(self.ongoing)
        if self.metric0 >= self.metric1:
            path, metric = self.path0, self.metric0
        else:
            path, metric = self.path1, self.metric1
        return metric, [(path >> i) & 1 for i in range(depth)]
