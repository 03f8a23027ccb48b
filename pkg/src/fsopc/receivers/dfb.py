"""Decision-feedback symbol-by-symbol receivers.

Each symbol is decided by comparing the two one-symbol extensions of the past
decisions; the decided count then replaces the oldest stored count of its
class. No trellis search and no decision delay.
"""

from __future__ import annotations

from .metrics import WindowStats, glrt_dfb_psi, gmlsd_dfb_psi0
from .trellis import bootstrap_warmup


class DfbReceiver:
    """Feedback detector over per-class stores of `window` recent counts.

    kind "glrt" stores both classes and needs no channel knowledge; kind
    "gmlsd" stores only mark-detected counts and needs the background mean.
    """

    def __init__(self, kind, window, assumed_nb=None):
        if window < 1:
            raise ValueError("window must be >= 1")
        if kind == "glrt":
            self._space_size = window
        elif kind == "gmlsd":
            if assumed_nb is None or assumed_nb <= 0:
                raise ValueError("known-background kind needs assumed_nb > 0")
            self._space_size = 0
        else:
            raise ValueError(f"unknown receiver kind {kind!r}")
        self.kind = kind
        self.window = window
        self.assumed_nb = assumed_nb
        self.warmup_slots = 2 * window
        self.store = None
        self._warmup = []
        self.slots_in = 0
        self.emitted = 0

    def decide(self, count):
        """Extension-metric sign test for one count; ties decide space."""
        if self.kind == "glrt":
            stats = WindowStats(
                n_on=self.store.n_on,
                r_on=self.store.sum1,
                n_off=self.store.n_off,
                r_off=self.store.sum0,
            )
            psi = glrt_dfb_psi(stats, count)
        else:
            psi = gmlsd_dfb_psi0(
                self.store.sum1, self.store.n_on, count, self.assumed_nb
            )
        return 1 if psi > 0 else 0

    def push(self, count):
        """Feed one count; returns [(slot_index, bit)] decisions."""
        count = int(count)
        if count < 0:
            raise ValueError("counts must be nonnegative")
        self.slots_in += 1
        if self.store is None:
            self._warmup.append(count)
            if len(self._warmup) < self.warmup_slots:
                return []
            self.store, provisional = bootstrap_warmup(
                self._warmup, self._space_size, self.window
            )
            self._warmup = []
            out = []
            for bit in provisional:
                out.append((self.emitted, int(bit)))
                self.emitted += 1
            return out
        bit = self.decide(count)
        if bit or self._space_size:
            self.store.push(bit, count)
        slot = self.emitted
        self.emitted += 1
        return [(slot, bit)]
