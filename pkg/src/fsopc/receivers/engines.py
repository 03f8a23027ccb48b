"""Receiver configurations and per-block simulation engines.

Every engine consumes one coherence block of counts at a time, carries its
state across blocks, and tallies bit errors against the ground truth for
emitted slots at or beyond its exclusion boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .dfb import DfbReceiver
from .ideal import ideal_threshold
from .msd import gmlsd_block_metric, mlsd_block_metric, msd_block_decode
from .trellis import ONGOING_CAPACITY, SequenceReceiver, bootstrap_warmup

RECEIVER_KINDS = (
    "ideal",
    "mlsd",
    "gmlsd_seq",
    "glrt_seq",
    "glrt_dfb",
    "gmlsd_dfb",
)


@dataclass(frozen=True)
class ReceiverConfig:
    """One receiver selection: kind, memory length, and assumed knowledge.

    assumed_nb is consulted by the mlsd / gmlsd_* kinds (their background
    belief, which the truth may contradict); assumed_ns and assumed_nb on the
    ideal kind override the per-block truth and exist only as test hooks.
    mode selects the trellis or the sorting block decoder for gmlsd_seq.
    """

    kind: str
    window_l: int = 1
    assumed_nb: float | None = None
    assumed_ns: float | None = None
    mode: str = "trellis"

    def __post_init__(self):
        if self.kind not in RECEIVER_KINDS:
            raise ValueError(
                f"unknown receiver kind {self.kind!r}; choose from {RECEIVER_KINDS}"
            )
        if self.kind != "ideal" and self.window_l < 1:
            raise ValueError("window_l must be >= 1")
        if self.kind == "glrt_seq" and self.window_l < 2:
            raise ValueError("glrt_seq needs window_l >= 2")
        if self.kind in ("mlsd", "gmlsd_seq", "gmlsd_dfb") and (
            self.assumed_nb is None or self.assumed_nb <= 0
        ):
            raise ValueError(f"{self.kind} needs assumed_nb > 0")
        if self.mode not in ("trellis", "block"):
            raise ValueError("mode must be 'trellis' or 'block'")
        if self.mode == "block" and self.kind not in ("gmlsd_seq", "mlsd"):
            raise ValueError("block mode applies to gmlsd_seq only")

    @property
    def label(self):
        if self.kind == "ideal":
            return "ideal"
        if self.kind == "gmlsd_seq" and self.mode == "block":
            return f"gmlsd_msd_L{self.window_l}"
        return f"{self.kind}_L{self.window_l}"


class SequenceEngine:
    """Compiled twin of :class:`SequenceReceiver` for long Monte-Carlo runs."""

    def __init__(self, metric, window, assumed_nb=None, exclude_before=0,
                 record=False):
        if metric == "glrt":
            if window < 2:
                raise ValueError("background-agnostic metric needs window >= 2")
            self._space_size = window // 2
            self._mark_size = window // 2
            self._kind = 0
            self._nb = 0.0
        elif metric == "gmlsd":
            if assumed_nb is None or assumed_nb <= 0:
                raise ValueError("known-background metric needs assumed_nb > 0")
            self._space_size = 0
            self._mark_size = window
            self._kind = 1
            self._nb = float(assumed_nb)
        else:
            raise ValueError(f"unknown metric kind {metric!r}")
        self.warmup_slots = 2 * window
        self.exclude_before = int(exclude_before)
        self.record = record
        self.decisions = [] if record else None
        self._warm_counts = []
        self._warm_truth = []
        self._ist = None
        self._fst = None
        self._store0 = np.zeros(0, dtype=np.int64)
        self._store1 = np.zeros(0, dtype=np.int64)
        self._oring = np.zeros(kernels._RING, dtype=np.int64)
        self._otruth = np.zeros(kernels._RING, dtype=np.int64)

    def _bootstrap(self):
        store, provisional = bootstrap_warmup(
            self._warm_counts, self._space_size, self._mark_size
        )
        self._store0 = store.buf0
        self._store1 = store.buf1
        ist = np.zeros(15, dtype=np.int64)
        ist[kernels.SUM0] = store.sum0
        ist[kernels.SUM1] = store.sum1
        ist[kernels.EMIT] = self.warmup_slots
        ist[kernels.EXCL] = self.exclude_before
        self._ist = ist
        self._fst = np.zeros(2, dtype=np.float64)
        errors = 0
        counted = 0
        for slot, bit in enumerate(provisional):
            if slot >= self.exclude_before:
                counted += 1
                if bit != self._warm_truth[slot]:
                    errors += 1
        if self.record:
            self.decisions.append(np.asarray(provisional, dtype=np.int64))
        self._warm_counts = []
        self._warm_truth = []
        return errors, counted

    def run_block(self, counts, truth, n_r=0.0, n_b=0.0):
        counts = np.ascontiguousarray(counts, dtype=np.int64)
        truth = np.ascontiguousarray(truth, dtype=np.int64)
        errors = 0
        counted = 0
        start = 0
        if self._ist is None:
            need = self.warmup_slots - len(self._warm_counts)
            take = min(need, counts.size)
            self._warm_counts.extend(counts[:take].tolist())
            self._warm_truth.extend(truth[:take].tolist())
            start = take
            if len(self._warm_counts) == self.warmup_slots:
                errors, counted = self._bootstrap()
            else:
                return errors, counted
        if start < counts.size:
            dec = np.empty(counts.size - start + kernels._RING, dtype=np.int64)
            n_emit, err, cnt = kernels.seq_kernel(
                counts[start:],
                truth[start:],
                self._kind,
                self._nb,
                self._store0,
                self._store1,
                self._ist,
                self._fst,
                self._oring,
                self._otruth,
                dec,
            )
            errors += err
            counted += cnt
            if self.record:
                self.decisions.append(dec[:n_emit].copy())
        return errors, counted


class ReferenceSequenceEngine:
    """Pure-python engine built on the reference receiver; used for
    cross-validation and available as a no-compilation fallback."""

    def __init__(self, metric, window, assumed_nb=None, exclude_before=0,
                 record=False, capacity=ONGOING_CAPACITY):
        self.rx = SequenceReceiver(metric, window, assumed_nb, capacity=capacity)
        self.exclude_before = int(exclude_before)
        self.record = record
        self.decisions = [] if record else None
        self._pending_truth = []

    def run_block(self, counts, truth, n_r=0.0, n_b=0.0):
        errors = 0
        counted = 0
        out = []
        self._pending_truth.extend(np.asarray(truth, dtype=np.int64).tolist())
        pending = self._pending_truth
        consumed = 0
        for c in np.asarray(counts, dtype=np.int64):
            for slot, bit in self.rx.push(c):
                if slot >= self.exclude_before:
                    counted += 1
                    if bit != pending[consumed]:
                        errors += 1
                consumed += 1
                out.append(bit)
        del pending[:consumed]
        if self.record and out:
            self.decisions.append(np.asarray(out, dtype=np.int64))
        return errors, counted


class DfbEngine:
    """Compiled feedback-receiver engine."""

    def __init__(self, kind, window, assumed_nb=None, exclude_before=0,
                 record=False):
        if kind == "glrt":
            self._space_size = window
            self._kind = 0
            self._nb = 0.0
        elif kind == "gmlsd":
            if assumed_nb is None or assumed_nb <= 0:
                raise ValueError("known-background kind needs assumed_nb > 0")
            self._space_size = 0
            self._kind = 1
            self._nb = float(assumed_nb)
        else:
            raise ValueError(f"unknown receiver kind {kind!r}")
        self._mark_size = window
        self.warmup_slots = 2 * window
        self.exclude_before = int(exclude_before)
        self.record = record
        self.decisions = [] if record else None
        self._warm_counts = []
        self._warm_truth = []
        self._ist = None
        self._store0 = np.zeros(0, dtype=np.int64)
        self._store1 = np.zeros(0, dtype=np.int64)

    def _bootstrap(self):
        store, provisional = bootstrap_warmup(
            self._warm_counts, self._space_size, self._mark_size
        )
        self._store0 = store.buf0
        self._store1 = store.buf1
        ist = np.zeros(6, dtype=np.int64)
        ist[kernels.D_SUM0] = store.sum0
        ist[kernels.D_SUM1] = store.sum1
        ist[kernels.D_EMIT] = self.warmup_slots
        ist[kernels.D_EXCL] = self.exclude_before
        self._ist = ist
        errors = 0
        counted = 0
        for slot, bit in enumerate(provisional):
            if slot >= self.exclude_before:
                counted += 1
                if bit != self._warm_truth[slot]:
                    errors += 1
        if self.record:
            self.decisions.append(np.asarray(provisional, dtype=np.int64))
        self._warm_counts = []
        self._warm_truth = []
        return errors, counted

    def run_block(self, counts, truth, n_r=0.0, n_b=0.0):
        counts = np.ascontiguousarray(counts, dtype=np.int64)
        truth = np.ascontiguousarray(truth, dtype=np.int64)
        errors = 0
        counted = 0
        start = 0
        if self._ist is None:
            need = self.warmup_slots - len(self._warm_counts)
            take = min(need, counts.size)
            self._warm_counts.extend(counts[:take].tolist())
            self._warm_truth.extend(truth[:take].tolist())
            start = take
            if len(self._warm_counts) == self.warmup_slots:
                errors, counted = self._bootstrap()
            else:
                return errors, counted
        if start < counts.size:
            dec = np.empty(counts.size - start, dtype=np.int64)
            _, err, cnt = kernels.dfb_kernel(
                counts[start:],
                truth[start:],
                self._kind,
                self._nb,
                self._store0,
                self._store1,
                self._ist,
                dec,
            )
            errors += err
            counted += cnt
            if self.record:
                self.decisions.append(dec.copy())
        return errors, counted


class ReferenceDfbEngine:
    """Pure-python feedback engine wrapping :class:`DfbReceiver`."""

    def __init__(self, kind, window, assumed_nb=None, exclude_before=0,
                 record=False):
        self.rx = DfbReceiver(kind, window, assumed_nb)
        self.exclude_before = int(exclude_before)
        self.record = record
        self.decisions = [] if record else None
        self._pending_truth = []

    def run_block(self, counts, truth, n_r=0.0, n_b=0.0):
        errors = 0
        counted = 0
        out = []
        self._pending_truth.extend(np.asarray(truth, dtype=np.int64).tolist())
        pending = self._pending_truth
        consumed = 0
        for c in np.asarray(counts, dtype=np.int64):
            for slot, bit in self.rx.push(c):
                if slot >= self.exclude_before:
                    counted += 1
                    if bit != pending[consumed]:
                        errors += 1
                consumed += 1
                out.append(bit)
        del pending[:consumed]
        if self.record and out:
            self.decisions.append(np.asarray(out, dtype=np.int64))
        return errors, counted


class IdealEngine:
    """Genie threshold detector; knows the per-block truth unless overridden."""

    def __init__(self, exclude_before=0, assumed_nr=None, assumed_nb=None,
                 record=False):
        self.exclude_before = int(exclude_before)
        self.assumed_nr = assumed_nr
        self.assumed_nb = assumed_nb
        self.record = record
        self.decisions = [] if record else None
        self._slots_seen = 0

    def run_block(self, counts, truth, n_r=0.0, n_b=0.0):
        counts = np.asarray(counts)
        n_r_used = self.assumed_nr if self.assumed_nr is not None else n_r
        n_b_used = self.assumed_nb if self.assumed_nb is not None else n_b
        tau = ideal_threshold(n_r_used, n_b_used)
        bits = (counts > tau).astype(np.int64)
        skip = max(0, self.exclude_before - self._slots_seen)
        counted = max(0, counts.size - skip)
        errors = int(np.count_nonzero(bits[skip:] != np.asarray(truth)[skip:]))
        self._slots_seen += counts.size
        if self.record:
            self.decisions.append(bits)
        return errors, counted


class BlockMsdEngine:
    """Sorting block decoder applied window by window within each block."""

    def __init__(self, kind, window, n_s=None, assumed_nb=None, density=None,
                 exclude_before=0, record=False):
        if kind not in ("mlsd", "gmlsd"):
            raise ValueError(f"unknown block decoder kind {kind!r}")
        if assumed_nb is None or assumed_nb <= 0:
            raise ValueError("block decoders need assumed_nb > 0")
        if kind == "mlsd" and (n_s is None or n_s <= 0):
            raise ValueError("the marginalizing decoder needs n_s > 0")
        self.kind = kind
        self.window = window
        self.n_s = n_s
        self.assumed_nb = assumed_nb
        self.density = density
        self.exclude_before = int(exclude_before)
        self.record = record
        self.decisions = [] if record else None
        self._slots_seen = 0
        self._metrics = {}

    def _metric(self, length):
        if length not in self._metrics:
            if self.kind == "gmlsd":
                self._metrics[length] = gmlsd_block_metric(length, self.assumed_nb)
            else:
                self._metrics[length] = mlsd_block_metric(
                    length, self.n_s, self.assumed_nb, self.density
                )
        return self._metrics[length]

    def run_block(self, counts, truth, n_r=0.0, n_b=0.0):
        counts = np.asarray(counts, dtype=np.int64)
        truth = np.asarray(truth, dtype=np.int64)
        bits = np.empty_like(counts)
        for lo in range(0, counts.size, self.window):
            seg = counts[lo:lo + self.window]
            bits[lo:lo + seg.size] = msd_block_decode(seg, self._metric(seg.size))
        skip = max(0, self.exclude_before - self._slots_seen)
        counted = max(0, counts.size - skip)
        errors = int(np.count_nonzero(bits[skip:] != truth[skip:]))
        self._slots_seen += counts.size
        if self.record:
            self.decisions.append(bits)
        return errors, counted


def make_engine(config, n_s, exclude_before=0, density=None, fast=True,
                record=False):
    """Build the simulation engine for one receiver configuration."""
    kind = config.kind
    if kind == "ideal":
        # Override hooks pin the threshold parameters; with fading inactive
        # (unit channel) assumed_ns doubles as the fixed effective count.
        return IdealEngine(
            exclude_before,
            assumed_nr=config.assumed_ns,
            assumed_nb=config.assumed_nb,
            record=record,
        )
    if kind == "mlsd" or (kind == "gmlsd_seq" and config.mode == "block"):
        return BlockMsdEngine(
            "mlsd" if kind == "mlsd" else "gmlsd",
            config.window_l,
            n_s=config.assumed_ns if config.assumed_ns is not None else n_s,
            assumed_nb=config.assumed_nb,
            density=density,
            exclude_before=exclude_before,
            record=record,
        )
    if kind == "glrt_seq":
        cls = SequenceEngine if fast else ReferenceSequenceEngine
        return cls("glrt", config.window_l, exclude_before=exclude_before,
                   record=record)
    if kind == "gmlsd_seq":
        cls = SequenceEngine if fast else ReferenceSequenceEngine
        return cls("gmlsd", config.window_l, assumed_nb=config.assumed_nb,
                   exclude_before=exclude_before, record=record)
    if kind == "glrt_dfb":
        cls = DfbEngine if fast else ReferenceDfbEngine
        return cls("glrt", config.window_l, exclude_before=exclude_before,
                   record=record)
    if kind == "gmlsd_dfb":
        cls = DfbEngine if fast else ReferenceDfbEngine
        return cls("gmlsd", config.window_l, assumed_nb=config.assumed_nb,
                   exclude_before=exclude_before, record=record)
    raise ValueError(f"unknown receiver kind {kind!r}")
