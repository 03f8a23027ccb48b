"""Receiver implementations: genie threshold, marginalized and
known-background block decoders, two-survivor sequence detectors, and
decision-feedback detectors."""

from .dfb import DfbReceiver
from .engines import (
    BlockMsdEngine,
    DfbEngine,
    IdealEngine,
    ReceiverConfig,
    ReferenceDfbEngine,
    ReferenceSequenceEngine,
    SequenceEngine,
    make_engine,
)
from .ideal import ideal_decide, ideal_threshold
from .metrics import (
    WindowStats,
    asymptotic_decide,
    glrt_dfb_psi,
    glrt_metric,
    glrt_nr_nb_estimates,
    gmlsd_dfb_psi0,
    gmlsd_log_metric,
    mlsd_log_metric,
)
from .msd import gmlsd_block_metric, mlsd_block_metric, msd_block_decode
from .trellis import (
    ONGOING_CAPACITY,
    SelectiveStore,
    SequenceReceiver,
    bootstrap_warmup,
)

__all__ = [
    "BlockMsdEngine",
    "DfbEngine",
    "DfbReceiver",
    "IdealEngine",
    "ONGOING_CAPACITY",
    "ReceiverConfig",
    "ReferenceDfbEngine",
    "ReferenceSequenceEngine",
    "SelectiveStore",
    "SequenceEngine",
    "SequenceReceiver",
    "WindowStats",
    "asymptotic_decide",
    "bootstrap_warmup",
    "glrt_dfb_psi",
    "glrt_metric",
    "glrt_nr_nb_estimates",
    "gmlsd_block_metric",
    "gmlsd_dfb_psi0",
    "gmlsd_log_metric",
    "ideal_decide",
    "ideal_threshold",
    "make_engine",
    "mlsd_block_metric",
    "mlsd_log_metric",
    "msd_block_decode",
]
