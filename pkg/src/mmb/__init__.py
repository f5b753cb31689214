"""Moving-object detection for small targets in satellite-style video.

Two detectors run side by side: accumulative three-frame differencing and a
low-rank background model per temporal sub-group.  Their blobs are gated,
fused and passed through a trajectory filter that confirms movers and drops
transient false alarms.
"""

from .amfd import AmfdParams, amfd_maps, amfd_pass
from .blobs import Blob, Detection, Source, connected_components, gate_blobs
from .detect import GateParams, MmbConfig, MmbResult, candidate_detections, run_mmb
from .frameio import FormatError, Frame, GroundTruthRecord, Sequence, load_annotations, load_sequence
from .fusion import fuse
from .lrmc import LrmcParams, lrmc_maps, lrmc_pass
from .metrics import clear_mot, evaluate_detections, mean_average_precision, pr_curve_and_ap, sot_rates
from .pipeline_filter import PfParams, Tracklet, run_pipeline_filter
from .synth import Occluder, SynthConfig, generate

__version__ = "0.1.0"

__all__ = [
    "AmfdParams", "amfd_maps", "amfd_pass",
    "Blob", "Detection", "Source", "connected_components", "gate_blobs",
    "GateParams", "MmbConfig", "MmbResult", "candidate_detections", "run_mmb",
    "FormatError", "Frame", "GroundTruthRecord", "Sequence", "load_annotations", "load_sequence",
    "fuse",
    "LrmcParams", "lrmc_maps", "lrmc_pass",
    "clear_mot", "evaluate_detections", "mean_average_precision", "pr_curve_and_ap", "sot_rates",
    "PfParams", "Tracklet", "run_pipeline_filter",
    "Occluder", "SynthConfig", "generate",
]
