"""End-to-end detector: differencing and background branches, fusion, filter."""

from __future__ import annotations

from dataclasses import dataclass, field

from .amfd import AmfdParams, amfd_maps
from .blobs import Detection, Source, blobs_to_detections, connected_components, gate_blobs
from .frameio import Sequence
from .fusion import fuse
from .lrmc import LrmcParams, lrmc_maps
from .pipeline_filter import PfParams, Tracklet, run_pipeline_filter


@dataclass(frozen=True)
class GateParams:
    area_min: float = 5
    area_max: float = 80
    ar_min: float = 1.0
    ar_max: float = 6.0
    connectivity: int = 8


@dataclass(frozen=True)
class MmbConfig:
    amfd: AmfdParams = field(default_factory=AmfdParams)
    lrmc: LrmcParams = field(default_factory=LrmcParams)
    gate: GateParams = field(default_factory=GateParams)
    pf: PfParams = field(default_factory=PfParams)
    roi_gating: bool = False
    merge_iou: float = 0.3
    merge_measure: str = "iomin"
    use_amfd: bool = True
    use_lrmc: bool = True
    use_pf: bool = True

    def __post_init__(self):
        if not (self.use_amfd or self.use_lrmc):
            raise ValueError("at least one detection branch must be enabled")


@dataclass
class MmbResult:
    detections: list[list[Detection]]
    tracklets: list[Tracklet]

    def flat(self) -> list[Detection]:
        return [d for frame in self.detections for d in frame]


def _branch_detections(maps, gate: GateParams, source: Source) -> list[list[Detection]]:
    out = []
    for t, (mask, response) in enumerate(maps):
        blobs = gate_blobs(
            connected_components(mask, gate.connectivity),
            gate.area_min, gate.area_max, gate.ar_min, gate.ar_max,
        )
        out.append(blobs_to_detections(blobs, t, response, source))
    return out


def candidate_detections(seq: Sequence, cfg: MmbConfig = MmbConfig(), maps_out: dict | None = None) -> list[list[Detection]]:
    """Fused per-frame candidates before trajectory filtering.

    If ``maps_out`` is a dict, the per-frame ``(mask, response)`` lists of the
    enabled branches are stored in it under ``"amfd"`` and ``"lrmc"``.
    """
    M = len(seq)
    empty = [[] for _ in range(M)]
    amfd = lrmc = empty
    if cfg.use_amfd:
        maps = amfd_maps(seq, cfg.amfd)
        amfd = _branch_detections(maps, cfg.gate, Source.AMFD)
        if maps_out is not None:
            maps_out["amfd"] = maps
    if cfg.use_lrmc:
        maps = lrmc_maps(seq, cfg.lrmc)
        lrmc = _branch_detections(maps, cfg.gate, Source.LRMC)
        if maps_out is not None:
            maps_out["lrmc"] = maps
    if not (cfg.use_amfd and cfg.use_lrmc):
        return amfd if cfg.use_amfd else lrmc
    return [fuse(a, b, cfg.roi_gating, cfg.merge_iou, cfg.merge_measure) for a, b in zip(amfd, lrmc)]


def run_mmb(seq: Sequence, cfg: MmbConfig = MmbConfig(), maps_out: dict | None = None) -> MmbResult:
    if len(seq) < 3:
        raise ValueError(f"need at least 3 frames, got {len(seq)}")
    candidates = candidate_detections(seq, cfg, maps_out)
    if not cfg.use_pf:
        return MmbResult(candidates, [])
    dets, tracklets = run_pipeline_filter(candidates, cfg.pf)
    return MmbResult(dets, tracklets)
