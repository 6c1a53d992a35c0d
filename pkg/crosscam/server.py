"""Centralized edge server.

The server consumes camera messages in strict frame order (within a frame:
each cluster's supreme first, then the other members by camera id),
keeps the latest detections of every camera, fuses them per cluster and
scores the people count against ground truth. Per-camera detection
synthesis and filtering run beforehand, possibly in parallel; the event
loop itself is sequential, so reports do not depend on scheduling.
"""

from dataclasses import asdict, dataclass, field
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from .detsim import (
    DetectionLog,
    SceneSpec,
    WorldScene,
    generate_scene,
    invert_detections,
    load_log,
    render_ground_truth,
    synthesize_detections,
    visibility_sets,
)
from .exceptions import DegeneratePointError, EmptyInputError, ScenarioError, SchemaError
from .frame_filter import FilterParams, FilterResult, Tracker, filter_stream
from .fusion import (
    FusedBox,
    FusionParams,
    PERSON_CLASS,
    count_people,
    fuse,
    match_boxes,
    nms,
)
from .geometry import BBox, ConvexPolygon, Homography, apply_homography, iou_matrix, transform_box
from .logging_config import get_logger
from .performance import ordered_map
from .topology import (
    VALIDATION_ACCURACY,
    CameraConfig,
    Cluster,
    OverlapMatrix,
    TopologyParams,
    accretion_sequence,
    cam_to_supreme,
    fov_footprint,
    resolve_clusters,
)
from .trust import TrustLedger, TrustParams, gate_by_trust, trust_label
from .utils import camera_sort_key, sorted_camera_ids

logger = get_logger(__name__)

FRAME_UPLOAD = "FrameUpload"
STATE_SHARE = "StateShare"
MESSAGE_KINDS = (FRAME_UPLOAD, STATE_SHARE)

ISOLATED = "isolated"
COLLABORATIVE = "collaborative"
KNOWLEDGE_SHARING = "knowledge-sharing"
RUN_MODES = (ISOLATED, COLLABORATIVE, KNOWLEDGE_SHARING)


@dataclass(frozen=True)
class Message:
    """One camera-to-server message."""

    kind: str
    camera_id: str
    frame_idx: int
    boxes: Tuple[BBox, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))
        if self.kind not in MESSAGE_KINDS:
            raise ScenarioError(f"unknown message kind '{self.kind}'")
        for box in self.boxes:
            if box.camera_id != self.camera_id or box.frame_idx != self.frame_idx:
                raise SchemaError(
                    self.frame_idx,
                    f"{self.kind} from '{self.camera_id}' carries a box of "
                    f"camera '{box.camera_id}' frame {box.frame_idx}",
                )

    def sort_key(self) -> Tuple[int, Tuple, str]:
        return (self.frame_idx, camera_sort_key(self.camera_id), self.kind)


@dataclass(frozen=True)
class RunMode:
    kind: str
    subset: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if self.kind not in RUN_MODES:
            raise ScenarioError(f"unknown run mode '{self.kind}', expected one of {RUN_MODES}")
        if self.kind == KNOWLEDGE_SHARING:
            if not self.subset:
                raise ScenarioError("knowledge-sharing needs a non-empty camera subset")
            object.__setattr__(self, "subset", tuple(sorted_camera_ids(self.subset)))
        elif self.subset is not None:
            raise ScenarioError(f"mode '{self.kind}' takes no camera subset")

    @classmethod
    def isolated(cls) -> "RunMode":
        return cls(ISOLATED)

    @classmethod
    def collaborative(cls) -> "RunMode":
        return cls(COLLABORATIVE)

    @classmethod
    def knowledge_sharing(cls, subset: Sequence[str]) -> "RunMode":
        return cls(KNOWLEDGE_SHARING, tuple(subset))

    @property
    def label(self) -> str:
        """File-name friendly label, e.g. ``knowledge-sharing_3-4``."""
        if self.subset:
            return f"{self.kind}_{'-'.join(self.subset)}"
        return self.kind


@dataclass(frozen=True)
class ServerParams:
    filter: FilterParams = field(default_factory=FilterParams)
    fusion: FusionParams = field(default_factory=FusionParams)
    topology: TopologyParams = field(default_factory=TopologyParams)
    trust: TrustParams = field(default_factory=TrustParams)

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass
class RunReport:
    """Outcome of one run: bandwidth proxy, counts and trust."""

    mode: str
    subset: Optional[List[str]]
    seed: int
    frames_total: int
    per_camera_fraction: Dict[str, float]
    frames_transmitted: Dict[str, int]
    mean_fraction: float
    transmission_share: Dict[str, float]
    per_frame_counts: List[Tuple[int, int, int]]
    accuracy: float
    trust_snapshot: Dict[str, float] = field(default_factory=dict)
    trust_events: Dict[str, int] = field(default_factory=dict)
    clusters: List[Dict] = field(default_factory=list)
    params: Dict = field(default_factory=dict)
    trace: List[Message] = field(default_factory=list, repr=False, compare=False)

    def to_dict(self) -> Dict:
        return {
            "mode": self.mode,
            "subset": self.subset,
            "seed": self.seed,
            "frames_total": self.frames_total,
            "accuracy": self.accuracy,
            "mean_fraction": self.mean_fraction,
            "per_camera_fraction": self.per_camera_fraction,
            "frames_transmitted": self.frames_transmitted,
            "transmission_share": self.transmission_share,
            "per_frame_counts": [list(row) for row in self.per_frame_counts],
            "trust_snapshot": self.trust_snapshot,
            "trust_labels": {c: trust_label(s)[1] for c, s in self.trust_snapshot.items()},
            "trust_events": self.trust_events,
            "clusters": self.clusters,
            "params": self.params,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "RunReport":
        return cls(
            mode=data["mode"],
            subset=data.get("subset"),
            seed=data["seed"],
            frames_total=data["frames_total"],
            per_camera_fraction=dict(data["per_camera_fraction"]),
            frames_transmitted=dict(data["frames_transmitted"]),
            mean_fraction=data["mean_fraction"],
            transmission_share=dict(data.get("transmission_share", {})),
            per_frame_counts=[tuple(row) for row in data["per_frame_counts"]],
            accuracy=data["accuracy"],
            trust_snapshot=dict(data.get("trust_snapshot", {})),
            trust_events=dict(data.get("trust_events", {})),
            clusters=list(data.get("clusters", [])),
            params=dict(data.get("params", {})),
        )

    def accuracy_between(self, start_frame: int, end_frame: Optional[int] = None) -> float:
        """Counting accuracy restricted to frames in [start_frame, end_frame)."""
        rows = [
            (p, g)
            for f, p, g in self.per_frame_counts
            if f >= start_frame and (end_frame is None or f < end_frame)
        ]
        return compute_accuracy(rows)


@dataclass(frozen=True)
class Scenario:
    """Everything needed to run the simulator for any seed."""

    cameras: Tuple[CameraConfig, ...]
    params: ServerParams = field(default_factory=ServerParams)
    scene_spec: SceneSpec = field(default_factory=SceneSpec)
    n_frames: int = 100
    fps: float = 10.0
    seed: int = 0
    name: str = "scenario"
    scene: Optional[WorldScene] = None

    def __post_init__(self):
        object.__setattr__(self, "cameras", tuple(self.cameras))
        validate_cameras(self.cameras)

    def build_scene(self, seed: int) -> WorldScene:
        if self.scene is not None:
            return self.scene
        return generate_scene(self.scene_spec, self.n_frames, self.fps, seed)

    def camera_ids(self) -> List[str]:
        return sorted_camera_ids(c.camera_id for c in self.cameras)


@dataclass
class CameraStream:
    """What one camera observes and decides over a whole run."""

    camera: CameraConfig
    ground_truth: DetectionLog
    pre_nms: List[List[BBox]]
    post_nms: List[List[BBox]]
    filter_result: FilterResult
    visible: List[Set[str]]
    footprint: ConvexPolygon


@dataclass
class PreparedRun:
    """Seed-specific inputs shared by every mode of a run."""

    scene: WorldScene
    streams: Dict[str, CameraStream]
    clusters: List[Cluster]
    overlap: OverlapMatrix
    params: ServerParams
    seed: int
    ground_truth: List[int]


def validate_cameras(cameras: Sequence[CameraConfig]) -> None:
    if not cameras:
        raise ScenarioError("scenario needs at least one camera")
    seen: Set[str] = set()
    for cam in cameras:
        if cam.camera_id in seen:
            raise ScenarioError(f"duplicate camera_id '{cam.camera_id}'")
        seen.add(cam.camera_id)


def compute_accuracy(per_frame: Sequence[Tuple[int, int]]) -> float:
    """Mean over frames of max(0, 1 - |pred - gt| / max(gt, 1)).

    Raises:
        EmptyInputError: If there are no frames
    """
    if not per_frame:
        raise EmptyInputError("accuracy needs at least one frame")
    total = 0.0
    for predicted, truth in per_frame:
        total += max(0.0, 1.0 - abs(predicted - truth) / max(truth, 1))
    return total / len(per_frame)


def camera_detections(
    scene: WorldScene, cam: CameraConfig, gt: DetectionLog, seed: int
) -> DetectionLog:
    """Pre-NMS boxes a camera emits: ingested or synthesized, mirrored if adversarial."""
    if cam.detections_file is not None:
        raw = load_log(cam.detections_file, cam.camera_id)
        if raw.n_frames != scene.n_frames:
            raise ScenarioError(
                f"camera '{cam.camera_id}': ingested log has {raw.n_frames} frames, "
                f"scenario has {scene.n_frames}"
            )
    else:
        raw = synthesize_detections(gt, cam.noise_schedule, seed, cam.image_w, cam.image_h)
    if cam.adversarial:
        raw = invert_detections(raw, cam.image_w, cam.image_h)
    return raw


def build_camera_stream(
    scene: WorldScene, cam: CameraConfig, params: ServerParams, seed: int
) -> CameraStream:
    """Synthesize (or ingest) a camera's detections and run its frame filter."""
    gt = render_ground_truth(scene, cam)
    raw = camera_detections(scene, cam, gt, seed)
    post_nms = [nms(boxes, params.fusion.nms_iou) for boxes in raw.frames]
    result = filter_stream(DetectionLog(cam.camera_id, post_nms), params.filter)
    return CameraStream(
        camera=cam,
        ground_truth=gt,
        pre_nms=raw.frames,
        post_nms=post_nms,
        filter_result=result,
        visible=visibility_sets(scene, cam),
        footprint=fov_footprint(cam),
    )


def calibrate_accuracies(
    streams: Mapping[str, CameraStream], fusion_params: FusionParams
) -> Dict[str, float]:
    """Isolated counting accuracy of every camera against what it can see."""
    accuracies = {}
    for camera_id, stream in streams.items():
        held: List[BBox] = []
        rows = []
        for f, boxes in enumerate(stream.post_nms):
            if stream.filter_result.was_transmitted(f):
                held = boxes
            predicted = sum(
                1
                for b in held
                if b.class_id == PERSON_CLASS and b.confidence >= fusion_params.count_conf_threshold
            )
            rows.append((predicted, len(stream.visible[f])))
        accuracies[camera_id] = compute_accuracy(rows)
    return accuracies


def prepare_run(
    scene: WorldScene,
    cameras: Sequence[CameraConfig],
    params: ServerParams,
    seed: int,
    workers: int = 1,
) -> PreparedRun:
    """Build camera streams and resolve clusters for one seed."""
    validate_cameras(cameras)
    streams_list = ordered_map(
        lambda cam: build_camera_stream(scene, cam, params, seed),
        list(cameras),
        max_workers=workers,
    )
    streams = {s.camera.camera_id: s for s in streams_list}

    accuracies = None
    if params.topology.supreme_mode == VALIDATION_ACCURACY and params.topology.supreme is None:
        accuracies = calibrate_accuracies(streams, params.fusion)
        logger.debug(f"calibration accuracies: {accuracies}")
    clusters, overlap = resolve_clusters(
        cameras,
        params.topology.overlap_threshold,
        params.topology.supreme_mode,
        beta=params.topology.beta,
        supreme_override=params.topology.supreme,
        accuracies=accuracies,
    )

    ground_truth = []
    for f in range(scene.n_frames):
        seen: Set[str] = set()
        for stream in streams.values():
            seen |= stream.visible[f]
        ground_truth.append(len(seen))
    return PreparedRun(scene, streams, clusters, overlap, params, seed, ground_truth)


@dataclass
class _ClusterState:
    cluster: Cluster
    members: List[str]
    homographies: Dict[str, Homography]
    tracker: Tracker
    fused: List[FusedBox] = field(default_factory=list)
    count: int = 0
    dirty: bool = True
    last_gated: FrozenSet[str] = frozenset()


class EdgeServer:
    """Frame-ordered event loop for one run mode."""

    def __init__(self, prepared: PreparedRun, mode: RunMode, collect_trace: bool = False):
        self.prepared = prepared
        self.mode = mode
        self.params = prepared.params
        self.streams = prepared.streams
        self.collect_trace = collect_trace
        self.trace: List[Message] = []
        self.ledger = TrustLedger.from_params(self.params.trust)
        self.trust_events: Dict[str, int] = {}

        participants = set(self.streams)
        if mode.kind == KNOWLEDGE_SHARING:
            unknown = [c for c in mode.subset if c not in self.streams]
            if unknown:
                raise ScenarioError(f"subset names unknown camera '{unknown[0]}'")
            participants = set(mode.subset)
        self.participants = sorted_camera_ids(participants)

        self.states: List[_ClusterState] = []
        cameras = [s.camera for s in self.streams.values()]
        for cluster in prepared.clusters:
            touched = [c for c in cluster.ordered_members() if c in participants]
            if not touched:
                continue
            if cluster.supreme not in participants:
                raise ScenarioError(
                    f"subset {list(mode.subset)} must include supreme '{cluster.supreme}' "
                    f"of cluster {cluster.ordered_members()}"
                )
            members = [cluster.supreme] + [c for c in touched if c != cluster.supreme]
            homographies = cam_to_supreme(
                [c for c in cameras if c.camera_id in cluster.members], cluster.supreme
            )
            self.states.append(
                _ClusterState(cluster, members, homographies, Tracker(self.params.filter))
            )

        self.held: Dict[str, List[BBox]] = {c: [] for c in self.participants}
        self.held_supreme: Dict[str, List[BBox]] = {c: [] for c in self.participants}
        self.uploads: Dict[str, int] = {c: 0 for c in self.participants}

    def run(self) -> RunReport:
        n_frames = self.prepared.scene.n_frames
        counts: List[Tuple[int, int, int]] = []
        for f in range(n_frames):
            predicted = 0
            for state in self.states:
                fresh = self._receive(state, f)
                predicted += self._count(state, f, fresh)
            counts.append((f, predicted, self.prepared.ground_truth[f]))
        return self._report(counts, n_frames)

    def _emit(self, kind: str, camera_id: str, frame_idx: int, boxes: Sequence[BBox]) -> None:
        if self.collect_trace:
            self.trace.append(Message(kind, camera_id, frame_idx, tuple(boxes)))

    def _to_supreme(
        self, state: _ClusterState, camera_id: str, boxes: Sequence[BBox]
    ) -> List[BBox]:
        if camera_id == state.cluster.supreme:
            return list(boxes)
        h = state.homographies[camera_id]
        return [transform_box(h, b) for b in boxes]

    def _trusted(self, camera_id: str) -> bool:
        if not self.params.trust.enabled:
            return True
        return gate_by_trust(self.ledger, camera_id, self.params.trust.min_trust)

    def _upload(
        self, state: _ClusterState, camera_id: str, f: int, fresh: Dict[str, List[BBox]]
    ) -> None:
        boxes = self.streams[camera_id].post_nms[f]
        self.held[camera_id] = boxes
        self.held_supreme[camera_id] = self._to_supreme(state, camera_id, boxes)
        self.uploads[camera_id] += 1
        state.dirty = True
        fresh[camera_id] = boxes
        self._emit(FRAME_UPLOAD, camera_id, f, boxes)

    def _receive(self, state: _ClusterState, f: int) -> Dict[str, List[BBox]]:
        """Process this frame's messages; returns the boxes each camera delivered."""
        fresh: Dict[str, List[BBox]] = {}
        # isolated: every camera uploads whatever its own filter flags
        if self.mode.kind == ISOLATED:
            for camera_id in state.members:
                if self.streams[camera_id].filter_result.was_transmitted(f):
                    self._upload(state, camera_id, f, fresh)
            return fresh

        self._collaborative_uploads(state, f, fresh)
        # knowledge-sharing counts from pre-NMS boxes shared every frame, not from uploads
        if self.mode.kind == KNOWLEDGE_SHARING:
            fresh = {}
            for camera_id in state.members:
                shared = self.streams[camera_id].pre_nms[f]
                fresh[camera_id] = shared
                self._emit(STATE_SHARE, camera_id, f, shared)
        return fresh

    def _collaborative_uploads(
        self, state: _ClusterState, f: int, fresh: Dict[str, List[BBox]]
    ) -> None:
        gate = self.params.fusion.match_gate_iou
        supreme = state.cluster.supreme
        supreme_stream = self.streams[supreme]
        # supreme first so its boxes seed the global tracks for this frame
        if supreme_stream.filter_result.was_transmitted(f):
            self._upload(state, supreme, f, fresh)
            if self._trusted(supreme):
                state.tracker.step(self.held_supreme[supreme], f)

        for camera_id in state.members[1:]:
            result = self.streams[camera_id].filter_result
            if not result.was_transmitted(f):
                continue
            boxes = self.streams[camera_id].post_nms[f]
            candidates = self._to_supreme(state, camera_id, [boxes[k] for k in result.new_boxes[f]])
            # upload only if some novel box is unknown to the global tracks
            live = state.tracker.live_boxes(f)
            if live:
                novel = bool(np.any(iou_matrix(candidates, live).max(axis=1) < gate))
            else:
                novel = bool(candidates)
            if not novel:
                continue
            self._upload(state, camera_id, f, fresh)
            if self._trusted(camera_id):
                state.tracker.step(self.held_supreme[camera_id], f)

        # the server keeps tracking whatever it currently holds
        held = [
            b
            for camera_id in state.members
            if self._trusted(camera_id)
            for b in self.held_supreme[camera_id]
        ]
        state.tracker.touch(held, f)

    def _count(self, state: _ClusterState, f: int, fresh: Dict[str, List[BBox]]) -> int:
        gated = frozenset(c for c in state.members if not self._trusted(c))
        sharing = self.mode.kind == KNOWLEDGE_SHARING
        # fuse again only when the inputs changed
        if sharing or state.dirty or gated != state.last_gated:
            if sharing:
                inputs = {c: fresh[c] for c in state.members if c not in gated}
            else:
                inputs = {c: self.held[c] for c in state.members if c not in gated}
            state.fused = fuse(
                inputs, state.cluster.supreme, state.homographies, self.params.fusion
            )
            state.count = count_people(state.fused, self.params.fusion)
            state.dirty = False
            state.last_gated = gated
        if self.params.trust.enabled:
            self._feedback(state, f, fresh, gated)
        return state.count

    def _feedback(
        self, state: _ClusterState, f: int, fresh: Dict[str, List[BBox]], gated: FrozenSet[str]
    ) -> None:
        """Score every camera that delivered boxes this frame against the fused consensus."""
        trust = self.params.trust
        fusion_params = self.params.fusion
        for camera_id in state.members:
            if camera_id not in fresh:
                continue
            witnesses = [
                self.streams[c].footprint
                for c in state.members
                if c != camera_id and c not in gated
            ]
            if not witnesses:
                continue
            camera = self.streams[camera_id].camera
            to_world = camera.image_to_world
            confirmable = []
            for box in nms(fresh[camera_id], fusion_params.nms_iou):
                try:
                    ground = apply_homography(to_world, box.foot)
                except DegeneratePointError:
                    continue
                if any(fp.contains(ground) for fp in witnesses):
                    confirmable.append(box)
            if not confirmable:
                continue
            consensus = [fb.box for fb in state.fused if fb.source_cameras - {camera_id}]
            candidates = self._to_supreme(state, camera_id, confirmable)
            matched = match_boxes(consensus, candidates, fusion_params)
            score = self.ledger.update(camera_id, len(matched) / len(confirmable))
            if score < trust.min_trust and camera_id not in self.trust_events:
                self.trust_events[camera_id] = f
                logger.info(
                    f"camera '{camera_id}' fell below trust {trust.min_trust} at frame {f} "
                    f"(score {score:.3f})"
                )

    def _report(self, counts: List[Tuple[int, int, int]], n_frames: int) -> RunReport:
        fractions = {c: self.uploads[c] / n_frames for c in self.participants}
        total_uploads = sum(self.uploads.values())
        share = {
            c: (self.uploads[c] / total_uploads if total_uploads else 0.0)
            for c in self.participants
        }
        snapshot = {}
        if self.params.trust.enabled:
            snapshot = {c: self.ledger.score(c) for c in self.participants}
        self.trace.sort(key=Message.sort_key)
        return RunReport(
            mode=self.mode.kind,
            subset=list(self.mode.subset) if self.mode.subset else None,
            seed=self.prepared.seed,
            frames_total=n_frames,
            per_camera_fraction=fractions,
            frames_transmitted=dict(self.uploads),
            mean_fraction=float(np.mean(list(fractions.values()))) if fractions else 0.0,
            transmission_share=share,
            per_frame_counts=counts,
            accuracy=compute_accuracy([(p, g) for _, p, g in counts]),
            trust_snapshot=snapshot,
            trust_events=dict(self.trust_events),
            clusters=[
                {"members": s.cluster.ordered_members(), "supreme": s.cluster.supreme}
                for s in self.states
            ],
            params=self.params.to_dict(),
            trace=self.trace,
        )


def simulate(
    prepared: PreparedRun, mode: RunMode, collect_trace: bool = False
) -> RunReport:
    """Run one mode over prepared camera streams."""
    report = EdgeServer(prepared, mode, collect_trace).run()
    logger.debug(
        f"{mode.label} seed {prepared.seed}: accuracy {report.accuracy:.4f}, "
        f"mean fraction {report.mean_fraction:.4f}"
    )
    return report


def run_isolated(
    scene: WorldScene,
    cameras: Sequence[CameraConfig],
    params: Optional[ServerParams] = None,
    seed: int = 0,
    collect_trace: bool = False,
) -> RunReport:
    """Every camera filters on its own; the server counts from the latest uploads."""
    prepared = prepare_run(scene, cameras, params or ServerParams(), seed)
    return simulate(prepared, RunMode.isolated(), collect_trace)


def run_collaborative(
    scene: WorldScene,
    cameras: Sequence[CameraConfig],
    params: Optional[ServerParams] = None,
    seed: int = 0,
    collect_trace: bool = False,
) -> RunReport:
    """Collaborators upload only frames holding a box the server does not already track."""
    prepared = prepare_run(scene, cameras, params or ServerParams(), seed)
    return simulate(prepared, RunMode.collaborative(), collect_trace)


def run_knowledge_sharing(
    scene: WorldScene,
    cameras: Sequence[CameraConfig],
    subset: Sequence[str],
    params: Optional[ServerParams] = None,
    seed: int = 0,
    collect_trace: bool = False,
) -> RunReport:
    """Collaborative uploads plus per-frame pre-NMS state shares from the subset."""
    prepared = prepare_run(scene, cameras, params or ServerParams(), seed)
    return simulate(prepared, RunMode.knowledge_sharing(subset), collect_trace)


def run_scenario(
    scenario: Scenario,
    mode: RunMode,
    seed: Optional[int] = None,
    workers: int = 1,
    collect_trace: bool = False,
) -> RunReport:
    seed = scenario.seed if seed is None else seed
    scene = scenario.build_scene(seed)
    prepared = prepare_run(scene, scenario.cameras, scenario.params, seed, workers)
    return simulate(prepared, mode, collect_trace)


@dataclass(frozen=True)
class SweepRow:
    subset_size: int
    mean_accuracy: float
    mean_fraction: float
    stddev: float


@dataclass(frozen=True)
class CompareRow:
    mode: str
    mean_accuracy: float
    mean_fraction: float
    stddev: float


def _seeds(scenario: Scenario, n_seeds: int) -> List[int]:
    if n_seeds < 1:
        raise ScenarioError(f"need at least one seed, got {n_seeds}")
    return [scenario.seed + k for k in range(n_seeds)]


def _stddev(values: Sequence[float]) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


def sweep_knowledge_sharing(
    scenario: Scenario,
    n_seeds: int = 20,
    workers: int = 1,
    show_progress: bool = False,
) -> List[SweepRow]:
    """Knowledge-sharing over nested subsets grown in accretion order.

    Raises:
        ScenarioError: If the scenario has fewer than two cameras
    """
    if len(scenario.cameras) < 2:
        raise ScenarioError("sweep requires ≥ 2 cameras")

    def one_seed(seed: int) -> List[Tuple[int, float, float]]:
        prepared = prepare_run(scenario.build_scene(seed), scenario.cameras, scenario.params, seed)
        sequence = accretion_sequence(prepared.clusters, prepared.overlap)
        rows = []
        for size in range(len(prepared.clusters), len(sequence) + 1):
            report = simulate(prepared, RunMode.knowledge_sharing(sequence[:size]))
            rows.append((size, report.accuracy, report.mean_fraction))
        return rows

    per_seed = ordered_map(
        one_seed,
        _seeds(scenario, n_seeds),
        max_workers=workers,
        description="Sweeping seeds",
        show_progress=show_progress,
    )
    by_size: Dict[int, List[Tuple[float, float]]] = {}
    for rows in per_seed:
        for size, accuracy, fraction in rows:
            by_size.setdefault(size, []).append((accuracy, fraction))
    return [
        SweepRow(
            subset_size=size,
            mean_accuracy=float(np.mean([a for a, _ in values])),
            mean_fraction=float(np.mean([fr for _, fr in values])),
            stddev=_stddev([a for a, _ in values]),
        )
        for size, values in sorted(by_size.items())
    ]


def compare_modes(
    scenario: Scenario,
    n_seeds: int = 20,
    subset: Optional[Sequence[str]] = None,
    workers: int = 1,
    show_progress: bool = False,
) -> List[CompareRow]:
    """Isolated vs collaborative vs knowledge-sharing averaged over seeds."""
    subset = list(subset) if subset else scenario.camera_ids()
    modes = [RunMode.isolated(), RunMode.collaborative(), RunMode.knowledge_sharing(subset)]

    def one_seed(seed: int) -> List[RunReport]:
        prepared = prepare_run(scenario.build_scene(seed), scenario.cameras, scenario.params, seed)
        return [simulate(prepared, mode) for mode in modes]

    per_seed = ordered_map(
        one_seed,
        _seeds(scenario, n_seeds),
        max_workers=workers,
        description="Comparing modes",
        show_progress=show_progress,
    )
    rows = []
    for k, mode in enumerate(modes):
        reports = [reports[k] for reports in per_seed]
        accuracies = [r.accuracy for r in reports]
        rows.append(
            CompareRow(
                mode=mode.label,
                mean_accuracy=float(np.mean(accuracies)),
                mean_fraction=float(np.mean([r.mean_fraction for r in reports])),
                stddev=_stddev(accuracies),
            )
        )
    return rows
