"""Ground-truth scenes, synthetic detector output and detection-log files.

Detections stand in for a DNN detector: ground-truth boxes are projected
from a simulated ground plane and then degraded by a seeded noise model.
Each (camera, frame) pair draws from its own counter-based RNG stream so
logs do not depend on the order in which cameras are processed.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .exceptions import GeometryError, ParseError, ScenarioError, SchemaError
from .geometry import BBox, Point2, apply_homography, local_scale
from .logging_config import get_logger
from .utils import atomic_write_text, read_utf8_text, stable_hash

if TYPE_CHECKING:
    from .topology import CameraConfig

logger = get_logger(__name__)

ASPECT_RATIO = 0.4
SCENE_STREAM = 0x5CE7E
MAX_PLACEMENT_ATTEMPTS = 2000
BLOCKED_REPLAN_FRAMES = 10


@dataclass(frozen=True)
class WorldObject:
    """A person on the ground plane (meters) present from enter_frame to exit_frame."""

    object_id: str
    trajectory: Dict[int, Point2]
    enter_frame: int
    exit_frame: int

    def __post_init__(self):
        if self.exit_frame < self.enter_frame:
            raise ScenarioError(
                f"Object {self.object_id}: exit_frame {self.exit_frame} "
                f"before enter_frame {self.enter_frame}"
            )
        missing = [
            f for f in range(self.enter_frame, self.exit_frame + 1) if f not in self.trajectory
        ]
        if missing:
            raise ScenarioError(
                f"Object {self.object_id}: trajectory missing frame {missing[0]}"
            )

    def present(self, frame_idx: int) -> bool:
        return self.enter_frame <= frame_idx <= self.exit_frame

    def position(self, frame_idx: int) -> Point2:
        return self.trajectory[frame_idx]


@dataclass(frozen=True)
class WorldScene:
    objects: Tuple[WorldObject, ...]
    n_frames: int
    fps: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        if self.n_frames <= 0:
            raise ScenarioError(f"n_frames must be positive, got {self.n_frames}")
        if self.fps <= 0:
            raise ScenarioError(f"fps must be positive, got {self.fps}")
        for obj in self.objects:
            if obj.enter_frame < 0 or obj.exit_frame >= self.n_frames:
                raise ScenarioError(
                    f"Object {obj.object_id} frames [{obj.enter_frame}, {obj.exit_frame}] "
                    f"outside [0, {self.n_frames})"
                )


@dataclass(frozen=True)
class NoiseModel:
    """Detector error model.

    Args:
        miss_prob: Probability that a ground-truth box is not detected
        false_pos_rate: Expected false boxes per frame (Poisson)
        center_jitter_std: Box centre noise per axis, pixels
        size_jitter_std: Width/height noise, pixels
        conf_mean: Mean confidence of true detections
        conf_std: Standard deviation of true-detection confidence
        dup_rate: Expected extra pre-NMS proposals per detected box (Poisson)
        dup_jitter: Proposal displacement as a fraction of box size
    """

    miss_prob: float = 0.0
    false_pos_rate: float = 0.0
    center_jitter_std: float = 0.0
    size_jitter_std: float = 0.0
    conf_mean: float = 1.0
    conf_std: float = 0.0
    dup_rate: float = 0.0
    dup_jitter: float = 0.05

    def __post_init__(self):
        checks = [
            (0.0 <= self.miss_prob < 1.0, "miss_prob must lie in [0, 1)"),
            (self.false_pos_rate >= 0.0, "false_pos_rate must be >= 0"),
            (self.center_jitter_std >= 0.0, "center_jitter_std must be >= 0"),
            (self.size_jitter_std >= 0.0, "size_jitter_std must be >= 0"),
            (0.0 < self.conf_mean <= 1.0, "conf_mean must lie in (0, 1]"),
            (self.conf_std >= 0.0, "conf_std must be >= 0"),
            (self.dup_rate >= 0.0, "dup_rate must be >= 0"),
            (self.dup_jitter >= 0.0, "dup_jitter must be >= 0"),
        ]
        for ok, message in checks:
            if not ok:
                raise ScenarioError(f"NoiseModel: {message}")

    @classmethod
    def perfect(cls) -> "NoiseModel":
        return cls()


@dataclass(frozen=True)
class DegradedWindow:
    """Frames [start_frame, end_frame] during which a harsher noise model applies."""

    start_frame: int
    end_frame: int
    noise: NoiseModel


@dataclass(frozen=True)
class NoiseSchedule:
    """Noise that varies over the run, e.g. poor lighting at certain times of day."""

    base: NoiseModel
    windows: Tuple[DegradedWindow, ...] = ()

    def model_at(self, frame_idx: int) -> NoiseModel:
        for window in self.windows:
            if window.start_frame <= frame_idx <= window.end_frame:
                return window.noise
        return self.base


@dataclass
class DetectionLog:
    """Per-frame box lists of one camera."""

    camera_id: str
    frames: List[List[BBox]] = field(default_factory=list)
    image_w: Optional[int] = None
    image_h: Optional[int] = None

    def __post_init__(self):
        for idx, boxes in enumerate(self.frames):
            for box in boxes:
                if box.camera_id != self.camera_id or box.frame_idx != idx:
                    raise SchemaError(
                        idx,
                        f"box labelled camera '{box.camera_id}' frame {box.frame_idx} "
                        f"in log of camera '{self.camera_id}'",
                    )

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DetectionLog):
            return NotImplemented
        return self.camera_id == other.camera_id and self.frames == other.frames


@dataclass(frozen=True)
class GroupSpec:
    """People standing evenly spaced on a circle, as in a conversation group."""

    center: Tuple[float, float]
    size: int
    radius: float = 0.8


@dataclass(frozen=True)
class StaticObject:
    """A scripted, motionless object."""

    object_id: str
    position: Tuple[float, float]
    enter_frame: int = 0
    exit_frame: Optional[int] = None


@dataclass(frozen=True)
class SceneSpec:
    """Recipe for a synthetic social-event scene."""

    n_objects: int = 0
    walk_bounds: Tuple[float, float, float, float] = (0.0, 0.0, 10.0, 8.0)
    groups: Tuple[GroupSpec, ...] = ()
    max_speed: float = 0.1
    min_separation: float = 0.8
    pause_frames: Tuple[int, int] = (20, 80)
    static_objects: Tuple[StaticObject, ...] = ()


def generate_scene(spec: SceneSpec, n_frames: int, fps: float, seed: int) -> WorldScene:
    """Generate a deterministic scene from a recipe.

    Grouped people start on their group circle, the rest at random positions
    at least min_separation apart. Everybody then follows random waypoints
    inside walk_bounds with pauses, never faster than max_speed meters/frame.
    """
    rng = np.random.default_rng(np.random.SeedSequence([_seed_word(seed), SCENE_STREAM]))
    x0, y0, x1, y1 = spec.walk_bounds

    start: List[Tuple[float, float]] = []
    for group in spec.groups:
        for k in range(group.size):
            angle = 2.0 * math.pi * k / group.size
            start.append(
                (
                    group.center[0] + group.radius * math.cos(angle),
                    group.center[1] + group.radius * math.sin(angle),
                )
            )
    if len(start) > spec.n_objects:
        raise ScenarioError(
            f"groups place {len(start)} people but n_objects is {spec.n_objects}"
        )
    while len(start) < spec.n_objects:
        for _ in range(MAX_PLACEMENT_ATTEMPTS):
            candidate = (rng.uniform(x0, x1), rng.uniform(y0, y1))
            if all(
                math.dist(candidate, other) >= spec.min_separation for other in start
            ):
                start.append(candidate)
                break
        else:
            raise ScenarioError(
                f"could not place {spec.n_objects} objects {spec.min_separation} m apart"
            )

    n = len(start)
    positions = np.zeros((n_frames, n, 2))
    if n:
        positions[0] = np.array(start)
        if spec.max_speed > 0:
            _walk(positions, spec, rng)
        else:
            positions[1:] = positions[0]

    objects: List[WorldObject] = []
    for i in range(n):
        trajectory = {
            f: Point2(float(positions[f, i, 0]), float(positions[f, i, 1]))
            for f in range(n_frames)
        }
        objects.append(WorldObject(str(i), trajectory, 0, n_frames - 1))

    for static in spec.static_objects:
        exit_frame = n_frames - 1 if static.exit_frame is None else static.exit_frame
        point = Point2(float(static.position[0]), float(static.position[1]))
        trajectory = {f: point for f in range(static.enter_frame, exit_frame + 1)}
        objects.append(WorldObject(static.object_id, trajectory, static.enter_frame, exit_frame))

    logger.debug(f"Generated scene: {len(objects)} objects, {n_frames} frames")
    return WorldScene(tuple(objects), n_frames, fps)


def _walk(positions: np.ndarray, spec: SceneSpec, rng: np.random.Generator) -> None:
    n_frames, n, _ = positions.shape
    x0, y0, x1, y1 = spec.walk_bounds
    lo, hi = spec.pause_frames

    def new_waypoint() -> np.ndarray:
        return np.array([rng.uniform(x0, x1), rng.uniform(y0, y1)])

    waypoints = [new_waypoint() for _ in range(n)]
    pauses = [int(rng.integers(lo, hi + 1)) for _ in range(n)]
    blocked = [0] * n
    current = positions[0].copy()

    for f in range(1, n_frames):
        for i in range(n):
            if pauses[i] > 0:
                pauses[i] -= 1
                continue
            delta = waypoints[i] - current[i]
            dist = float(np.hypot(delta[0], delta[1]))
            arrived = dist <= spec.max_speed
            if arrived:
                candidate = waypoints[i].copy()
            else:
                candidate = current[i] + delta / dist * spec.max_speed

            if _blocked(current, i, candidate, spec.min_separation):
                blocked[i] += 1
                if blocked[i] > BLOCKED_REPLAN_FRAMES:
                    waypoints[i] = new_waypoint()
                    blocked[i] = 0
                continue

            blocked[i] = 0
            current[i] = candidate
            if arrived:
                waypoints[i] = new_waypoint()
                pauses[i] = int(rng.integers(lo, hi + 1))
        positions[f] = current


def _blocked(current: np.ndarray, i: int, candidate: np.ndarray, min_sep: float) -> bool:
    # Moves that bring an object closer than min_sep to someone else are refused
    others = np.delete(current, i, axis=0)
    if others.size == 0:
        return False
    before = np.hypot(*(others - current[i]).T)
    after = np.hypot(*(others - candidate).T)
    return bool(np.any((after < min_sep) & (after < before)))


def _foot_in_image(cam: "CameraConfig", p: Point2) -> Optional[Point2]:
    foot = apply_homography(cam.world_to_image, p)
    if 0.0 <= foot.x < cam.image_w and 0.0 <= foot.y < cam.image_h:
        return foot
    return None


def visible_objects(scene: WorldScene, cam: "CameraConfig", frame_idx: int) -> List[str]:
    """Ids of the objects whose projected foot point lies inside the image."""
    visible = []
    for obj in scene.objects:
        if obj.present(frame_idx) and _foot_in_image(cam, obj.position(frame_idx)):
            visible.append(obj.object_id)
    return visible


def visibility_sets(scene: WorldScene, cam: "CameraConfig") -> List[Set[str]]:
    """visible_objects for every frame of the scene."""
    return [set(visible_objects(scene, cam, f)) for f in range(scene.n_frames)]


def render_ground_truth(scene: WorldScene, cam: "CameraConfig") -> DetectionLog:
    """Project every visible object into the camera as a confidence-1.0 box.

    Box height is person_height_m * vertical_scale times the local pixels-per-meter
    of the camera homography at the object; width is ASPECT_RATIO times height.
    The box is anchored on the projected foot point (bottom centre).
    """
    frames: List[List[BBox]] = []
    for f in range(scene.n_frames):
        boxes = []
        for obj in scene.objects:
            if not obj.present(f):
                continue
            ground = obj.position(f)
            foot = _foot_in_image(cam, ground)
            if foot is None:
                continue
            scale = local_scale(cam.world_to_image, ground)
            height = cam.person_height_m * cam.vertical_scale * scale
            width = ASPECT_RATIO * height
            if height <= 0.0:
                continue
            boxes.append(
                BBox(
                    foot.x - width / 2.0,
                    foot.y - height,
                    width,
                    height,
                    1.0,
                    0,
                    cam.camera_id,
                    f,
                )
            )
        frames.append(boxes)
    return DetectionLog(cam.camera_id, frames, cam.image_w, cam.image_h)


def _seed_word(seed: int) -> int:
    return int(seed) % (2**63)


def frame_rng(seed: int, camera_id: str, frame_idx: int) -> np.random.Generator:
    """Independent RNG stream for one (seed, camera, frame) triple."""
    return np.random.default_rng(
        np.random.SeedSequence([_seed_word(seed), stable_hash(camera_id), frame_idx])
    )


def synthesize_detections(
    gt: DetectionLog,
    noise: Union[NoiseModel, NoiseSchedule],
    seed: int,
    image_w: Optional[int] = None,
    image_h: Optional[int] = None,
) -> DetectionLog:
    """Degrade a ground-truth log with detector noise.

    Args:
        gt: Ground-truth log
        noise: Fixed noise model or a per-frame schedule
        seed: Run seed
        image_w: Image width for false positives (defaults to the log's)
        image_h: Image height for false positives (defaults to the log's)

    Returns:
        Detection log, deterministic for fixed (gt, noise, seed)
    """
    schedule = noise if isinstance(noise, NoiseSchedule) else NoiseSchedule(noise)
    width = image_w if image_w is not None else gt.image_w
    height = image_h if image_h is not None else gt.image_h

    frames: List[List[BBox]] = []
    for f, gt_boxes in enumerate(gt.frames):
        model = schedule.model_at(f)
        rng = frame_rng(seed, gt.camera_id, f)
        frames.append(_noisy_frame(gt.camera_id, f, gt_boxes, model, rng, width, height))
    return DetectionLog(gt.camera_id, frames, width, height)


def _noisy_frame(
    camera_id: str,
    frame_idx: int,
    gt_boxes: Sequence[BBox],
    model: NoiseModel,
    rng: np.random.Generator,
    image_w: Optional[int],
    image_h: Optional[int],
) -> List[BBox]:
    n = len(gt_boxes)
    keep = rng.random(n) >= model.miss_prob
    center = rng.normal(0.0, model.center_jitter_std, size=(n, 2))
    size = rng.normal(0.0, model.size_jitter_std, size=(n, 2))
    conf = np.clip(rng.normal(model.conf_mean, model.conf_std, size=n), 0.01, 1.0)

    out: List[BBox] = []
    for k, box in enumerate(gt_boxes):
        if not keep[k]:
            continue
        w = box.width + size[k, 0]
        h = box.height + size[k, 1]
        if model.size_jitter_std > 0:
            w, h = max(1.0, w), max(1.0, h)
        # shift the centre by the jitter and keep it fixed while resizing
        x_min = box.x_min + center[k, 0] - (w - box.width) / 2.0
        y_min = box.y_min + center[k, 1] - (h - box.height) / 2.0
        out.append(BBox(x_min, y_min, w, h, float(conf[k]), box.class_id, camera_id, frame_idx))

    if model.dup_rate > 0:
        for box in list(out):
            for _ in range(int(rng.poisson(model.dup_rate))):
                dx, dy = rng.normal(0.0, model.dup_jitter, size=2)
                out.append(
                    BBox(
                        box.x_min + dx * box.width,
                        box.y_min + dy * box.height,
                        box.width,
                        box.height,
                        box.confidence * float(rng.uniform(0.5, 0.9)),
                        box.class_id,
                        camera_id,
                        frame_idx,
                    )
                )

    n_false = int(rng.poisson(model.false_pos_rate)) if model.false_pos_rate > 0 else 0
    if n_false:
        if not image_w or not image_h:
            raise ScenarioError(
                f"camera '{camera_id}': false positives need the image size"
            )
        for _ in range(n_false):
            h = float(rng.uniform(0.1, 0.3)) * image_h
            w = ASPECT_RATIO * h
            out.append(
                BBox(
                    float(rng.uniform(0.0, max(image_w - w, 1e-6))),
                    float(rng.uniform(0.0, max(image_h - h, 1e-6))),
                    w,
                    h,
                    float(rng.uniform(0.01, model.conf_mean)),
                    0,
                    camera_id,
                    frame_idx,
                )
            )
    return out


def invert_detections(log: DetectionLog, image_w: int, image_h: int) -> DetectionLog:
    """Mirror every box through the image centre (adversarial camera output)."""
    frames = [
        [
            BBox(
                image_w - box.x_max,
                image_h - box.y_max,
                box.width,
                box.height,
                box.confidence,
                box.class_id,
                box.camera_id,
                box.frame_idx,
            )
            for box in boxes
        ]
        for boxes in log.frames
    ]
    return DetectionLog(log.camera_id, frames, image_w, image_h)


def box_to_record(box: BBox) -> Dict:
    return {
        "x_min": box.x_min,
        "y_min": box.y_min,
        "w": box.width,
        "h": box.height,
        "conf": box.confidence,
        "class_id": box.class_id,
    }


def dumps_log(log: DetectionLog) -> str:
    lines = [
        json.dumps(
            {
                "camera_id": log.camera_id,
                "frame_idx": idx,
                "boxes": [box_to_record(b) for b in boxes],
            }
        )
        for idx, boxes in enumerate(log.frames)
    ]
    return "".join(line + "\n" for line in lines)


def save_log(log: DetectionLog, path: Path) -> None:
    """Write a detection log as one JSON record per frame."""
    atomic_write_text(Path(path), dumps_log(log))
    logger.debug(f"Saved {log.n_frames} frames of camera '{log.camera_id}' to {path}")


def load_log(path: Path, camera_id: Optional[str] = None) -> DetectionLog:
    """Read a detection log written by save_log or an external exporter.

    Args:
        path: JSONL file
        camera_id: Expected camera id; also names the log when the file is empty

    Raises:
        LogIOError: If the file cannot be read
        ParseError: If the file is not UTF-8 or a line is not a JSON object
        SchemaError: If a record misses a field or holds an invalid box
    """
    text = read_utf8_text(Path(path), "detection log")

    frames: List[List[BBox]] = []
    log_camera = camera_id
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(line_no, f"invalid JSON ({e.msg})")
        if not isinstance(record, dict):
            raise ParseError(line_no, "record is not an object")

        frame_idx = record.get("frame_idx", f"on line {line_no}")
        for key in ("camera_id", "frame_idx", "boxes"):
            if key not in record:
                raise SchemaError(frame_idx, f"missing field '{key}'")
        if not isinstance(record["frame_idx"], int) or record["frame_idx"] != len(frames):
            raise SchemaError(
                frame_idx, f"expected frame_idx {len(frames)} (ascending, no gaps)"
            )
        record_camera = str(record["camera_id"])
        if log_camera is None:
            log_camera = record_camera
        elif record_camera != log_camera:
            raise SchemaError(
                frame_idx, f"camera_id '{record_camera}' differs from '{log_camera}'"
            )
        if not isinstance(record["boxes"], list):
            raise SchemaError(frame_idx, "'boxes' must be a list")
        frames.append([box_from_record(b, log_camera, frame_idx) for b in record["boxes"]])

    return DetectionLog(log_camera or "", frames)


def box_from_record(raw, camera_id: str, frame_idx: int) -> BBox:
    if not isinstance(raw, dict):
        raise SchemaError(frame_idx, "box is not an object")
    for key in ("x_min", "y_min", "w", "h", "conf", "class_id"):
        if key not in raw:
            raise SchemaError(frame_idx, f"box missing field '{key}'")
    class_id = raw["class_id"]
    integral = isinstance(class_id, int) or (
        isinstance(class_id, float) and class_id.is_integer()
    )
    if isinstance(class_id, bool) or not integral:
        raise SchemaError(frame_idx, f"class_id must be an integer, got {class_id!r}")
    try:
        return BBox(
            float(raw["x_min"]),
            float(raw["y_min"]),
            float(raw["w"]),
            float(raw["h"]),
            float(raw["conf"]),
            int(class_id),
            camera_id,
            frame_idx,
        )
    except (GeometryError, TypeError, ValueError) as e:
        raise SchemaError(frame_idx, f"invalid box ({e})")
