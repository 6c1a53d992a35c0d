"""Camera network model: footprints, overlap, clustering and supreme selection."""

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .detsim import DegradedWindow, NoiseModel, NoiseSchedule
from .exceptions import MissingInputError, ScenarioError
from .geometry import (
    ConvexPolygon,
    Homography,
    Point2,
    apply_homography,
    compose,
    invert_homography,
    polygon_intersection_area,
)
from .logging_config import get_logger
from .utils import camera_sort_key, sorted_camera_ids

logger = get_logger(__name__)

VALIDATION_ACCURACY = "validation_accuracy"
STATIC_SCORE = "static_score"
SUPREME_MODES = (VALIDATION_ACCURACY, STATIC_SCORE)
DEFAULT_BETA = 0.5


@dataclass(frozen=True)
class CameraConfig:
    """A fixed camera looking at the ground plane.

    Args:
        camera_id: Unique identifier
        image_w: Image width in pixels
        image_h: Image height in pixels
        world_to_image: Ground plane (meters) to image (pixels) homography
        quality: Resolution-quality score in [0, 1]
        noise: Detector noise of this camera
        vertical_scale: Pixel height of a 1 m person per pixel of ground scale
        person_height_m: Standing height used for box sizing
        degraded_windows: Frame ranges with a harsher noise model
        adversarial: Emit mirrored boxes instead of real detections
        detections_file: Ingest this detection log instead of synthesizing one
    """

    camera_id: str
    image_w: int
    image_h: int
    world_to_image: Homography
    quality: float = 0.5
    noise: NoiseModel = field(default_factory=NoiseModel)
    vertical_scale: float = 1.0
    person_height_m: float = 1.7
    degraded_windows: Tuple[DegradedWindow, ...] = ()
    adversarial: bool = False
    detections_file: Optional[Path] = None

    def __post_init__(self):
        if self.image_w <= 0 or self.image_h <= 0:
            raise ScenarioError(
                f"camera '{self.camera_id}': image size must be positive, "
                f"got {self.image_w}x{self.image_h}"
            )
        if not 0.0 <= self.quality <= 1.0:
            raise ScenarioError(f"camera '{self.camera_id}': quality must lie in [0, 1]")
        if self.vertical_scale <= 0 or self.person_height_m <= 0:
            raise ScenarioError(f"camera '{self.camera_id}': box sizing must be positive")

    @property
    def image_to_world(self) -> Homography:
        return invert_homography(self.world_to_image)

    @property
    def noise_schedule(self) -> NoiseSchedule:
        return NoiseSchedule(self.noise, tuple(self.degraded_windows))


@dataclass(frozen=True)
class TopologyParams:
    """How cameras are grouped and how each group's supreme is chosen."""

    overlap_threshold: float = 0.3
    supreme_mode: str = STATIC_SCORE
    beta: float = DEFAULT_BETA
    supreme: Optional[str] = None

    def __post_init__(self):
        if not 0.0 < self.overlap_threshold <= 1.0:
            raise ScenarioError(
                f"overlap_threshold must lie in (0, 1], got {self.overlap_threshold}"
            )
        if self.supreme_mode not in SUPREME_MODES:
            raise ScenarioError(
                f"supreme_mode must be one of {SUPREME_MODES}, got '{self.supreme_mode}'"
            )
        if not 0.0 <= self.beta <= 1.0:
            raise ScenarioError(f"beta must lie in [0, 1], got {self.beta}")


@dataclass(frozen=True)
class OverlapMatrix:
    camera_ids: Tuple[str, ...]
    values: np.ndarray

    @property
    def n(self) -> int:
        return len(self.camera_ids)

    def index(self, camera_id: str) -> int:
        return self.camera_ids.index(camera_id)

    def get(self, a: str, b: str) -> float:
        return float(self.values[self.index(a), self.index(b)])


@dataclass(frozen=True)
class Cluster:
    members: FrozenSet[str]
    supreme: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        if not self.members:
            raise ScenarioError("cluster must have at least one member")
        if self.supreme is not None and self.supreme not in self.members:
            raise ScenarioError(f"supreme '{self.supreme}' is not a cluster member")

    def with_supreme(self, supreme: str) -> "Cluster":
        return Cluster(self.members, supreme)

    def ordered_members(self) -> List[str]:
        return sorted_camera_ids(self.members)


def fov_footprint(cam: CameraConfig) -> ConvexPolygon:
    """Ground-plane region imaged by the camera."""
    image_to_world = cam.image_to_world
    corners = [
        Point2(0.0, 0.0),
        Point2(float(cam.image_w), 0.0),
        Point2(float(cam.image_w), float(cam.image_h)),
        Point2(0.0, float(cam.image_h)),
    ]
    return ConvexPolygon.from_points(apply_homography(image_to_world, c) for c in corners)


def overlap_matrix(cams: Sequence[CameraConfig]) -> OverlapMatrix:
    """Pairwise footprint overlap normalized by the smaller footprint."""
    if not cams:
        raise ScenarioError("overlap_matrix needs at least one camera")
    footprints = [fov_footprint(c) for c in cams]
    areas = [fp.area for fp in footprints]
    n = len(cams)
    values = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            inter = polygon_intersection_area(footprints[i], footprints[j])
            value = min(1.0, max(0.0, inter / min(areas[i], areas[j])))
            values[i, j] = values[j, i] = value
    return OverlapMatrix(tuple(c.camera_id for c in cams), values)


def cluster_cameras(m: OverlapMatrix, overlap_threshold: float = 0.3) -> List[Cluster]:
    """Connected components of the overlap graph, sorted by smallest member id."""
    if not 0.0 < overlap_threshold <= 1.0:
        raise ScenarioError(f"overlap_threshold must lie in (0, 1], got {overlap_threshold}")
    n = m.n
    seen = [False] * n
    components: List[FrozenSet[str]] = []
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = True
        queue = deque([start])
        members = []
        while queue:
            i = queue.popleft()
            members.append(m.camera_ids[i])
            for j in range(n):
                if not seen[j] and j != i and m.values[i, j] >= overlap_threshold:
                    seen[j] = True
                    queue.append(j)
        components.append(frozenset(members))
    components.sort(key=lambda c: camera_sort_key(min(c, key=camera_sort_key)))
    return [Cluster(c) for c in components]


def static_scores(
    areas: Mapping[str, float], qualities: Mapping[str, float], beta: float = DEFAULT_BETA
) -> Dict[str, float]:
    """beta * normalized footprint area + (1 - beta) * quality, per camera."""
    largest = max(areas.values())
    return {
        c: beta * (areas[c] / largest if largest > 0 else 0.0) + (1.0 - beta) * qualities[c]
        for c in areas
    }


def _argmax(scores: Mapping[str, float]) -> str:
    best_id, best = None, None
    for camera_id in sorted_camera_ids(scores):
        if best is None or scores[camera_id] > best:
            best_id, best = camera_id, scores[camera_id]
    return best_id


def select_supreme(
    members,
    mode: str,
    accuracies: Optional[Mapping[str, float]] = None,
    cameras: Optional[Sequence[CameraConfig]] = None,
    beta: float = DEFAULT_BETA,
) -> str:
    """Pick the cluster's supreme camera; ties go to the lowest id.

    Args:
        members: Camera ids of the cluster
        mode: validation_accuracy or static_score
        accuracies: Isolated counting accuracy per camera (validation_accuracy)
        cameras: Camera configurations (static_score)
        beta: Weight of coverage area against quality (static_score)

    Raises:
        MissingInputError: If the inputs of the selected mode are absent
    """
    members = list(members)
    if mode == VALIDATION_ACCURACY:
        if accuracies is None:
            raise MissingInputError("validation_accuracy selection needs per-camera accuracies")
        missing = [c for c in members if c not in accuracies]
        if missing:
            raise MissingInputError(f"no calibration accuracy for camera '{missing[0]}'")
        return _argmax({c: accuracies[c] for c in members})

    if mode == STATIC_SCORE:
        if cameras is None:
            raise MissingInputError("static_score selection needs camera configurations")
        by_id = {c.camera_id: c for c in cameras}
        missing = [c for c in members if c not in by_id]
        if missing:
            raise MissingInputError(f"no configuration for camera '{missing[0]}'")
        areas = {c: fov_footprint(by_id[c]).area for c in members}
        qualities = {c: by_id[c].quality for c in members}
        return _argmax(static_scores(areas, qualities, beta))

    raise MissingInputError(f"unknown supreme mode '{mode}', expected one of {SUPREME_MODES}")


def cam_to_supreme(
    cameras: Sequence[CameraConfig], supreme_id: str
) -> Dict[str, Homography]:
    """Image-to-image homographies from each camera into the supreme's image."""
    by_id = {c.camera_id: c for c in cameras}
    if supreme_id not in by_id:
        raise ScenarioError(f"unknown supreme camera '{supreme_id}'")
    supreme = by_id[supreme_id].world_to_image
    return {
        c.camera_id: compose(supreme, c.image_to_world)
        for c in cameras
        if c.camera_id != supreme_id
    }


def accretion_order(cluster: Cluster, m: OverlapMatrix) -> List[str]:
    """Supreme first, then members by ascending overlap with it (ties by id).

    Least-overlapping cameras add the most new coverage, so they join first.
    """
    if cluster.supreme is None:
        raise ScenarioError("accretion order needs a resolved supreme")
    rest = [c for c in cluster.members if c != cluster.supreme]
    rest.sort(key=lambda c: (m.get(cluster.supreme, c), camera_sort_key(c)))
    return [cluster.supreme] + rest


def accretion_sequence(clusters: Sequence[Cluster], m: OverlapMatrix) -> List[str]:
    """Deployment-wide accretion: every supreme first, then each cluster's remaining
    members in accretion order, cluster by cluster.

    Every prefix that holds at least the supremes is a valid knowledge-sharing subset.
    """
    orders = [accretion_order(c, m) for c in clusters]
    return [o[0] for o in orders] + [camera for o in orders for camera in o[1:]]


def resolve_clusters(
    cameras: Sequence[CameraConfig],
    overlap_threshold: float,
    supreme_mode: str,
    beta: float = DEFAULT_BETA,
    supreme_override: Optional[str] = None,
    accuracies: Optional[Mapping[str, float]] = None,
) -> Tuple[List[Cluster], OverlapMatrix]:
    """Cluster the cameras and assign each cluster its supreme."""
    m = overlap_matrix(cameras)
    clusters = []
    for cluster in cluster_cameras(m, overlap_threshold):
        if supreme_override is not None and supreme_override in cluster.members:
            supreme = supreme_override
        else:
            supreme = select_supreme(
                cluster.members, supreme_mode, accuracies=accuracies, cameras=cameras, beta=beta
            )
        clusters.append(cluster.with_supreme(supreme))
        logger.debug(f"cluster {cluster.ordered_members()} -> supreme '{supreme}'")
    if supreme_override is not None and not any(
        supreme_override in c.members for c in clusters
    ):
        raise ScenarioError(f"supreme override '{supreme_override}' is not a camera")
    return clusters, m
