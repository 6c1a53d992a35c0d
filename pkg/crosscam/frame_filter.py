"""Per-camera new-object frame filter.

A frame is worth transmitting exactly when it contains a box that does not
continue any live track. Tracks are matched greedily by IoU, which keeps
the on-camera cost low.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .detsim import DetectionLog
from .exceptions import ScenarioError
from .geometry import BBox, iou_matrix
from .logging_config import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class Track:
    track_id: int
    last_box: BBox
    last_seen_frame: int
    first_seen_frame: int
    age: int = 1

    def __post_init__(self):
        if self.last_seen_frame < self.first_seen_frame:
            raise ScenarioError(
                f"Track {self.track_id}: last seen {self.last_seen_frame} "
                f"before creation {self.first_seen_frame}"
            )


@dataclass(frozen=True)
class FilterParams:
    """Tracker knobs.

    Args:
        match_iou: Minimum IoU for a box to continue a track
        ttl: Frames a track survives unseen; None keeps tracks forever
    """

    match_iou: float = 0.3
    ttl: Optional[int] = 15

    def __post_init__(self):
        if not 0.0 < self.match_iou < 1.0:
            raise ScenarioError(f"match_iou must lie in (0, 1), got {self.match_iou}")
        if self.ttl is not None and self.ttl < 1:
            raise ScenarioError(f"ttl must be >= 1, got {self.ttl}")


@dataclass
class FilterResult:
    transmitted: Set[int]
    fraction: float
    new_object_events: List[Tuple[int, int]]
    n_frames: int
    new_boxes: Dict[int, List[int]] = field(default_factory=dict)

    def was_transmitted(self, frame_idx: int) -> bool:
        return frame_idx in self.transmitted


def _expire(tracks: List[Track], frame_idx: int, ttl: Optional[int]) -> List[Track]:
    if ttl is None:
        return tracks
    return [t for t in tracks if frame_idx - t.last_seen_frame <= ttl]


def greedy_pairs(
    tracks: Sequence[Track], boxes: Sequence[BBox], match_iou: float
) -> List[Tuple[int, int]]:
    """One-to-one (track position, box index) pairs, best IoU first.

    Ties are broken by lower track id, then lower box index.
    """
    if not tracks or not boxes:
        return []
    iou = iou_matrix([t.last_box for t in tracks], boxes)
    candidates = [
        (-float(iou[ti, bi]), tracks[ti].track_id, bi, ti)
        for ti in range(len(tracks))
        for bi in range(len(boxes))
        if iou[ti, bi] >= match_iou
    ]
    candidates.sort()

    used_tracks: Set[int] = set()
    used_boxes: Set[int] = set()
    pairs = []
    for _, _, bi, ti in candidates:
        if ti in used_tracks or bi in used_boxes:
            continue
        used_tracks.add(ti)
        used_boxes.add(bi)
        pairs.append((ti, bi))
    return pairs


def _advance(
    tracks: Sequence[Track],
    frame_boxes: Sequence[BBox],
    params: FilterParams,
    frame_idx: int,
    next_track_id: int,
) -> Tuple[List[Track], List[int], int]:
    live = _expire(list(tracks), frame_idx, params.ttl)
    pairs = greedy_pairs(live, frame_boxes, params.match_iou)

    updated = list(live)
    matched_boxes = set()
    for ti, bi in pairs:
        track = updated[ti]
        updated[ti] = replace(
            track,
            last_box=frame_boxes[bi],
            last_seen_frame=frame_idx,
            age=track.age + 1,
        )
        matched_boxes.add(bi)

    new_indices = [bi for bi in range(len(frame_boxes)) if bi not in matched_boxes]
    for bi in new_indices:
        updated.append(Track(next_track_id, frame_boxes[bi], frame_idx, frame_idx))
        next_track_id += 1

    return _expire(updated, frame_idx, params.ttl), new_indices, next_track_id


def step_tracker(
    tracks: Sequence[Track],
    frame_boxes: Sequence[BBox],
    params: FilterParams,
    frame_idx: int,
    next_track_id: Optional[int] = None,
) -> Tuple[List[Track], int]:
    """Advance a track list by one frame.

    Args:
        tracks: Live tracks
        frame_boxes: Detections of this frame
        params: Matching gate and track lifetime
        frame_idx: Index of this frame
        next_track_id: Id for the first new track; defaults to one past the largest live id

    Returns:
        (updated tracks, number of tracks created)
    """
    if next_track_id is None:
        next_track_id = max((t.track_id for t in tracks), default=-1) + 1
    updated, new_indices, _ = _advance(tracks, frame_boxes, params, frame_idx, next_track_id)
    return updated, len(new_indices)


class Tracker:
    """Stateful tracker owning its track-id counter."""

    def __init__(self, params: FilterParams):
        self.params = params
        self.tracks: List[Track] = []
        self._next_id = 0

    def step(self, frame_boxes: Sequence[BBox], frame_idx: int) -> List[int]:
        """Advance one frame and return the indices of boxes that opened tracks."""
        self.tracks, new_indices, self._next_id = _advance(
            self.tracks, frame_boxes, self.params, frame_idx, self._next_id
        )
        return new_indices

    def touch(self, boxes: Sequence[BBox], frame_idx: int) -> None:
        """Mark tracks overlapping any of boxes as seen at frame_idx, creating none."""
        live = _expire(self.tracks, frame_idx, self.params.ttl)
        if not live or not boxes:
            self.tracks = live
            return
        best = iou_matrix([t.last_box for t in live], boxes).max(axis=1)
        self.tracks = [
            replace(t, last_seen_frame=frame_idx) if best[k] >= self.params.match_iou else t
            for k, t in enumerate(live)
        ]

    def live_boxes(self, frame_idx: int) -> List[BBox]:
        """Last boxes of the tracks still alive at frame_idx."""
        return [t.last_box for t in _expire(self.tracks, frame_idx, self.params.ttl)]


def filter_stream(log: DetectionLog, params: FilterParams) -> FilterResult:
    """Decide which frames of a camera's log to transmit."""
    tracker = Tracker(params)
    transmitted: Set[int] = set()
    events: List[Tuple[int, int]] = []
    new_boxes: Dict[int, List[int]] = {}

    for frame_idx, boxes in enumerate(log.frames):
        new_indices = tracker.step(boxes, frame_idx)
        if new_indices:
            transmitted.add(frame_idx)
            events.append((frame_idx, len(new_indices)))
            new_boxes[frame_idx] = new_indices

    n_frames = log.n_frames
    fraction = len(transmitted) / n_frames if n_frames else 0.0
    logger.debug(
        f"camera '{log.camera_id}': {len(transmitted)}/{n_frames} frames flagged new"
    )
    return FilterResult(transmitted, fraction, events, n_frames, new_boxes)
