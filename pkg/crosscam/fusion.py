"""Cross-camera knowledge sharing: assignment, box fusion, boosting and NMS."""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from .exceptions import EmptyMatrixError, MissingHomographyError, ScenarioError
from .geometry import BBox, Homography, iou_matrix, transform_box
from .logging_config import get_logger
from .utils import sorted_camera_ids

logger = get_logger(__name__)

TIGHT_TOLERANCE = 1e-9
PERSON_CLASS = 0

_nms_direction_logged = False


@dataclass(frozen=True)
class Assignment:
    pairs: List[Tuple[int, int]]
    total_cost: float


@dataclass(frozen=True)
class FusionParams:
    """Knobs of the fusion pipeline.

    Args:
        match_gate_iou: Minimum IoU for an assigned pair to count as the same object
        boost_alpha: Confidence gain per extra supporting camera
        nms_iou: Overlap at or above which NMS suppresses the weaker box
        count_conf_threshold: Minimum confidence for a fused box to be counted
        accrete: Let unmatched collaborator boxes be matched by later collaborators
    """

    match_gate_iou: float = 0.2
    boost_alpha: float = 0.25
    nms_iou: float = 0.5
    count_conf_threshold: float = 0.5
    accrete: bool = False

    def __post_init__(self):
        if not 0.0 < self.match_gate_iou < 1.0:
            raise ScenarioError(f"match_gate_iou must lie in (0, 1), got {self.match_gate_iou}")
        if self.boost_alpha < 0.0:
            raise ScenarioError(f"boost_alpha must be >= 0, got {self.boost_alpha}")
        if not 0.0 < self.nms_iou < 1.0:
            raise ScenarioError(f"nms_iou must lie in (0, 1), got {self.nms_iou}")
        if not 0.0 <= self.count_conf_threshold <= 1.0:
            raise ScenarioError(
                f"count_conf_threshold must lie in [0, 1], got {self.count_conf_threshold}"
            )


@dataclass(frozen=True)
class FusedBox:
    """A box in supreme coordinates together with the cameras that saw it."""

    box: BBox
    support: int
    source_cameras: FrozenSet[str] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "source_cameras", frozenset(self.source_cameras))
        if self.support < 1 or self.support != len(self.source_cameras):
            raise ScenarioError(
                f"FusedBox support {self.support} does not match "
                f"sources {sorted(self.source_cameras)}"
            )


def hungarian(cost) -> Assignment:
    """Minimum-cost one-to-one assignment on a rectangular matrix.

    Uses the O(n^3) shortest augmenting path method with row/column
    potentials on the matrix padded square with zeros. Among equal-cost
    optima the lexicographically smallest pair list is returned.

    Raises:
        EmptyMatrixError: If the matrix has no rows or no columns
        ValueError: If any cost is not finite
    """
    matrix = np.asarray(cost, dtype=float)
    if matrix.ndim != 2:
        if matrix.size == 0:
            raise EmptyMatrixError()
        raise ValueError(f"cost must be a 2-D matrix, got shape {matrix.shape}")
    n_rows, n_cols = matrix.shape
    if n_rows == 0 or n_cols == 0:
        raise EmptyMatrixError()
    if not np.all(np.isfinite(matrix)):
        raise ValueError("cost matrix entries must be finite")

    # pad to square with zero-cost dummy rows or columns
    n = max(n_rows, n_cols)
    square = np.zeros((n, n))
    square[:n_rows, :n_cols] = matrix

    row_of_col, u, v = _shortest_augmenting_path(square)
    col_of_row = np.empty(n, dtype=int)
    col_of_row[row_of_col] = np.arange(n)

    # equality subgraph of the optimal dual, used to pick the smallest optimum
    scale = max(1.0, float(np.max(np.abs(square))))
    tight = (square - u[:, None] - v[None, :]) <= TIGHT_TOLERANCE * scale
    _lexicographic_refine(tight, col_of_row, row_of_col, n_rows)

    pairs = [(i, int(col_of_row[i])) for i in range(n_rows) if col_of_row[i] < n_cols]
    total = 0.0
    for i, j in pairs:
        total += float(matrix[i, j])
    return Assignment(pairs, total)


def _shortest_augmenting_path(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Square assignment; returns (row assigned to each column, u, v)."""
    n = a.shape[0]
    # index 0 is a virtual column/row used as the augmentation root
    cost = np.zeros((n + 1, n + 1))
    cost[1:, 1:] = a
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=int)
    way = np.zeros(n + 1, dtype=int)

    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used
            reduced = cost[i0] - u[i0] - v
            improve = free & (reduced < minv)
            minv[improve] = reduced[improve]
            way[improve] = j0
            candidates = np.where(free, minv, np.inf)
            j1 = int(np.argmin(candidates))
            delta = candidates[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    row_of_col = p[1:] - 1
    return row_of_col, u[1:], v[1:]


def _lexicographic_refine(
    tight: np.ndarray,
    col_of_row: np.ndarray,
    row_of_col: np.ndarray,
    n_rows: Optional[int] = None,
) -> None:
    """Rewrite an optimal matching into the lexicographically smallest optimal one.

    Works in place on the equality subgraph: row by row, the smallest tight
    column that still admits a perfect matching of the unfixed rows is taken.
    Rows from n_rows on are padding and keep whatever they are left with.
    """
    n = tight.shape[0]
    fixed_rows = np.zeros(n, dtype=bool)
    fixed_cols = np.zeros(n, dtype=bool)

    for i in range(n if n_rows is None else n_rows):
        current = int(col_of_row[i])
        for j in np.flatnonzero(tight[i]):
            j = int(j)
            if j >= current:
                break
            if fixed_cols[j]:
                continue
            # free column j by re-seating its row on an alternating path ending at `current`
            path = _alternating_path(
                tight,
                int(row_of_col[j]),
                current,
                j,
                fixed_rows,
                fixed_cols,
                col_of_row,
                row_of_col,
            )
            if path is None:
                continue
            for row, col in path:
                col_of_row[row] = col
                row_of_col[col] = row
            col_of_row[i] = j
            row_of_col[j] = i
            break
        fixed_rows[i] = True
        fixed_cols[col_of_row[i]] = True


def _alternating_path(
    tight: np.ndarray,
    start_row: int,
    target_col: int,
    banned_col: int,
    fixed_rows: np.ndarray,
    fixed_cols: np.ndarray,
    col_of_row: np.ndarray,
    row_of_col: np.ndarray,
) -> Optional[List[Tuple[int, int]]]:
    """(row, new column) moves re-seating start_row so that target_col is the one vacated."""
    n = tight.shape[0]
    visited = np.zeros(n, dtype=bool)
    visited[banned_col] = True

    def search(row: int) -> Optional[List[Tuple[int, int]]]:
        if fixed_rows[row]:
            return None
        for col in np.flatnonzero(tight[row]):
            col = int(col)
            if visited[col] or fixed_cols[col] or col == col_of_row[row]:
                continue
            visited[col] = True
            if col == target_col:
                return [(row, col)]
            rest = search(int(row_of_col[col]))
            if rest is not None:
                return [(row, col)] + rest
        return None

    return search(start_row)


def match_boxes(
    supreme_boxes: Sequence[BBox],
    other_boxes_transformed: Sequence[BBox],
    params: FusionParams,
) -> List[Tuple[int, int]]:
    """Pair collaborator boxes with supreme boxes by Hungarian assignment on 1 - IoU."""
    if not supreme_boxes or not other_boxes_transformed:
        return []
    iou = iou_matrix(supreme_boxes, other_boxes_transformed)
    assignment = hungarian(1.0 - iou)
    return [(i, j) for i, j in assignment.pairs if iou[i, j] >= params.match_gate_iou]


def boost_confidence(boxes: Sequence[FusedBox], params: FusionParams) -> List[FusedBox]:
    """Raise the confidence of boxes seen by several cameras."""
    boosted = []
    for fused in boxes:
        if fused.support <= 1:
            boosted.append(fused)
            continue
        gain = 1.0 + params.boost_alpha * (fused.support - 1)
        confidence = min(1.0, fused.box.confidence * gain)
        boosted.append(
            FusedBox(fused.box.with_confidence(confidence), fused.support, fused.source_cameras)
        )
    return boosted


def nms_keep(boxes: Sequence[BBox], nms_iou: float) -> List[int]:
    """Indices kept by greedy NMS, in keep order."""
    global _nms_direction_logged
    if not _nms_direction_logged:
        logger.debug(
            "NMS suppresses boxes whose overlap with a kept box is at or above nms_iou"
        )
        _nms_direction_logged = True
    if not boxes:
        return []

    order = sorted(
        range(len(boxes)),
        key=lambda k: (-boxes[k].confidence, boxes[k].x_min, boxes[k].y_min, k),
    )
    iou = iou_matrix(boxes, boxes)
    suppressed = np.zeros(len(boxes), dtype=bool)
    keep = []
    for k in order:
        if suppressed[k]:
            continue
        keep.append(k)
        suppressed |= iou[k] >= nms_iou
    return keep


def nms(boxes: Sequence[BBox], nms_iou: float) -> List[BBox]:
    """Greedy non-maximum suppression."""
    return [boxes[k] for k in nms_keep(boxes, nms_iou)]


@dataclass
class _Reference:
    box: BBox
    confidence: float
    members: List[Tuple[str, int]]

    @property
    def cameras(self) -> Set[str]:
        return {camera for camera, _ in self.members}


def fuse_with_provenance(
    cluster_boxes: Mapping[str, Sequence[BBox]],
    supreme_id: str,
    cam_to_supreme: Mapping[str, Homography],
    params: FusionParams,
) -> Tuple[List[FusedBox], Dict[str, List[bool]]]:
    """Fuse a cluster's boxes and report which input boxes were confirmed by another camera.

    Every collaborator is matched against the supreme camera's boxes; a matched
    pair keeps the supreme box and its confidence. With ``params.accrete`` the
    unmatched boxes of earlier collaborators are matchable too and merged
    confidence is the maximum over contributors.

    Returns:
        (fused boxes after boosting and NMS, camera -> per-input-box agreement flags)
    """
    collaborators = [c for c in sorted_camera_ids(cluster_boxes) if c != supreme_id]
    for camera_id in collaborators:
        if camera_id not in cam_to_supreme:
            raise MissingHomographyError(camera_id)

    references = [
        _Reference(box, box.confidence, [(supreme_id, k)])
        for k, box in enumerate(cluster_boxes.get(supreme_id, []))
    ]
    singles: List[_Reference] = []

    for camera_id in collaborators:
        homography = cam_to_supreme[camera_id]
        transformed = [transform_box(homography, b) for b in cluster_boxes[camera_id]]
        pairs = match_boxes([r.box for r in references], transformed, params)
        matched = set()
        for ref_idx, other_idx in pairs:
            ref = references[ref_idx]
            if params.accrete:
                ref.confidence = max(ref.confidence, transformed[other_idx].confidence)
            ref.members.append((camera_id, other_idx))
            matched.add(other_idx)
        unmatched = [
            _Reference(box, box.confidence, [(camera_id, other_idx)])
            for other_idx, box in enumerate(transformed)
            if other_idx not in matched
        ]
        # accreted boxes become matchable for the collaborators that follow
        if params.accrete:
            references.extend(unmatched)
        else:
            singles.extend(unmatched)

    agreement = {c: [False] * len(b) for c, b in cluster_boxes.items()}
    merged = []
    for ref in references + singles:
        cameras = ref.cameras
        if len(cameras) > 1:
            for camera_id, idx in ref.members:
                agreement[camera_id][idx] = True
        box = ref.box.with_confidence(ref.confidence).relabel(supreme_id, ref.box.frame_idx)
        merged.append(FusedBox(box, len(cameras), frozenset(cameras)))

    # boosted confidences decide the NMS order
    boosted = boost_confidence(merged, params)
    keep = nms_keep([f.box for f in boosted], params.nms_iou)
    return [boosted[k] for k in keep], agreement


def fuse(
    cluster_boxes: Mapping[str, Sequence[BBox]],
    supreme_id: str,
    cam_to_supreme: Mapping[str, Homography],
    params: FusionParams,
) -> List[FusedBox]:
    """Transform, match, merge, boost and suppress one cluster's boxes."""
    fused, _ = fuse_with_provenance(cluster_boxes, supreme_id, cam_to_supreme, params)
    return fused


def count_people(fused: Sequence[FusedBox], params: FusionParams) -> int:
    """Number of person boxes confident enough to count."""
    return sum(
        1
        for f in fused
        if f.box.class_id == PERSON_CLASS and f.box.confidence >= params.count_conf_threshold
    )
