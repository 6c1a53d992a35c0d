"""Planar homographies, box geometry and convex polygon clipping.

Every type here is an immutable value and every function is pure, so the
module can be used from any number of threads at once.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .exceptions import DegeneratePointError, GeometryError, SingularHomographyError

DET_TOLERANCE = 1e-12
DENOMINATOR_TOLERANCE = 1e-12
CONVEXITY_TOLERANCE = 1e-9

Matrix3 = Tuple[Tuple[float, float, float], ...]


@dataclass(frozen=True)
class Point2:
    """A 2D point: pixels in image space or meters on the world ground plane."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError(f"Point coordinates must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class Homography:
    """A 3x3 projective transform stored in canonical form (m[2][2] = 1 when nonzero)."""

    m: Matrix3

    def __post_init__(self):
        arr = np.asarray(self.m, dtype=float)
        if arr.shape != (3, 3):
            raise GeometryError(f"Homography must be 3x3, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise GeometryError("Homography entries must be finite")
        if arr[2, 2] != 0.0:
            arr = arr / arr[2, 2]
        det = float(np.linalg.det(arr))
        if abs(det) <= DET_TOLERANCE:
            raise SingularHomographyError(det)
        object.__setattr__(self, "m", _freeze(arr))

    @classmethod
    def from_matrix(cls, matrix) -> "Homography":
        return cls(_freeze(np.asarray(matrix, dtype=float)))

    @classmethod
    def identity(cls) -> "Homography":
        return cls.from_matrix(np.eye(3))

    @classmethod
    def translation(cls, tx: float, ty: float) -> "Homography":
        return cls.from_matrix([[1.0, 0.0, tx], [0.0, 1.0, ty], [0.0, 0.0, 1.0]])

    @classmethod
    def scaling(cls, sx: float, sy: float) -> "Homography":
        return cls.from_matrix([[sx, 0.0, 0.0], [0.0, sy, 0.0], [0.0, 0.0, 1.0]])

    @property
    def matrix(self) -> np.ndarray:
        """A fresh numpy copy of the canonical matrix."""
        return np.array(self.m, dtype=float)

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.matrix))

    def to_list(self) -> List[List[float]]:
        return [list(row) for row in self.m]


def _freeze(arr: np.ndarray) -> Matrix3:
    return tuple(tuple(float(v) for v in row) for row in arr)


def apply_homography(h: Homography, p: Point2) -> Point2:
    """Map a point through a homography.

    Raises:
        DegeneratePointError: If the point maps to the line at infinity
    """
    m = h.m
    w = m[2][0] * p.x + m[2][1] * p.y + m[2][2]
    if abs(w) <= DENOMINATOR_TOLERANCE:
        raise DegeneratePointError(p.x, p.y, w)
    x = (m[0][0] * p.x + m[0][1] * p.y + m[0][2]) / w
    y = (m[1][0] * p.x + m[1][1] * p.y + m[1][2]) / w
    return Point2(x, y)


def compose(h1: Homography, h2: Homography) -> Homography:
    """Return h1 after h2, i.e. apply(compose(h1, h2), p) == apply(h1, apply(h2, p))."""
    return Homography.from_matrix(h1.matrix @ h2.matrix)


def invert_homography(h: Homography) -> Homography:
    """Return the inverse transform.

    Raises:
        SingularHomographyError: If the matrix is not invertible
    """
    arr = h.matrix
    det = float(np.linalg.det(arr))
    if abs(det) <= DET_TOLERANCE:
        raise SingularHomographyError(det)
    return Homography.from_matrix(np.linalg.inv(arr))


def homography_from_points(
    src: Sequence[Tuple[float, float]], dst: Sequence[Tuple[float, float]]
) -> Homography:
    """Solve the homography mapping four source points onto four destination points.

    Args:
        src: Four (x, y) points, no three collinear
        dst: Their four images

    Returns:
        Homography with h(src[i]) == dst[i]
    """
    if len(src) != 4 or len(dst) != 4:
        raise GeometryError("Exactly four point correspondences are required")
    a = np.zeros((8, 8))
    b = np.zeros(8)
    for i, ((x, y), (u, v)) in enumerate(zip(src, dst)):
        a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]
        a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]
        b[2 * i] = u
        b[2 * i + 1] = v
    try:
        solution = np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        raise SingularHomographyError(0.0)
    return Homography.from_matrix(np.append(solution, 1.0).reshape(3, 3))


def local_scale(h: Homography, p: Point2) -> float:
    """Linear magnification of h at p: sqrt(|det J|) of the projective map."""
    m = h.m
    w = m[2][0] * p.x + m[2][1] * p.y + m[2][2]
    if abs(w) <= DENOMINATOR_TOLERANCE:
        raise DegeneratePointError(p.x, p.y, w)
    q = apply_homography(h, p)
    j00 = (m[0][0] - m[2][0] * q.x) / w
    j01 = (m[0][1] - m[2][1] * q.x) / w
    j10 = (m[1][0] - m[2][0] * q.y) / w
    j11 = (m[1][1] - m[2][1] * q.y) / w
    return math.sqrt(abs(j00 * j11 - j01 * j10))


@dataclass(frozen=True)
class BBox:
    """Axis-aligned pixel box with detector confidence."""

    x_min: float
    y_min: float
    width: float
    height: float
    confidence: float = 1.0
    class_id: int = 0
    camera_id: str = ""
    frame_idx: int = 0

    def __post_init__(self):
        for name in ("x_min", "y_min", "width", "height", "confidence"):
            if not math.isfinite(getattr(self, name)):
                raise GeometryError(f"BBox.{name} must be finite")
        if self.width <= 0 or self.height <= 0:
            raise GeometryError(
                f"BBox width and height must be positive, got {self.width}x{self.height}"
            )
        if not 0.0 <= self.confidence <= 1.0:
            raise GeometryError(f"BBox confidence must lie in [0, 1], got {self.confidence}")
        if self.frame_idx < 0:
            raise GeometryError(f"BBox frame_idx must be non-negative, got {self.frame_idx}")

    @property
    def x_max(self) -> float:
        return self.x_min + self.width

    @property
    def y_max(self) -> float:
        return self.y_min + self.height

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    @property
    def center(self) -> Point2:
        return Point2(self.x_min + self.width / 2.0, self.y_min + self.height / 2.0)

    @property
    def foot(self) -> Point2:
        """Bottom-centre point, where a standing person touches the ground."""
        return Point2(self.x_min + self.width / 2.0, self.y_max)

    def with_confidence(self, confidence: float) -> "BBox":
        return replace(self, confidence=confidence)

    def relabel(self, camera_id: str, frame_idx: int) -> "BBox":
        return replace(self, camera_id=camera_id, frame_idx=frame_idx)


def box_iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes, 0.0 when disjoint."""
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ix <= 0.0 or iy <= 0.0:
        return 0.0
    inter = ix * iy
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return min(1.0, inter / union)


def boxes_to_array(boxes: Sequence[BBox]) -> np.ndarray:
    """Stack boxes as an (n, 4) array of x_min, y_min, x_max, y_max."""
    if not boxes:
        return np.zeros((0, 4))
    return np.array([[b.x_min, b.y_min, b.x_max, b.y_max] for b in boxes], dtype=float)


def iou_matrix(a: Sequence[BBox], b: Sequence[BBox]) -> np.ndarray:
    """Pairwise IoU, elementwise equal to box_iou(a[i], b[j])."""
    if not a or not b:
        return np.zeros((len(a), len(b)))
    aa = boxes_to_array(a)
    bb = boxes_to_array(b)
    area_a = (aa[:, 2] - aa[:, 0]) * (aa[:, 3] - aa[:, 1])
    area_b = (bb[:, 2] - bb[:, 0]) * (bb[:, 3] - bb[:, 1])
    ix = np.minimum(aa[:, None, 2], bb[None, :, 2]) - np.maximum(aa[:, None, 0], bb[None, :, 0])
    iy = np.minimum(aa[:, None, 3], bb[None, :, 3]) - np.maximum(aa[:, None, 1], bb[None, :, 1])
    overlapping = (ix > 0.0) & (iy > 0.0)
    inter = np.where(overlapping, ix * iy, 0.0)
    union = area_a[:, None] + area_b[None, :] - inter
    with np.errstate(divide="ignore", invalid="ignore"):
        iou = np.where(overlapping & (union > 0.0), inter / union, 0.0)
    return np.minimum(iou, 1.0)


def transform_box(h: Homography, b: BBox) -> BBox:
    """Map a box through h and re-axis-align it to the bounding box of its corners."""
    corners = [
        apply_homography(h, Point2(b.x_min, b.y_min)),
        apply_homography(h, Point2(b.x_max, b.y_min)),
        apply_homography(h, Point2(b.x_max, b.y_max)),
        apply_homography(h, Point2(b.x_min, b.y_max)),
    ]
    xs = [c.x for c in corners]
    ys = [c.y for c in corners]
    x_min, y_min = min(xs), min(ys)
    return replace(b, x_min=x_min, y_min=y_min, width=max(xs) - x_min, height=max(ys) - y_min)


def _cross(o: Point2, a: Point2, b: Point2) -> float:
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)


def polygon_area(vertices: Sequence[Point2]) -> float:
    """Signed shoelace area; positive for counter-clockwise vertex order."""
    n = len(vertices)
    if n < 3:
        return 0.0
    total = 0.0
    for i in range(n):
        p, q = vertices[i], vertices[(i + 1) % n]
        total += p.x * q.y - q.x * p.y
    return total / 2.0


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex polygon with counter-clockwise vertices."""

    vertices: Tuple[Point2, ...] = field(default_factory=tuple)

    def __post_init__(self):
        verts = tuple(self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise GeometryError(f"Polygon needs at least 3 vertices, got {len(verts)}")
        if polygon_area(verts) <= 0.0:
            raise GeometryError("Polygon vertices must be in counter-clockwise order")
        n = len(verts)
        for i in range(n):
            if _cross(verts[i], verts[(i + 1) % n], verts[(i + 2) % n]) < -CONVEXITY_TOLERANCE:
                raise GeometryError("Polygon is not convex")

    @classmethod
    def from_points(cls, points: Iterable[Point2]) -> "ConvexPolygon":
        """Convex hull of the points, counter-clockwise (monotone chain)."""
        pts = sorted(set((p.x, p.y) for p in points))
        if len(pts) < 3:
            raise GeometryError("Convex hull needs at least 3 distinct points")
        pts2 = [Point2(x, y) for x, y in pts]

        lower: List[Point2] = []
        for p in pts2:
            while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
                lower.pop()
            lower.append(p)
        upper: List[Point2] = []
        for p in reversed(pts2):
            while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
                upper.pop()
            upper.append(p)
        return cls(tuple(lower[:-1] + upper[:-1]))

    @property
    def area(self) -> float:
        return polygon_area(self.vertices)

    def contains(self, p: Point2) -> bool:
        """True if p lies inside or on the boundary."""
        n = len(self.vertices)
        return all(
            _cross(self.vertices[i], self.vertices[(i + 1) % n], p) >= -CONVEXITY_TOLERANCE
            for i in range(n)
        )


def _clip_half_plane(subject: List[Point2], edge_start: Point2, edge_end: Point2) -> List[Point2]:
    # Keep the part of subject on the left of the directed edge
    def inside(p: Point2) -> bool:
        return _cross(edge_start, edge_end, p) >= 0.0

    def intersection(s: Point2, e: Point2) -> Point2:
        dx, dy = e.x - s.x, e.y - s.y
        ex, ey = edge_end.x - edge_start.x, edge_end.y - edge_start.y
        denom = ex * dy - ey * dx
        t = (ey * (s.x - edge_start.x) - ex * (s.y - edge_start.y)) / denom
        return Point2(s.x + t * dx, s.y + t * dy)

    output: List[Point2] = []
    if not subject:
        return output
    s = subject[-1]
    for e in subject:
        if inside(e):
            if not inside(s):
                output.append(intersection(s, e))
            output.append(e)
        elif inside(s):
            output.append(intersection(s, e))
        s = e
    return output


def polygon_intersection_area(a: ConvexPolygon, b: ConvexPolygon) -> float:
    """Area of the intersection of two convex polygons (0.0 when disjoint)."""
    clipped = list(a.vertices)
    clip = b.vertices
    for i in range(len(clip)):
        clipped = _clip_half_plane(clipped, clip[i], clip[(i + 1) % len(clip)])
        if len(clipped) < 3:
            return 0.0
    return max(0.0, polygon_area(clipped))
