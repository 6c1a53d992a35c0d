"""Builders shared by the test modules."""

from crosscam.detsim import WorldObject, WorldScene
from crosscam.geometry import BBox, Homography, Point2, compose
from crosscam.topology import CameraConfig

# 50 px per meter over a 10 m x 8 m room
PX_PER_M = 50.0
IMAGE_W = 500
IMAGE_H = 400


def make_camera(camera_id, offset_x=0.0, quality=0.5, **kwargs) -> CameraConfig:
    """Top-down camera over the room [offset_x, offset_x + 10] x [0, 8]."""
    view = compose(Homography.scaling(PX_PER_M, PX_PER_M), Homography.translation(-offset_x, 0.0))
    return CameraConfig(
        camera_id=camera_id,
        image_w=IMAGE_W,
        image_h=IMAGE_H,
        world_to_image=view,
        quality=quality,
        **kwargs,
    )


def static_scene(positions, n_frames=10) -> WorldScene:
    """People standing still at the given ground positions for the whole run."""
    objects = [
        WorldObject(str(i), {f: Point2(x, y) for f in range(n_frames)}, 0, n_frames - 1)
        for i, (x, y) in enumerate(positions)
    ]
    return WorldScene(tuple(objects), n_frames)


def make_box(x, y, w=10.0, h=20.0, conf=0.9, camera_id="1", frame_idx=0, class_id=0) -> BBox:
    return BBox(x, y, w, h, conf, class_id, camera_id, frame_idx)
