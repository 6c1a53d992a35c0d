"""Scenario configuration validation for crosscam-sim."""

from numbers import Real
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple

from rich.table import Table

from .exceptions import ConfigurationError
from .logging_config import get_logger
from .topology import SUPREME_MODES

logger = get_logger(__name__)


def _is_number(value: Any) -> bool:
    return isinstance(value, Real) and not isinstance(value, bool)


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


class ScenarioValidator:
    """Validate a scenario configuration dictionary.

    Every problem is recorded with the field path it concerns, e.g.
    ``cameras[2].noise.miss_prob``, so one pass reports all of them.
    """

    SECTIONS = {"scenario", "scene", "cameras", "filter", "fusion", "topology", "trust"}

    SECTION_KEYS = {
        "scenario": {"name", "n_frames", "fps", "seed"},
        "scene": {
            "n_objects",
            "walk_bounds",
            "max_speed",
            "min_separation",
            "pause_frames",
            "groups",
            "static_objects",
        },
        "filter": {"match_iou", "ttl"},
        "fusion": {"match_gate_iou", "boost_alpha", "nms_iou", "count_conf_threshold", "accrete"},
        "topology": {"overlap_threshold", "supreme_mode", "beta", "supreme"},
        "trust": {"enabled", "learning_rate", "initial_score", "min_trust", "adversarial"},
    }

    CAMERA_KEYS = {
        "camera_id",
        "image_w",
        "image_h",
        "world_quad",
        "world_to_image",
        "quality",
        "vertical_scale",
        "person_height_m",
        "noise",
        "degraded_windows",
        "adversarial",
        "detections_file",
    }

    NOISE_KEYS = {
        "miss_prob",
        "false_pos_rate",
        "center_jitter_std",
        "size_jitter_std",
        "conf_mean",
        "conf_std",
        "dup_rate",
        "dup_jitter",
    }

    GROUP_KEYS = {"center", "size", "radius"}
    STATIC_OBJECT_KEYS = {"object_id", "position", "enter_frame", "exit_frame"}
    WINDOW_KEYS = {"start_frame", "end_frame", "noise"}

    def __init__(self):
        """Initialize scenario validator."""
        self.errors: List[Tuple[str, str]] = []
        self.warnings: List[Tuple[str, str]] = []

    def _error(self, path: str, message: str) -> None:
        self.errors.append((path, message))

    def _warning(self, path: str, message: str) -> None:
        self.warnings.append((path, message))

    def validate(self, config: Dict) -> bool:
        """Validate a whole scenario configuration.

        Args:
            config: Parsed configuration (defaults already merged in)

        Returns:
            True if valid, False otherwise
        """
        self.errors = []
        self.warnings = []

        if not isinstance(config, dict):
            self._error("", "configuration must be a mapping")
            return False

        for key in sorted(set(config) - self.SECTIONS):
            self._error(key, "unknown section")

        for section, keys in self.SECTION_KEYS.items():
            self._check_mapping(config.get(section, {}), section, keys)

        self._validate_scenario(config.get("scenario", {}))
        self._validate_scene(config.get("scene", {}))
        camera_ids = self._validate_cameras(config.get("cameras"))
        self._validate_filter(config.get("filter", {}))
        self._validate_fusion(config.get("fusion", {}))
        self._validate_topology(config.get("topology", {}), camera_ids)
        self._validate_trust(config.get("trust", {}), camera_ids)

        return len(self.errors) == 0

    def raise_for_errors(self) -> None:
        """Raise the first recorded error, mentioning how many more there are."""
        if not self.errors:
            return
        path, message = self.errors[0]
        if len(self.errors) > 1:
            message += f" (and {len(self.errors) - 1} more problem(s))"
        raise ConfigurationError(message, path)

    def _check_mapping(self, value: Any, path: str, allowed: Set[str]) -> bool:
        if not isinstance(value, dict):
            self._error(path, "must be a mapping")
            return False
        for key in sorted(set(value) - allowed, key=str):
            self._error(f"{path}.{key}", "unknown key")
        return True

    def _number(
        self,
        section: Dict,
        key: str,
        path: str,
        low: Optional[float] = None,
        high: Optional[float] = None,
        low_open: bool = False,
        high_open: bool = False,
        integer: bool = False,
    ) -> None:
        if not isinstance(section, dict) or key not in section:
            return
        value = section[key]
        field = f"{path}.{key}"
        if integer and not _is_int(value):
            self._error(field, f"must be an integer, got {value!r}")
            return
        if not _is_number(value):
            self._error(field, f"must be a number, got {value!r}")
            return
        if low is not None and (value < low or (low_open and value == low)):
            bound = "greater than" if low_open else "at least"
            self._error(field, f"must be {bound} {low}, got {value}")
        if high is not None and (value > high or (high_open and value == high)):
            bound = "less than" if high_open else "at most"
            self._error(field, f"must be {bound} {high}, got {value}")

    def _boolean(self, section: Dict, key: str, path: str) -> None:
        if isinstance(section, dict) and key in section and not isinstance(section[key], bool):
            self._error(f"{path}.{key}", "must be a boolean (true/false)")

    def _point(self, value: Any, path: str) -> bool:
        if not isinstance(value, (list, tuple)) or len(value) != 2 or not all(
            _is_number(v) for v in value
        ):
            self._error(path, f"must be a pair of numbers, got {value!r}")
            return False
        return True

    def _validate_scenario(self, section: Dict):
        """Validate run length, frame rate and seed."""
        self._number(section, "n_frames", "scenario", low=1, integer=True)
        self._number(section, "fps", "scenario", low=0, low_open=True)
        self._number(section, "seed", "scenario", low=0, integer=True)
        if isinstance(section, dict) and "name" in section and not isinstance(section["name"], str):
            self._error("scenario.name", "must be a string")

    def _validate_scene(self, section: Dict):
        """Validate the crowd recipe."""
        if not isinstance(section, dict):
            return
        self._number(section, "n_objects", "scene", low=0, integer=True)
        self._number(section, "max_speed", "scene", low=0)
        self._number(section, "min_separation", "scene", low=0)

        bounds = section.get("walk_bounds")
        if bounds is not None:
            if not isinstance(bounds, (list, tuple)) or len(bounds) != 4 or not all(
                _is_number(v) for v in bounds
            ):
                self._error("scene.walk_bounds", "must be [x_min, y_min, x_max, y_max]")
            elif bounds[0] >= bounds[2] or bounds[1] >= bounds[3]:
                self._error("scene.walk_bounds", "must have x_min < x_max and y_min < y_max")

        pause = section.get("pause_frames")
        if pause is not None:
            if not isinstance(pause, (list, tuple)) or len(pause) != 2 or not all(
                _is_int(v) for v in pause
            ):
                self._error("scene.pause_frames", "must be [min, max] integers")
            elif not 0 <= pause[0] <= pause[1]:
                self._error("scene.pause_frames", "must satisfy 0 <= min <= max")

        groups = section.get("groups", [])
        if not isinstance(groups, list):
            self._error("scene.groups", "must be a list")
            groups = []
        for i, group in enumerate(groups):
            path = f"scene.groups[{i}]"
            if not self._check_mapping(group, path, self.GROUP_KEYS):
                continue
            for key in ("center", "size"):
                if key not in group:
                    self._error(f"{path}.{key}", "is required")
            if "center" in group:
                self._point(group["center"], f"{path}.center")
            self._number(group, "size", path, low=1, integer=True)
            self._number(group, "radius", path, low=0, low_open=True)

        statics = section.get("static_objects", [])
        if not isinstance(statics, list):
            self._error("scene.static_objects", "must be a list")
            statics = []
        seen: Set[str] = set()
        for i, obj in enumerate(statics):
            path = f"scene.static_objects[{i}]"
            if not self._check_mapping(obj, path, self.STATIC_OBJECT_KEYS):
                continue
            for key in ("object_id", "position"):
                if key not in obj:
                    self._error(f"{path}.{key}", "is required")
            if "object_id" in obj:
                object_id = str(obj["object_id"])
                if object_id in seen:
                    self._error(f"{path}.object_id", f"duplicate object_id '{object_id}'")
                seen.add(object_id)
            if "position" in obj:
                self._point(obj["position"], f"{path}.position")
            self._number(obj, "enter_frame", path, low=0, integer=True)
            if obj.get("exit_frame") is not None:
                self._number(obj, "exit_frame", path, low=0, integer=True)

        total = section.get("n_objects", 0)
        if _is_int(total) and isinstance(groups, list):
            grouped = sum(
                g["size"] for g in groups if isinstance(g, dict) and _is_int(g.get("size"))
            )
            if grouped > total:
                self._error(
                    "scene.groups",
                    f"group sizes add up to {grouped}, more than n_objects={total}",
                )

    def _validate_noise(self, noise: Any, path: str):
        if not self._check_mapping(noise, path, self.NOISE_KEYS):
            return
        self._number(noise, "miss_prob", path, low=0, high=1, high_open=True)
        self._number(noise, "false_pos_rate", path, low=0)
        self._number(noise, "center_jitter_std", path, low=0)
        self._number(noise, "size_jitter_std", path, low=0)
        self._number(noise, "conf_mean", path, low=0, high=1, low_open=True)
        self._number(noise, "conf_std", path, low=0)
        self._number(noise, "dup_rate", path, low=0)
        self._number(noise, "dup_jitter", path, low=0)

    def _validate_camera(self, camera: Dict, path: str):
        for key in ("camera_id", "image_w", "image_h"):
            if key not in camera:
                self._error(f"{path}.{key}", "is required")
        self._number(camera, "image_w", path, low=1, integer=True)
        self._number(camera, "image_h", path, low=1, integer=True)
        self._number(camera, "quality", path, low=0, high=1)
        self._number(camera, "vertical_scale", path, low=0, low_open=True)
        self._number(camera, "person_height_m", path, low=0, low_open=True)
        self._boolean(camera, "adversarial", path)

        has_quad = camera.get("world_quad") is not None
        has_matrix = camera.get("world_to_image") is not None
        if has_quad == has_matrix:
            self._error(path, "needs exactly one of world_quad or world_to_image")
        elif has_quad:
            quad = camera["world_quad"]
            if not isinstance(quad, list) or len(quad) != 4:
                self._error(f"{path}.world_quad", "must list four ground points (TL, TR, BR, BL)")
            else:
                for k, point in enumerate(quad):
                    self._point(point, f"{path}.world_quad[{k}]")
        else:
            matrix = camera["world_to_image"]
            if not isinstance(matrix, list) or len(matrix) != 3 or not all(
                isinstance(row, list) and len(row) == 3 and all(_is_number(v) for v in row)
                for row in matrix
            ):
                self._error(f"{path}.world_to_image", "must be a 3x3 list of numbers")

        if "noise" in camera:
            self._validate_noise(camera["noise"], f"{path}.noise")

        windows = camera.get("degraded_windows", [])
        if not isinstance(windows, list):
            self._error(f"{path}.degraded_windows", "must be a list")
            windows = []
        for k, window in enumerate(windows):
            wpath = f"{path}.degraded_windows[{k}]"
            if not self._check_mapping(window, wpath, self.WINDOW_KEYS):
                continue
            for key in ("start_frame", "end_frame"):
                if key not in window:
                    self._error(f"{wpath}.{key}", "is required")
            self._number(window, "start_frame", wpath, low=0, integer=True)
            self._number(window, "end_frame", wpath, low=0, integer=True)
            start, end = window.get("start_frame"), window.get("end_frame")
            if _is_int(start) and _is_int(end) and end < start:
                self._error(wpath, f"end_frame {end} precedes start_frame {start}")
            if "noise" in window:
                self._validate_noise(window["noise"], f"{wpath}.noise")

        detections = camera.get("detections_file")
        if detections is not None and not isinstance(detections, str):
            self._error(f"{path}.detections_file", "must be a path string")

    def _validate_cameras(self, cameras: Any) -> List[str]:
        """Validate the camera list and return the camera ids it declares."""
        if not isinstance(cameras, list) or not cameras:
            self._error("cameras", "must be a non-empty list")
            return []

        ids: List[str] = []
        for i, camera in enumerate(cameras):
            path = f"cameras[{i}]"
            if not self._check_mapping(camera, path, self.CAMERA_KEYS):
                continue
            self._validate_camera(camera, path)
            if "camera_id" in camera:
                camera_id = str(camera["camera_id"])
                if not camera_id.strip():
                    self._error(f"{path}.camera_id", "cannot be empty")
                elif camera_id in ids:
                    self._error(f"{path}.camera_id", f"duplicate camera_id '{camera_id}'")
                ids.append(camera_id)
        return ids

    def _validate_filter(self, section: Dict):
        self._number(section, "match_iou", "filter", low=0, high=1, low_open=True, high_open=True)
        if isinstance(section, dict) and section.get("ttl") is not None:
            self._number(section, "ttl", "filter", low=1, integer=True)

    def _validate_fusion(self, section: Dict):
        self._number(
            section, "match_gate_iou", "fusion", low=0, high=1, low_open=True, high_open=True
        )
        self._number(section, "boost_alpha", "fusion", low=0)
        self._number(section, "nms_iou", "fusion", low=0, high=1, low_open=True, high_open=True)
        self._number(section, "count_conf_threshold", "fusion", low=0, high=1)
        self._boolean(section, "accrete", "fusion")

    def _validate_topology(self, section: Dict, camera_ids: Sequence[str]):
        if not isinstance(section, dict):
            return
        self._number(section, "overlap_threshold", "topology", low=0, high=1, low_open=True)
        self._number(section, "beta", "topology", low=0, high=1)
        mode = section.get("supreme_mode")
        if mode is not None and mode not in SUPREME_MODES:
            self._error(
                "topology.supreme_mode", f"must be one of {list(SUPREME_MODES)}, got {mode!r}"
            )
        supreme = section.get("supreme")
        if supreme is not None and camera_ids and str(supreme) not in camera_ids:
            self._error("topology.supreme", f"unknown camera '{supreme}'")

    def _validate_trust(self, section: Dict, camera_ids: Sequence[str]):
        if not isinstance(section, dict):
            return
        self._boolean(section, "enabled", "trust")
        self._number(section, "learning_rate", "trust", low=0, high=1, low_open=True)
        self._number(section, "initial_score", "trust", low=0, high=1)
        self._number(section, "min_trust", "trust", low=0, high=1)

        adversarial = section.get("adversarial", [])
        if not isinstance(adversarial, list):
            self._error("trust.adversarial", "must be a list of camera ids")
            return
        for k, camera_id in enumerate(adversarial):
            if camera_ids and str(camera_id) not in camera_ids:
                self._error(f"trust.adversarial[{k}]", f"unknown camera '{camera_id}'")
        if adversarial and not section.get("enabled", False):
            self._warning(
                "trust.adversarial", "adversarial cameras listed but trust gating is disabled"
            )

    def errors_table(self) -> Table:
        table = Table(title="Configuration problems")
        table.add_column("Level", style="bold")
        table.add_column("Field", style="cyan")
        table.add_column("Problem")
        for path, message in self.errors:
            table.add_row("[red]error[/red]", path or "<root>", message)
        for path, message in self.warnings:
            table.add_row("[yellow]warning[/yellow]", path or "<root>", message)
        return table
