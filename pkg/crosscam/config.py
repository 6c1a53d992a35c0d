"""Scenario configuration management for crosscam-sim."""

import copy
import os
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from .detsim import DegradedWindow, GroupSpec, NoiseModel, SceneSpec, StaticObject
from .exceptions import ConfigurationError, CrossCamError
from .frame_filter import FilterParams
from .fusion import FusionParams
from .geometry import Homography, homography_from_points
from .logging_config import get_logger
from .server import Scenario, ServerParams
from .topology import STATIC_SCORE, CameraConfig, TopologyParams
from .trust import TrustParams
from .validation import ScenarioValidator

logger = get_logger(__name__)

ENV_PREFIX = "CROSSCAM_"
DEFAULT_PRESET = "salsa-like"


class ScenarioConfig:
    """Scenario configuration: YAML file values merged over defaults."""

    DEFAULT_CONFIG = {
        "scenario": {
            "name": "scenario",
            "n_frames": 200,
            "fps": 10.0,
            "seed": 0,
        },
        "scene": {
            "n_objects": 0,
            "walk_bounds": [0.0, 0.0, 10.0, 8.0],
            "max_speed": 0.1,  # meters per frame
            "min_separation": 0.8,
            "pause_frames": [20, 80],
            "groups": [],
            "static_objects": [],
        },
        "cameras": [],
        "filter": {"match_iou": 0.3, "ttl": 15},
        "fusion": {
            "match_gate_iou": 0.2,
            "boost_alpha": 0.25,
            "nms_iou": 0.5,
            "count_conf_threshold": 0.5,
            "accrete": False,
        },
        "topology": {
            "overlap_threshold": 0.3,
            "supreme_mode": STATIC_SCORE,
            "beta": 0.5,
            "supreme": None,
        },
        "trust": {
            "enabled": False,
            "learning_rate": 0.1,
            "initial_score": 0.5,
            "min_trust": 0.4,
            "adversarial": [],
        },
    }

    def __init__(self, config_file: Optional[Path] = None, data: Optional[Dict] = None):
        """Initialize scenario configuration.

        Args:
            config_file: YAML scenario file
            data: Already parsed values, merged after the file
        """
        self.config_file = Path(config_file) if config_file is not None else None
        self._config = copy.deepcopy(self.DEFAULT_CONFIG)
        if self.config_file is not None:
            self._load_config()
        if data:
            self._merge_config(self._config, copy.deepcopy(data))

    def _load_config(self):
        """Load configuration from file."""
        if not self.config_file.exists():
            raise ConfigurationError(f"Config file not found: {self.config_file}")

        try:
            with open(self.config_file, "r", encoding="utf-8") as f:
                file_config = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Invalid YAML in config file: {e}")
        except UnicodeDecodeError as e:
            raise ConfigurationError(f"Config file is not valid UTF-8: {e}")
        except OSError as e:
            raise ConfigurationError(f"Failed to load config file: {e}")

        if not isinstance(file_config, dict):
            raise ConfigurationError("Config file must hold a mapping of sections")
        self._merge_config(self._config, file_config)
        logger.info(f"Configuration loaded from: {self.config_file}")

    def _merge_config(self, base: Dict, update: Dict) -> None:
        """Recursively merge configuration dictionaries."""
        for key, value in update.items():
            if key in base and isinstance(base[key], dict) and isinstance(value, dict):
                self._merge_config(base[key], value)
            else:
                base[key] = value

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value using dot notation (e.g., 'fusion.nms_iou')."""
        keys = key.split(".")
        value = self._config

        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default

        # Check for environment variable override
        env_key = f"{ENV_PREFIX}{key.upper().replace('.', '_')}"
        env_value = os.environ.get(env_key)

        if env_value is not None:
            if isinstance(value, bool):
                return env_value.lower() in ("true", "1", "yes", "on")
            elif isinstance(value, int):
                try:
                    return int(env_value)
                except ValueError:
                    logger.warning(f"Invalid integer value for {env_key}: {env_value}")
            elif isinstance(value, float):
                try:
                    return float(env_value)
                except ValueError:
                    logger.warning(f"Invalid float value for {env_key}: {env_value}")
            elif isinstance(value, (dict, list)):
                logger.warning(f"Ignoring {env_key}: only scalar settings can be overridden")
            else:
                return env_value

        return value

    def set(self, key: str, value: Any) -> None:
        """Set configuration value using dot notation."""
        keys = key.split(".")
        config = self._config

        for k in keys[:-1]:
            if k not in config or not isinstance(config[k], dict):
                config[k] = {}
            config = config[k]

        config[keys[-1]] = value
        logger.debug(f"Config updated: {key} = {value}")

    def section(self, name: str) -> Dict:
        """A section with environment overrides applied to its scalar keys."""
        raw = self._config.get(name, {})
        if not isinstance(raw, dict):
            return raw
        return {key: self.get(f"{name}.{key}") for key in raw}

    def to_dict(self) -> Dict:
        """Effective configuration, environment overrides included."""
        effective = copy.deepcopy(self._config)
        for name, raw in self._config.items():
            if isinstance(raw, dict):
                effective[name] = self.section(name)
        return effective

    def save(self, path: Optional[Path] = None) -> Path:
        """Save current configuration to file."""
        target = Path(path) if path is not None else self.config_file
        if target is None:
            raise ConfigurationError("No file to save the configuration to")
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            with open(target, "w", encoding="utf-8") as f:
                yaml.safe_dump(self.to_dict(), f, default_flow_style=False, sort_keys=False)
            logger.info(f"Configuration saved to: {target}")
        except OSError as e:
            raise ConfigurationError(f"Failed to save config file: {e}")
        return target

    def validate(self) -> ScenarioValidator:
        """Validate the effective configuration, raising on the first error.

        Raises:
            ConfigurationError: With the offending field path
        """
        validator = ScenarioValidator()
        validator.validate(self.to_dict())
        for path, message in validator.warnings:
            logger.warning(f"{path}: {message}")
        validator.raise_for_errors()
        return validator


def preset_path(name: str) -> Path:
    """Locate a bundled preset such as ``salsa-like``."""
    filename = f"{name.replace('-', '_')}.yml"
    possible_paths = [
        Path(__file__).parent / "data" / filename,  # Installed package
        Path(__file__).parent.parent / "crosscam" / "data" / filename,  # Development
    ]
    for path in possible_paths:
        if path.exists():
            return path
    raise ConfigurationError(
        f"Unknown preset '{name}'. Available presets: {', '.join(list_presets()) or 'none'}"
    )


def list_presets() -> List[str]:
    data_dir = Path(__file__).parent / "data"
    if not data_dir.exists():
        return []
    return sorted(p.stem.replace("_", "-") for p in data_dir.glob("*.yml"))


def load_config(
    config_file: Optional[Path] = None, preset: Optional[str] = None
) -> ScenarioConfig:
    """Load a scenario file, or a bundled preset when no file is given."""
    if config_file is not None and preset is not None:
        raise ConfigurationError("Use either a config file or a preset, not both")
    if config_file is None:
        config_file = preset_path(preset or DEFAULT_PRESET)
    return ScenarioConfig(config_file)


def _camera_view(camera: Dict) -> Homography:
    if camera.get("world_to_image") is not None:
        return Homography.from_matrix(camera["world_to_image"])
    w, h = float(camera["image_w"]), float(camera["image_h"])
    world = [(float(x), float(y)) for x, y in camera["world_quad"]]
    image = [(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)]
    return homography_from_points(world, image)


def _noise(values: Optional[Dict]) -> NoiseModel:
    return NoiseModel(**(values or {}))


def _build_camera(
    camera: Dict, path: str, adversarial_ids: List[str], base_dir: Optional[Path]
) -> CameraConfig:
    camera_id = str(camera["camera_id"])
    try:
        windows = tuple(
            DegradedWindow(int(w["start_frame"]), int(w["end_frame"]), _noise(w.get("noise")))
            for w in camera.get("degraded_windows", [])
        )
        detections = camera.get("detections_file")
        if detections is not None:
            detections = Path(detections)
            if not detections.is_absolute() and base_dir is not None:
                detections = base_dir / detections
        return CameraConfig(
            camera_id=camera_id,
            image_w=int(camera["image_w"]),
            image_h=int(camera["image_h"]),
            world_to_image=_camera_view(camera),
            quality=float(camera.get("quality", 0.5)),
            noise=_noise(camera.get("noise")),
            vertical_scale=float(camera.get("vertical_scale", 1.0)),
            person_height_m=float(camera.get("person_height_m", 1.7)),
            degraded_windows=windows,
            adversarial=bool(camera.get("adversarial", False)) or camera_id in adversarial_ids,
            detections_file=detections,
        )
    except CrossCamError as e:
        raise ConfigurationError(str(e), path)


def build_scenario(config: ScenarioConfig) -> Scenario:
    """Turn a validated configuration into typed domain objects.

    Raises:
        ConfigurationError: If the configuration is invalid
    """
    config.validate()
    values = config.to_dict()
    scenario, scene = values["scenario"], values["scene"]
    trust = values["trust"]
    adversarial_ids = [str(c) for c in trust.get("adversarial", [])]
    base_dir = config.config_file.parent if config.config_file is not None else None

    cameras = [
        _build_camera(camera, f"cameras[{i}]", adversarial_ids, base_dir)
        for i, camera in enumerate(values["cameras"])
    ]

    try:
        scene_spec = SceneSpec(
            n_objects=int(scene["n_objects"]),
            walk_bounds=tuple(float(v) for v in scene["walk_bounds"]),
            groups=tuple(
                GroupSpec(tuple(g["center"]), int(g["size"]), float(g.get("radius", 0.8)))
                for g in scene.get("groups", [])
            ),
            max_speed=float(scene["max_speed"]),
            min_separation=float(scene["min_separation"]),
            pause_frames=tuple(int(v) for v in scene["pause_frames"]),
            static_objects=tuple(
                StaticObject(
                    str(s["object_id"]),
                    tuple(s["position"]),
                    int(s.get("enter_frame", 0)),
                    s.get("exit_frame"),
                )
                for s in scene.get("static_objects", [])
            ),
        )
    except CrossCamError as e:
        raise ConfigurationError(str(e), "scene")

    topology = values["topology"]
    try:
        params = ServerParams(
            filter=FilterParams(**values["filter"]),
            fusion=FusionParams(**values["fusion"]),
            topology=TopologyParams(
                overlap_threshold=float(topology["overlap_threshold"]),
                supreme_mode=topology["supreme_mode"],
                beta=float(topology["beta"]),
                supreme=None if topology.get("supreme") is None else str(topology["supreme"]),
            ),
            trust=TrustParams(
                enabled=bool(trust["enabled"]),
                learning_rate=float(trust["learning_rate"]),
                initial_score=float(trust["initial_score"]),
                min_trust=float(trust["min_trust"]),
            ),
        )
        return Scenario(
            cameras=tuple(cameras),
            params=params,
            scene_spec=scene_spec,
            n_frames=int(scenario["n_frames"]),
            fps=float(scenario["fps"]),
            seed=int(scenario["seed"]),
            name=str(scenario["name"]),
        )
    except CrossCamError as e:
        raise ConfigurationError(str(e))
