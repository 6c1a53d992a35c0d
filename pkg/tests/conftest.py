"""Test configuration and fixtures for crosscam-sim tests."""

import logging
import tempfile
from pathlib import Path

import pytest
import yaml
from click.testing import CliRunner

from crosscam.detsim import NoiseModel
from crosscam.logging_config import ROOT_LOGGER

from .helpers import IMAGE_H, IMAGE_W, PX_PER_M, make_camera, static_scene


@pytest.fixture(autouse=True)
def reset_logging():
    """Keep handlers added by one test from leaking into the next."""
    yield
    logger = logging.getLogger(ROOT_LOGGER)
    for handler in logger.handlers[:]:
        handler.close()
        logger.removeHandler(handler)
    logger.setLevel(logging.NOTSET)
    logger.propagate = True


@pytest.fixture
def cli_runner():
    """Provide a CLI runner for testing click commands."""
    return CliRunner()


@pytest.fixture
def temp_dir():
    """Provide a temporary directory for tests."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def twin_cameras():
    """Two cameras with identical views; camera 1 has the better sensor."""
    return [make_camera("1", quality=0.9), make_camera("2", quality=0.5)]


@pytest.fixture
def three_people():
    """Three people on the left half of the room, ten frames."""
    return static_scene([(2.0, 2.0), (3.0, 5.0), (2.5, 6.5)], n_frames=10)


@pytest.fixture
def noisy_model():
    return NoiseModel(
        miss_prob=0.2,
        false_pos_rate=0.5,
        center_jitter_std=3.0,
        size_jitter_std=2.0,
        conf_mean=0.7,
        conf_std=0.1,
        dup_rate=0.5,
    )


@pytest.fixture
def scenario_dict():
    """Minimal two-camera scenario configuration."""
    return {
        "scenario": {"name": "tiny", "n_frames": 12, "fps": 10.0, "seed": 3},
        "scene": {
            "n_objects": 3,
            "walk_bounds": [1.0, 1.0, 9.0, 7.0],
            "max_speed": 0.0,
            "min_separation": 0.8,
            "groups": [{"center": [3.0, 3.0], "size": 3, "radius": 0.8}],
        },
        "cameras": [
            {
                "camera_id": "1",
                "image_w": IMAGE_W,
                "image_h": IMAGE_H,
                "world_to_image": [[PX_PER_M, 0.0, 0.0], [0.0, PX_PER_M, 0.0], [0.0, 0.0, 1.0]],
                "quality": 0.9,
            },
            {
                "camera_id": "2",
                "image_w": IMAGE_W,
                "image_h": IMAGE_H,
                "world_quad": [[0.0, 0.0], [10.0, 0.0], [10.0, 8.0], [0.0, 8.0]],
                "quality": 0.5,
            },
        ],
    }


@pytest.fixture
def scenario_file(temp_dir, scenario_dict):
    """Write scenario_dict to a YAML file."""
    path = temp_dir / "scenario.yml"
    path.write_text(yaml.safe_dump(scenario_dict), encoding="utf-8")
    return path
