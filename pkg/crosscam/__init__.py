"""crosscam-sim: collaborative cross-camera video-analytics simulator."""

__version__ = "0.3.0"
__author__ = "crosscam-sim contributors"
__description__ = (
    "Deterministic simulator for frame filtering, cross-camera box fusion "
    "and trust scoring on an edge server"
)
