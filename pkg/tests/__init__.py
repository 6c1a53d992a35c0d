"""Test package for crosscam-sim."""
