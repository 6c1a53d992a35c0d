"""Unit tests for the new-object frame filter."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crosscam.detsim import DetectionLog
from crosscam.exceptions import ScenarioError
from crosscam.frame_filter import (
    FilterParams,
    Track,
    Tracker,
    filter_stream,
    greedy_pairs,
    step_tracker,
)
from crosscam.geometry import BBox

from tests.helpers import make_box

# integer geometry keeps distinct boxes clear of IoU 1
pixels = st.integers(0, 100).map(float)
sides = st.integers(1, 40).map(float)
frame_boxes = st.lists(
    st.builds(BBox, pixels, pixels, sides, sides, st.floats(0.0, 1.0)),
    max_size=8,
)


def log_from_positions(frames, camera_id="1"):
    """One box per (x, y) in each frame."""
    return DetectionLog(
        camera_id,
        [
            [make_box(x, y, camera_id=camera_id, frame_idx=f) for x, y in positions]
            for f, positions in enumerate(frames)
        ],
    )


class TestFilterStream:
    """Test which frames a camera transmits."""

    def test_static_scene_sends_first_frame_only(self):
        """Test that nothing new appears after the first frame."""
        log = log_from_positions([[(0, 0), (50, 0), (100, 0)]] * 10)
        result = filter_stream(log, FilterParams())
        assert result.transmitted == {0}
        assert result.fraction == pytest.approx(0.1)
        assert result.new_object_events == [(0, 3)]
        assert result.new_boxes == {0: [0, 1, 2]}
        assert result.was_transmitted(0)
        assert not result.was_transmitted(1)

    def test_entering_object(self):
        """Test that an arrival flags its frame."""
        frames = [[(0, 0)]] * 5 + [[(0, 0), (200, 0)]] * 5
        result = filter_stream(log_from_positions(frames), FilterParams())
        assert result.transmitted == {0, 5}
        assert result.new_boxes[5] == [1]

    def test_slow_motion_continues_track(self):
        """Test that small per-frame moves stay on the same track."""
        frames = [[(float(f), 0.0)] for f in range(10)]
        result = filter_stream(log_from_positions(frames), FilterParams(match_iou=0.5))
        assert result.transmitted == {0}

    def test_jump_starts_new_track(self):
        """Test that a box with no overlap counts as a new object."""
        frames = [[(0.0, 0.0)], [(0.0, 0.0)], [(300.0, 0.0)]]
        result = filter_stream(log_from_positions(frames), FilterParams())
        assert result.transmitted == {0, 2}

    def test_track_expires_after_ttl(self):
        """Test that an object unseen for longer than ttl is new again."""
        frames = [[(0, 0)], [], [], [], [(0, 0)]]
        assert filter_stream(log_from_positions(frames), FilterParams(ttl=2)).transmitted == {0, 4}
        assert filter_stream(log_from_positions(frames), FilterParams(ttl=4)).transmitted == {0}
        assert filter_stream(log_from_positions(frames), FilterParams(ttl=None)).transmitted == {0}

    def test_empty_log(self):
        """Test that an empty log transmits nothing."""
        result = filter_stream(DetectionLog("1", []), FilterParams())
        assert result.fraction == 0.0
        assert result.n_frames == 0

    def test_empty_frames(self):
        """Test that frames without boxes are never sent."""
        result = filter_stream(log_from_positions([[]] * 4), FilterParams())
        assert result.transmitted == set()
        assert result.fraction == 0.0

    @settings(max_examples=100)
    @given(frame_boxes, frame_boxes, st.floats(0.05, 0.95))
    def test_exact_repeat_is_never_new(self, previous, current, match_iou):
        """Test that replaying a frame right after itself creates no track."""
        params = FilterParams(match_iou=match_iou)
        tracks, _ = step_tracker([], previous, params, 0)
        tracks, _ = step_tracker(tracks, current, params, 1)
        _, new_count = step_tracker(tracks, current, params, 2)
        assert new_count == 0

    def test_repeated_stream_sends_once(self):
        """Test that a stream of one frame repeated transmits only its first copy."""
        frame = [(0, 0), (5, 3), (120, 40), (123, 44)]
        result = filter_stream(log_from_positions([frame] * 8), FilterParams())
        assert result.transmitted == {0}


class TestTracker:
    """Test the tracker primitives."""

    def test_greedy_pairs_prefers_best_iou(self):
        """Test that the closest box wins the track."""
        tracks = [Track(0, make_box(0, 0), 0, 0)]
        boxes = [make_box(4, 0), make_box(1, 0)]
        assert greedy_pairs(tracks, boxes, 0.3) == [(0, 1)]

    def test_greedy_pairs_tie_goes_to_lower_track_id(self):
        """Test that equal IoU goes to the older track."""
        tracks = [Track(5, make_box(0, 0), 0, 0), Track(2, make_box(0, 0), 0, 0)]
        assert greedy_pairs(tracks, [make_box(0, 0)], 0.3) == [(1, 0)]

    def test_greedy_pairs_gate(self):
        """Test that pairs below the gate are not formed."""
        tracks = [Track(0, make_box(0, 0), 0, 0)]
        assert greedy_pairs(tracks, [make_box(9, 0)], 0.3) == []

    def test_step_tracker(self):
        """Test the functional single-step interface."""
        tracks, created = step_tracker([], [make_box(0, 0), make_box(50, 0)], FilterParams(), 0)
        assert created == 2
        assert [t.track_id for t in tracks] == [0, 1]
        tracks, created = step_tracker(tracks, [make_box(0, 0, frame_idx=1)], FilterParams(), 1)
        assert created == 0
        assert tracks[0].age == 2
        assert tracks[0].last_seen_frame == 1

    def test_touch_keeps_track_alive(self):
        """Test that touch refreshes overlapping tracks without creating any."""
        tracker = Tracker(FilterParams(ttl=1))
        tracker.step([make_box(0, 0)], 0)
        tracker.touch([make_box(0, 0, frame_idx=1), make_box(80, 0, frame_idx=1)], 1)
        assert len(tracker.tracks) == 1
        assert tracker.tracks[0].last_seen_frame == 1
        assert tracker.live_boxes(2) == [make_box(0, 0)]
        assert tracker.live_boxes(3) == []

    def test_track_invariant(self):
        """Test that a track cannot be seen before it was created."""
        with pytest.raises(ScenarioError):
            Track(0, make_box(0, 0), last_seen_frame=1, first_seen_frame=2)

    @pytest.mark.parametrize("match_iou", [0.0, 1.0, -0.2])
    def test_invalid_match_iou(self, match_iou):
        """Test that match_iou must lie strictly inside (0, 1)."""
        with pytest.raises(ScenarioError):
            FilterParams(match_iou=match_iou)

    def test_invalid_ttl(self):
        """Test that ttl must be at least one frame."""
        with pytest.raises(ScenarioError):
            FilterParams(ttl=0)
