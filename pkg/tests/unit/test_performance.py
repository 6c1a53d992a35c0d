"""Unit tests for ordered parallel execution."""

import threading
import time

import pytest

from crosscam.performance import ordered_map


def slow_square(x):
    # later items finish first
    time.sleep(0.002 * (5 - x))
    return x * x


class TestOrderedMap:
    """Test ordered_map."""

    @pytest.mark.parametrize("workers", [1, 2, 4])
    def test_results_in_input_order(self, workers):
        assert ordered_map(slow_square, list(range(5)), max_workers=workers) == [
            0,
            1,
            4,
            9,
            16,
        ]

    def test_empty(self):
        assert ordered_map(slow_square, [], max_workers=3) == []

    def test_progress_bar(self):
        assert ordered_map(slow_square, [1, 2], show_progress=True) == [1, 4]
        assert ordered_map(slow_square, [1, 2], 2, "Squares", show_progress=True) == [1, 4]

    def test_uses_threads(self):
        """Test that more than one worker thread runs items."""
        seen = set()
        barrier = threading.Barrier(2, timeout=5)

        def record(x):
            seen.add(threading.get_ident())
            barrier.wait()
            return x

        assert ordered_map(record, [1, 2], max_workers=2) == [1, 2]
        assert len(seen) == 2

    def test_first_failure_is_raised(self):
        """Test that the earliest failing item wins, whatever finishes first."""

        def fail_some(x):
            time.sleep(0.002 * (5 - x))
            if x in (1, 3):
                raise ValueError(f"item {x}")
            return x

        with pytest.raises(ValueError, match="item 1"):
            ordered_map(fail_some, list(range(5)), max_workers=4)

    def test_inline_failure(self):
        def fail(x):
            raise KeyError(x)

        with pytest.raises(KeyError):
            ordered_map(fail, [1, 2])
