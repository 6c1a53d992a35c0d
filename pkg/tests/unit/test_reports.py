"""Unit tests for report, trace and summary files."""

import csv
import json

import pytest

from crosscam.exceptions import LogIOError, ParseError, SchemaError
from crosscam.reports import (
    load_report,
    load_trace,
    report_stem,
    save_comparison,
    save_report,
    save_sweep,
    save_trace,
)
from crosscam.server import CompareRow, SweepRow, run_collaborative, run_knowledge_sharing


@pytest.fixture
def report(three_people, twin_cameras):
    return run_collaborative(three_people, twin_cameras, collect_trace=True)


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


class TestReportFiles:
    """Test the JSON report and its CSV companions."""

    def test_stem(self):
        assert report_stem("isolated") == "isolated"
        assert report_stem("knowledge-sharing", ["4", "3"]) == "knowledge-sharing_3-4"

    def test_save_report(self, temp_dir, report):
        """Test that all three files are written under the mode's stem."""
        paths = save_report(report, temp_dir / "out")
        assert paths["report"].name == "collaborative.report.json"
        assert paths["frames"].name == "collaborative.frames.csv"
        assert paths["cameras"].name == "collaborative.cameras.csv"
        assert all(p.exists() for p in paths.values())

    def test_report_json(self, temp_dir, report):
        paths = save_report(report, temp_dir)
        data = json.loads(paths["report"].read_text())
        assert data["mode"] == "collaborative"
        assert data["accuracy"] == 1.0
        assert data["per_camera_fraction"] == {"1": 0.1, "2": 0.0}
        assert data["params"]["fusion"]["nms_iou"] == 0.5

    def test_frames_csv(self, temp_dir, report):
        rows = read_csv(save_report(report, temp_dir)["frames"])
        assert rows[0] == ["frame_idx", "predicted", "ground_truth"]
        assert rows[1] == ["0", "3", "3"]
        assert len(rows) == 11

    def test_cameras_csv(self, temp_dir, report):
        rows = read_csv(save_report(report, temp_dir)["cameras"])
        assert rows == [
            ["camera_id", "frames_total", "frames_transmitted", "fraction"],
            ["1", "10", "1", "0.1"],
            ["2", "10", "0", "0.0"],
        ]

    def test_load_report(self, temp_dir, report):
        paths = save_report(report, temp_dir)
        assert load_report(paths["report"]) == report

    def test_knowledge_sharing_stem(self, temp_dir, three_people, twin_cameras):
        ks = run_knowledge_sharing(three_people, twin_cameras, ["2", "1"])
        assert save_report(ks, temp_dir)["report"].name == "knowledge-sharing_1-2.report.json"

    def test_load_missing_report(self, temp_dir):
        with pytest.raises(LogIOError):
            load_report(temp_dir / "absent.json")

    def test_load_corrupt_report(self, temp_dir):
        path = temp_dir / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ParseError):
            load_report(path)

    def test_load_report_bad_bytes(self, temp_dir):
        """Test that a report with undecodable bytes is a parse error."""
        path = temp_dir / "bytes.json"
        path.write_bytes(b'{"mode":\n"\xff"}\n')
        with pytest.raises(ParseError) as exc_info:
            load_report(path)
        assert exc_info.value.line == 2

    @pytest.mark.parametrize("text", ["[1, 2]", '{"mode": "isolated"}'])
    def test_load_incomplete_report(self, temp_dir, text):
        """Test that JSON which is not a full report is rejected."""
        path = temp_dir / "partial.json"
        path.write_text(text)
        with pytest.raises(LogIOError):
            load_report(path)


class TestTraceFiles:
    """Test message traces."""

    def test_save_and_load(self, temp_dir, report):
        path = temp_dir / "collaborative.trace.jsonl"
        save_trace(report.trace, path)
        assert load_trace(path) == report.trace

    def test_record_fields(self, temp_dir, report):
        path = temp_dir / "t.jsonl"
        save_trace(report.trace, path)
        record = json.loads(path.read_text().splitlines()[0])
        assert record["kind"] == "FrameUpload"
        assert record["camera_id"] == "1"
        assert len(record["boxes"]) == 3

    def test_out_of_order(self, temp_dir):
        """Test that a trace must be in processing order."""
        path = temp_dir / "t.jsonl"
        path.write_text(
            '{"kind": "StateShare", "camera_id": "1", "frame_idx": 3, "boxes": []}\n'
            '{"kind": "StateShare", "camera_id": "1", "frame_idx": 2, "boxes": []}\n'
        )
        with pytest.raises(SchemaError):
            load_trace(path)

    def test_missing_field(self, temp_dir):
        path = temp_dir / "t.jsonl"
        path.write_text('{"kind": "StateShare", "frame_idx": 0, "boxes": []}\n')
        with pytest.raises(SchemaError):
            load_trace(path)

    def test_bad_json(self, temp_dir):
        path = temp_dir / "t.jsonl"
        path.write_text("[1, 2]\n")
        with pytest.raises(ParseError):
            load_trace(path)

    def test_bad_bytes(self, temp_dir):
        """Test that undecodable bytes in a trace are a parse error."""
        path = temp_dir / "t.jsonl"
        record = b'{"kind": "StateShare", "camera_id": "1", "frame_idx": 0, "boxes": []}'
        path.write_bytes(record + b"\n\xff\n")
        with pytest.raises(ParseError) as exc_info:
            load_trace(path)
        assert exc_info.value.line == 2


class TestSummaries:
    """Test sweep and comparison CSVs."""

    def test_sweep_csv(self, temp_dir):
        path = temp_dir / "sweep.csv"
        save_sweep([SweepRow(1, 0.5, 0.25, 0.1), SweepRow(2, 0.75, 0.2, 0.05)], path)
        rows = read_csv(path)
        assert rows[0] == ["subset_size", "mean_accuracy", "mean_fraction", "stddev"]
        assert rows[2] == ["2", "0.75", "0.2", "0.05"]

    def test_comparison_csv(self, temp_dir):
        path = temp_dir / "compare.csv"
        save_comparison([CompareRow("isolated", 0.9, 0.1, 0.01)], path)
        assert read_csv(path) == [
            ["mode", "mean_accuracy", "mean_fraction", "accuracy_stddev"],
            ["isolated", "0.9", "0.1", "0.01"],
        ]
