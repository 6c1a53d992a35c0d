"""Report, trace and summary files written by the simulator."""

import csv
import io
import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .detsim import box_from_record, box_to_record
from .exceptions import LogIOError, ParseError, SchemaError
from .logging_config import get_logger
from .server import CompareRow, Message, RunReport, SweepRow
from .utils import atomic_write_text, read_utf8_text, sorted_camera_ids

logger = get_logger(__name__)


def report_stem(mode: str, subset: Optional[Sequence[str]] = None) -> str:
    """File stem for a run, e.g. ``collaborative`` or ``knowledge-sharing_3-4``."""
    if subset:
        return f"{mode}_{'-'.join(sorted_camera_ids(subset))}"
    return mode


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def dumps_report(report: RunReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def save_report(report: RunReport, out_dir: Path) -> Dict[str, Path]:
    """Write the JSON report and its per-frame and per-camera CSVs.

    Args:
        report: Finished run
        out_dir: Output directory, created when missing

    Returns:
        Mapping of file kind ("report", "frames", "cameras") to path
    """
    out_dir = Path(out_dir)
    stem = report_stem(report.mode, report.subset)
    paths = {
        "report": out_dir / f"{stem}.report.json",
        "frames": out_dir / f"{stem}.frames.csv",
        "cameras": out_dir / f"{stem}.cameras.csv",
    }

    atomic_write_text(paths["report"], dumps_report(report))
    atomic_write_text(
        paths["frames"],
        _csv_text(["frame_idx", "predicted", "ground_truth"], report.per_frame_counts),
    )
    camera_rows = [
        [
            camera_id,
            report.frames_total,
            report.frames_transmitted[camera_id],
            repr(report.per_camera_fraction[camera_id]),
        ]
        for camera_id in sorted_camera_ids(report.per_camera_fraction)
    ]
    atomic_write_text(
        paths["cameras"],
        _csv_text(["camera_id", "frames_total", "frames_transmitted", "fraction"], camera_rows),
    )
    logger.info(f"Report written to {paths['report']}")
    return paths


def load_report(path: Path) -> RunReport:
    """Read a report written by save_report.

    Raises:
        LogIOError: If the file cannot be read or is not a complete report
        ParseError: If the file is not UTF-8 JSON
    """
    path = Path(path)
    text = read_utf8_text(path, "report")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.lineno, f"invalid report JSON ({e.msg})")
    if not isinstance(data, dict):
        raise LogIOError(path, "report is not a JSON object")
    try:
        return RunReport.from_dict(data)
    except KeyError as e:
        raise LogIOError(path, f"report missing field {e}")
    except (TypeError, ValueError) as e:
        raise LogIOError(path, f"invalid report ({e})")


def dumps_trace(messages: Sequence[Message]) -> str:
    lines = []
    for message in sorted(messages, key=Message.sort_key):
        record = {
            "kind": message.kind,
            "camera_id": message.camera_id,
            "frame_idx": message.frame_idx,
            "boxes": [box_to_record(b) for b in message.boxes],
        }
        lines.append(json.dumps(record, sort_keys=True) + "\n")
    return "".join(lines)


def save_trace(messages: Sequence[Message], path: Path) -> None:
    """Write messages as newline-delimited JSON in processing order."""
    atomic_write_text(Path(path), dumps_trace(messages))
    logger.debug(f"Saved {len(messages)} messages to {path}")


def load_trace(path: Path) -> List[Message]:
    """Read a trace written by save_trace.

    Raises:
        LogIOError: If the file cannot be read
        ParseError: If the file is not UTF-8 or a line is not a JSON object
        SchemaError: If a record is incomplete or out of order
    """
    text = read_utf8_text(Path(path), "trace")

    messages: List[Message] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(line_no, f"invalid JSON ({e.msg})")
        if not isinstance(record, dict):
            raise ParseError(line_no, "record is not an object")
        frame_idx = record.get("frame_idx", f"on line {line_no}")
        for key in ("kind", "camera_id", "frame_idx", "boxes"):
            if key not in record:
                raise SchemaError(frame_idx, f"missing field '{key}'")
        camera_id = str(record["camera_id"])
        boxes = tuple(box_from_record(b, camera_id, frame_idx) for b in record["boxes"])
        message = Message(record["kind"], camera_id, frame_idx, boxes)
        if messages and Message.sort_key(message) < Message.sort_key(messages[-1]):
            raise SchemaError(frame_idx, "messages are not in processing order")
        messages.append(message)
    return messages


def save_sweep(rows: Sequence[SweepRow], path: Path) -> None:
    atomic_write_text(
        Path(path),
        _csv_text(
            ["subset_size", "mean_accuracy", "mean_fraction", "stddev"],
            [
                [r.subset_size, repr(r.mean_accuracy), repr(r.mean_fraction), repr(r.stddev)]
                for r in rows
            ],
        ),
    )


def save_comparison(rows: Sequence[CompareRow], path: Path) -> None:
    atomic_write_text(
        Path(path),
        _csv_text(
            ["mode", "mean_accuracy", "mean_fraction", "accuracy_stddev"],
            [[r.mode, repr(r.mean_accuracy), repr(r.mean_fraction), repr(r.stddev)] for r in rows],
        ),
    )
