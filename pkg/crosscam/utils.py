"""Utility functions for crosscam-sim."""

import hashlib
import os
from pathlib import Path
from typing import Iterable, List, Tuple, Union

from rich.console import Console
from rich.panel import Panel

from .exceptions import LogIOError, ParseError
from .logging_config import get_logger

console = Console()
logger = get_logger(__name__)


def camera_sort_key(camera_id: str) -> Tuple[int, Union[int, str]]:
    """Sort key putting numeric camera ids in numeric order before other ids."""
    text = str(camera_id)
    if text.isdigit():
        return (0, int(text))
    return (1, text)


def sorted_camera_ids(camera_ids: Iterable[str]) -> List[str]:
    """Return camera ids in canonical processing order."""
    return sorted(camera_ids, key=camera_sort_key)


def stable_hash(text: str) -> int:
    """64-bit hash of a string that is identical across processes."""
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def parse_subset(value: str) -> List[str]:
    """Parse a comma separated camera subset such as ``3,4``."""
    items = [item.strip() for item in value.split(",")]
    items = [item for item in items if item]
    if not items:
        raise ValueError("subset must name at least one camera")
    if len(set(items)) != len(items):
        raise ValueError(f"subset repeats a camera: {value}")
    return sorted_camera_ids(items)


def atomic_write_text(path: Path, text: str) -> None:
    """Write text to path through a temporary file and an atomic rename.

    Args:
        path: Destination file
        text: Full file content

    Raises:
        LogIOError: If the file cannot be written
    """
    path = Path(path)
    temp_file = path.with_name(path.name + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(temp_file, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        temp_file.replace(path)
    except OSError as e:
        try:
            if temp_file.exists():
                temp_file.unlink()
        except OSError:
            pass
        raise LogIOError(path, f"could not write file ({e})")
    logger.debug(f"Wrote {path}")


def read_utf8_text(path: Path, what: str = "file") -> str:
    """Read a UTF-8 text file.

    Raises:
        LogIOError: If the file cannot be read
        ParseError: If the bytes are not valid UTF-8 (line of the first bad byte)
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise LogIOError(path, f"could not read {what} ({e})")
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        line = data.count(b"\n", 0, e.start) + 1
        raise ParseError(line, f"{path} is not valid UTF-8 (byte {e.start})")


def display_error(message: str, suggestion: str = ""):
    """Display an error message with optional suggestion."""
    error_text = f"[red]Error:[/red] {message}"
    if suggestion:
        error_text += f"\n[yellow]Suggestion:[/yellow] {suggestion}"
    console.print(Panel(error_text, title="Error", border_style="red"))


def display_success(message: str):
    """Display a success message."""
    console.print(f"[green][✓][/green] {message}")


def display_info(message: str):
    """Display an info message."""
    console.print(f"[blue][INFO][/blue] {message}")


def display_warning(message: str):
    """Display a warning message."""
    console.print(f"[yellow][WARNING][/yellow] {message}")
