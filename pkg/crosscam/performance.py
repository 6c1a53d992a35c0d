"""Parallel execution helpers for crosscam-sim."""

from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Callable, List, Optional, Sequence, Tuple

from rich.console import Console
from rich.progress import BarColumn, Progress, TextColumn, TimeElapsedColumn

from .logging_config import get_logger

console = Console(stderr=True)
logger = get_logger(__name__)


def _progress() -> Progress:
    return Progress(
        TextColumn("[bold blue]{task.description}"),
        BarColumn(),
        TextColumn("{task.completed}/{task.total}"),
        TimeElapsedColumn(),
        console=console,
        transient=True,
    )


def ordered_map(
    func: Callable[[Any], Any],
    items: Sequence[Any],
    max_workers: int = 1,
    description: Optional[str] = None,
    show_progress: bool = False,
) -> List[Any]:
    """Apply func to every item, possibly on a thread pool.

    Results come back in input order whatever the scheduling, and the
    first failure is re-raised after the pool has drained.

    Args:
        func: Function applied to each item
        items: Items to process
        max_workers: Thread count; 1 runs inline
        description: Progress bar label
        show_progress: Whether to draw a progress bar

    Returns:
        List of results aligned with items
    """
    results: List[Any] = [None] * len(items)
    label = description or "Working"

    if max_workers <= 1 or len(items) <= 1:
        if not show_progress:
            return [func(item) for item in items]
        with _progress() as progress:
            task = progress.add_task(label, total=len(items))
            for i, item in enumerate(items):
                results[i] = func(item)
                progress.advance(task)
        return results

    errors: List[Tuple[int, BaseException]] = []
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {executor.submit(func, item): i for i, item in enumerate(items)}
        progress = _progress() if show_progress else None
        task = progress.add_task(label, total=len(items)) if progress else None
        if progress:
            progress.start()
        try:
            for future in as_completed(futures):
                i = futures[future]
                try:
                    results[i] = future.result()
                except Exception as e:
                    logger.debug(f"{label}: item {i} failed: {e}")
                    errors.append((i, e))
                if progress:
                    progress.advance(task)
        finally:
            if progress:
                progress.stop()

    if errors:
        raise min(errors, key=lambda pair: pair[0])[1]
    return results
