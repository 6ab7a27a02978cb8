"""Utilities for use throughout the package."""

from contextlib import contextmanager
from pathlib import Path
import time
from typing import Iterator, List, Sequence, Tuple, TypeVar, Union

T = TypeVar("T")


def cyclic_pairs(items: Sequence[T]) -> List[Tuple[T, T]]:
    """Consecutive pairs of a closed sequence, last wrapping to first."""
    count = len(items)
    return [(items[i], items[(i + 1) % count]) for i in range(count)]


def edge_key(a: int, b: int) -> Tuple[int, int]:
    """Undirected edge key with the smaller vertex first."""
    return (a, b) if a < b else (b, a)


def generate_filename_and_mkdir(filename: Union[str, Path]) -> Tuple[Path, str]:
    """Creates the parent directory of a filename, and returns the
    path along with its lower case suffix (without the dot)."""
    filename = Path(filename)
    filetype = filename.suffix.strip(".").lower()
    filename.parent.mkdir(parents=True, exist_ok=True)
    return filename, filetype


@contextmanager
def stopwatch() -> Iterator[List[float]]:
    """Times the enclosed block. The yielded list receives the elapsed
    milliseconds once the block exits."""
    elapsed: List[float] = []
    start = time.perf_counter()
    try:
        yield elapsed
    finally:
        elapsed.append((time.perf_counter() - start) * 1000.0)
