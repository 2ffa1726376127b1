"""Write to a path or to an already open text stream."""

from __future__ import annotations

import os
from contextlib import contextmanager


@contextmanager
def open_for_write(target):
    """Open ``target`` for writing if it is a path; pass streams through unclosed."""
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w", newline="") as fh:
            yield fh
    else:
        yield target
