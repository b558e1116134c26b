"""Per-context operation counters.

Arithmetic and primitive calls report themselves here; nothing is recorded
unless a counter is active in the current context.
"""

from __future__ import annotations

import contextlib
import contextvars
from collections import Counter
from typing import Iterator

KINDS = ("E", "H", "M", "R", "C")

_active: contextvars.ContextVar[Counter | None] = contextvars.ContextVar(
    "smartcard_auth_counter", default=None
)


def tally(kind: str) -> None:
    counter = _active.get()
    if counter is not None:
        counter[kind] += 1


@contextlib.contextmanager
def counting() -> Iterator[Counter]:
    """Collect operation counts for the enclosed block.

    Nested blocks get their own counter; the outer one does not see them.
    """
    counter: Counter = Counter()
    token = _active.set(counter)
    try:
        yield counter
    finally:
        _active.reset(token)
