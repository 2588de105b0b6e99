"""Time-ordered opaque identifiers and injectable clocks.

Identifiers look like ``ses_01J9Z1234ABCDEFGHJKMNP`` — a short type prefix, a
millisecond timestamp encoded in Crockford base32, and a random tail. Within
one generator they are strictly increasing, so directory listings sort
chronologically. Both the clock and the RNG are injectable: seeded runs (the
headless simulator, golden-file tests) get byte-stable ids and timestamps.
"""
from __future__ import annotations

import random
import threading
from datetime import datetime, timedelta, timezone

_CROCKFORD = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"
_TS_CHARS = 10  # 50 bits of milliseconds, good past year 9000
_RAND_CHARS = 10


def _b32(value: int, width: int) -> str:
    chars = []
    for _ in range(width):
        chars.append(_CROCKFORD[value & 31])
        value >>= 5
    return "".join(reversed(chars))


class SystemClock:
    """Wall clock in UTC, truncated to millisecond precision."""

    def now(self) -> datetime:
        dt = datetime.now(timezone.utc)
        return dt.replace(microsecond=(dt.microsecond // 1000) * 1000)


class SteppingClock:
    """Deterministic clock that advances a fixed step on every read.

    Used by seeded runs so that stored timestamps are reproducible.
    """

    def __init__(self, start: datetime | None = None, step_ms: int = 1000):
        self._current = start or datetime(2025, 1, 1, tzinfo=timezone.utc)
        self._step = timedelta(milliseconds=step_ms)
        self._lock = threading.Lock()

    def now(self) -> datetime:
        with self._lock:
            current = self._current
            self._current = current + self._step
            return current


class IdGenerator:
    """Produces prefixed, lexicographically sortable ids.

    Thread-safe; ids from one generator are strictly increasing even when the
    clock stands still (a per-millisecond counter breaks ties).
    """

    def __init__(self, clock=None, rng: random.Random | None = None):
        self.clock = clock or SystemClock()
        self._rng = rng or random.Random()
        self._lock = threading.Lock()
        self._last_ms = -1
        self._counter = 0

    def new_id(self, prefix: str) -> str:
        with self._lock:
            ms = int(self.clock.now().timestamp() * 1000)
            if ms <= self._last_ms:
                ms = self._last_ms
                self._counter += 1
                if self._counter > 1023:  # borrow a millisecond, restart the counter
                    self._last_ms += 1
                    ms = self._last_ms
                    self._counter = 0
            else:
                self._last_ms = ms
                self._counter = 0
            tail = (self._counter << 40) | self._rng.getrandbits(40)
            return f"{prefix}_{_b32(ms, _TS_CHARS)}{_b32(tail, _RAND_CHARS)}"


def seeded_id_generator(seed: int, start: datetime | None = None) -> IdGenerator:
    """Generator whose ids and timestamps are a pure function of the seed."""
    return IdGenerator(clock=SteppingClock(start=start), rng=random.Random(seed))
