"""Time-sortable 128-bit clip identifiers.

Layout: 48-bit unix milliseconds + 16-bit per-process counter + 64 random
bits, rendered as 32 hex digits. Ids created later sort later, even across
process restarts, and generation is atomic under concurrency.
"""
import secrets
import threading
import time

_lock = threading.Lock()
_counter = 0
_last_ms = 0


def new_id() -> str:
    global _counter, _last_ms
    with _lock:
        ms = time.time_ns() // 1_000_000
        if ms <= _last_ms:
            ms = _last_ms
            _counter = (_counter + 1) & 0xFFFF
            if _counter == 0:
                ms += 1
        else:
            _counter = 0
        _last_ms = ms
        value = (ms & (1 << 48) - 1) << 80 | _counter << 64 | secrets.randbits(64)
    return f"{value:032x}"
