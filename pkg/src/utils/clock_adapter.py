import time


class SystemClock:
    """Integer timestamps for stored rows."""

    def now(self) -> int:
        return int(time.time())


class FixedClock:
    def __init__(self, start: int = 0):
        self._now = start

    def now(self) -> int:
        return self._now

    def tick(self, seconds: int = 1) -> int:
        self._now += seconds
        return self._now
