import logging
import threading
import time
from typing import Callable, Optional

logger = logging.getLogger(__name__)


class SweepProgress:
    """Handles throttled progress reports for a running sweep."""

    def __init__(self, label: str, sink: Optional[Callable[[str], None]] = None):
        self.label = label
        self.sink = sink or logger.info
        self.last_update_time = 0.0
        self.last_percentage = -1
        self.throttle_interval_seconds = 1.5
        self.percentage_throttle = 5  # Update every 5% change
        self._lock = threading.Lock()  # called from worker threads

    def update_progress(self, done: int, total: int) -> None:
        """Called once per finished schedule point; reports at most every 1.5 s / 5%."""
        if total <= 0:
            return
        current_time = time.time()
        percentage = max(0, min(100, int(done * 100 / total)))
        with self._lock:
            time_since_last = current_time - self.last_update_time
            percentage_diff = abs(percentage - self.last_percentage)
            should_update = (
                self.last_percentage == -1 or
                (time_since_last > self.throttle_interval_seconds and percentage_diff >= self.percentage_throttle) or
                (percentage == 100 and self.last_percentage != 100)
            )
            if not should_update:
                return
            self.last_update_time = current_time
            self.last_percentage = percentage
        try:
            self.sink(f"{self.label}: {done}/{total} points ({percentage}%)")
        except Exception as e:
            logger.error(f"Error reporting progress: {e}", exc_info=True)

    def __call__(self, done: int, total: int) -> None:
        self.update_progress(done, total)
