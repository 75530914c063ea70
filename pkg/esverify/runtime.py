"""Runtime coordination for verification runs: shared stop flag, progress
heartbeat, signal handling and the wall-clock watchdog.
"""

import os
import signal
import sys
import threading
import time
from dataclasses import dataclass, field

from esverify.logging import Log


@dataclass
class RunContext:
    progress_interval: float = 10.0
    stop_event: threading.Event = field(default_factory=threading.Event)
    progress_lock: threading.Lock = field(default_factory=threading.Lock)
    started: float = field(default_factory=time.monotonic)
    _last_progress: float = field(default=0.0, repr=False)

    def stop(self) -> None:
        self.stop_event.set()

    @property
    def stopped(self) -> bool:
        return self.stop_event.is_set()

    def elapsed(self) -> float:
        return time.monotonic() - self.started

    def progress(self, done_k: int, total_k: int, checked: int, force: bool = False) -> None:
        """Emit one heartbeat line, at most every `progress_interval` seconds."""
        now = time.monotonic()
        with self.progress_lock:
            if not force and now - self._last_progress < self.progress_interval:
                return
            self._last_progress = now
        elapsed = max(now - self.started, 1e-9)
        pct = 100.0 * done_k / total_k if total_k else 100.0
        Log.i(
            f"k {done_k}/{total_k} ({pct:.1f}%) checked={checked} "
            f"rate={checked / elapsed:,.0f}/s elapsed={elapsed:.0f}s"
        )


def install_interrupt_handler(ctx: RunContext):
    """First SIGINT asks the sieve to drain and checkpoint; a second one
    aborts immediately."""
    previous_handler = signal.getsignal(signal.SIGINT)

    def handle_interrupt(signum, frame):
        if ctx.stopped:
            raise KeyboardInterrupt
        Log.w("Interrupt received; finishing in-flight chunks (Ctrl-C again to abort).")
        ctx.stop()

    signal.signal(signal.SIGINT, handle_interrupt)
    return previous_handler


def start_watchdog(ctx: RunContext, timeout: float) -> threading.Timer | None:
    """Start a daemon timer that hard-exits the process when the wall-clock
    budget is exceeded. Returns the timer (cancel it in a finally block), or
    None when no timeout is configured.
    """
    if timeout <= 0:
        return None

    def _on_timeout() -> None:
        Log.e(f"Timeout of {timeout:.0f}s exceeded; exiting.")
        ctx.stop()
        sys.stdout.flush()
        sys.stderr.flush()
        # numpy kernels do not poll the stop flag
        os._exit(124)

    watchdog = threading.Timer(timeout, _on_timeout)
    watchdog.daemon = True
    watchdog.start()
    return watchdog
