"""Stop flag, Ctrl-C handling, watchdog and the progress heartbeat."""

import io
import signal

import pytest

from esverify.logging import Log
from esverify.runtime import RunContext, install_interrupt_handler, start_watchdog


def test_first_interrupt_drains_second_aborts():
    ctx = RunContext()
    previous = install_interrupt_handler(ctx)
    try:
        handler = signal.getsignal(signal.SIGINT)
        handler(signal.SIGINT, None)
        assert ctx.stopped
        with pytest.raises(KeyboardInterrupt):
            handler(signal.SIGINT, None)
    finally:
        signal.signal(signal.SIGINT, previous)


def test_watchdog_disabled_without_timeout():
    assert start_watchdog(RunContext(), 0) is None


def test_watchdog_can_be_cancelled():
    timer = start_watchdog(RunContext(), 3600)
    assert timer is not None and timer.daemon
    timer.cancel()


def test_progress_is_throttled():
    ctx = RunContext(progress_interval=3600)
    out = io.StringIO()
    with Log.capture(out):
        ctx.progress(1, 10, 6, force=True)
        ctx.progress(2, 10, 12)
    lines = out.getvalue().splitlines()
    assert len(lines) == 1
    assert "k 1/10 (10.0%) checked=6" in lines[0]


def test_debug_lines_follow_the_flag():
    out = io.StringIO()
    with Log.capture(out):
        Log.d("hidden")
        Log.set_debug(True)
        try:
            Log.d("shown")
        finally:
            Log.set_debug(False)
    assert "hidden" not in out.getvalue()
    assert "shown" in out.getvalue()
