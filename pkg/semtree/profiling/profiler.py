"""
Wall-clock and RSS profiling for training runs.

Stages are named blocks (``fit``, ``epoch``, ``seed``); timings of the same name are
folded into one ``StageStats`` so a multi-seed run reports per-stage totals.
"""

from __future__ import annotations
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from threading import RLock
from typing import Any, Dict, Iterator, Optional

# Optional dependencies
try:
    import psutil
    HAS_PSUTIL = True
except ImportError:
    HAS_PSUTIL = False


@dataclass
class StageTiming:
    name: str
    metadata: Dict[str, Any] = field(default_factory=dict)
    seconds: float = 0.0
    rss_before: int = 0
    rss_after: int = 0

    @property
    def rss_delta(self) -> int:
        return self.rss_after - self.rss_before


@dataclass
class StageStats:
    calls: int = 0
    total_seconds: float = 0.0
    slowest_seconds: float = 0.0
    rss_delta: int = 0

    def add(self, timing: StageTiming) -> None:
        self.calls += 1
        self.total_seconds += timing.seconds
        self.slowest_seconds = max(self.slowest_seconds, timing.seconds)
        self.rss_delta += timing.rss_delta

    def to_dict(self) -> Dict[str, Any]:
        return {
            'calls': self.calls,
            'total_seconds': self.total_seconds,
            'mean_seconds': self.total_seconds / self.calls if self.calls else 0.0,
            'slowest_seconds': self.slowest_seconds,
            'rss_delta': self.rss_delta,
        }


class RunProfiler:
    """Per-stage timings, plus resident-set deltas when psutil is installed.

    Safe to share between the seed workers of one ``run_seeds`` call.
    """

    def __init__(self, enable_memory_tracking: bool = True):
        self._process = psutil.Process() if enable_memory_tracking and HAS_PSUTIL else None
        self._stages: Dict[str, StageStats] = {}
        self._lock = RLock()

    @property
    def tracks_memory(self) -> bool:
        return self._process is not None

    @contextmanager
    def profile_operation(self, name: str,
                          metadata: Optional[Dict[str, Any]] = None) -> Iterator[StageTiming]:
        timing = StageTiming(name, dict(metadata or {}), rss_before=self._rss())
        started = time.perf_counter()
        try:
            yield timing
        finally:
            timing.seconds = time.perf_counter() - started
            timing.rss_after = self._rss()
            with self._lock:
                self._stages.setdefault(name, StageStats()).add(timing)

    def get_summary(self) -> Dict[str, Dict[str, Any]]:
        with self._lock:
            return {name: stats.to_dict() for name, stats in sorted(self._stages.items())}

    def _rss(self) -> int:
        if self._process is None:
            return 0
        try:
            return self._process.memory_info().rss
        except psutil.Error:
            return 0
