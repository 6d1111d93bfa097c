from .profiler import RunProfiler, StageTiming, StageStats, HAS_PSUTIL

__all__ = [
    "RunProfiler",
    "StageTiming",
    "StageStats",
    "HAS_PSUTIL",
]
