import psutil
import os
import time
from contextlib import contextmanager
from typing import Dict, Iterator
import logging


class MemoryMonitor:
    """Memory usage and stage timing monitor"""

    def __init__(self):
        self.logger = logging.getLogger('MemoryMonitor')
        self.process = psutil.Process(os.getpid())
        self.timings: Dict[str, float] = {}
        self.peak_rss = 0.0

    def get_memory_usage(self) -> Dict[str, float]:
        """Get current memory usage"""
        memory_info = self.process.memory_info()
        usage = {
            'rss': memory_info.rss / 1024 / 1024,  # RSS in MB
            'vms': memory_info.vms / 1024 / 1024,  # VMS in MB
            'percent': self.process.memory_percent()
        }
        self.peak_rss = max(self.peak_rss, usage['rss'])
        return usage

    def log_memory_usage(self, tag: str = ''):
        """Log current memory usage"""
        usage = self.get_memory_usage()
        self.logger.info(
            f"Memory usage {tag}: "
            f"RSS={usage['rss']:.1f}MB, "
            f"VMS={usage['vms']:.1f}MB, "
            f"Percent={usage['percent']:.1f}%"
        )

    @contextmanager
    def track(self, stage: str) -> Iterator[None]:
        """Record wall-clock time of a stage and log memory at its end"""
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            self.timings[stage] = self.timings.get(stage, 0.0) + elapsed
            self.log_memory_usage(f"after {stage} ({elapsed:.3f}s)")

    def summary(self) -> Dict[str, object]:
        """Timings and peak RSS for run manifests"""
        return {
            'timings_s': {stage: round(seconds, 6) for stage, seconds in self.timings.items()},
            'peak_rss_mb': round(self.peak_rss, 3)
        }
