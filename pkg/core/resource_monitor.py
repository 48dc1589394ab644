import os
from typing import Dict, Optional

import psutil

from .config_manager import config_manager
from .errors import ConfigError
from .logger import sop_logger


class ResourceMonitor:
    """Reports process memory and picks the worker count for simulations"""

    def __init__(self, max_memory_mb: int = 4096):
        self.max_memory_mb = max_memory_mb

    def get_memory_usage(self) -> Dict[str, float]:
        """Get current memory usage"""
        process = psutil.Process(os.getpid())
        memory_info = process.memory_info()

        return {
            'rss_mb': memory_info.rss / 1024 / 1024,
            'vms_mb': memory_info.vms / 1024 / 1024,
            'percent': process.memory_percent()
        }

    def under_pressure(self, memory: Optional[Dict[str, float]] = None) -> bool:
        memory = memory or self.get_memory_usage()
        return memory['rss_mb'] > self.max_memory_mb

    def default_workers(self) -> int:
        """Configured worker count, else the number of physical cores"""
        configured = config_manager.get('run.workers')
        if configured:
            return max(1, int(configured))
        return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1

    def resolve_workers(self, workers: Optional[int]) -> int:
        if workers is None:
            return self.default_workers()
        if workers < 1:
            raise ConfigError(f"Worker count must be at least 1, got {workers}")
        return int(workers)

    def log_snapshot(self, label: str):
        memory = self.get_memory_usage()
        sop_logger.debug(f"{label}: memory {memory['rss_mb']:.1f}MB ({memory['percent']:.1f}%)")
        if self.under_pressure(memory):
            sop_logger.warning(f"{label}: memory {memory['rss_mb']:.1f}MB above {self.max_memory_mb}MB")


# Global resource monitor
resource_monitor = ResourceMonitor()
