import logging
import os
import uuid
from datetime import datetime
from typing import Any, Dict, Optional

from .config_manager import config_manager


class SopLogger:
    def __init__(self, log_dir: Optional[str] = None, console_level: Optional[str] = None):
        self.log_dir = log_dir or config_manager.get('logging.dir', 'logs')
        level_name = (console_level or config_manager.get('logging.console_level', 'INFO')).upper()

        # Create logs directory
        os.makedirs(self.log_dir, exist_ok=True)

        self.logger = logging.getLogger('SOP_Monitor')
        self.logger.setLevel(logging.DEBUG)
        self.logger.propagate = False

        if not self.logger.handlers:
            log_file = os.path.join(self.log_dir, f"sop_monitor_{datetime.now().strftime('%Y%m%d')}.log")
            file_handler = logging.FileHandler(log_file, encoding='utf-8')
            file_handler.setLevel(logging.DEBUG)

            # console on stderr, stdout carries command output
            console_handler = logging.StreamHandler()
            console_handler.setLevel(getattr(logging, level_name, logging.INFO))

            formatter = logging.Formatter('%(asctime)s - %(levelname)s - %(message)s')
            file_handler.setFormatter(formatter)
            console_handler.setFormatter(formatter)

            self.logger.addHandler(file_handler)
            self.logger.addHandler(console_handler)

    def debug(self, msg):
        self.logger.debug(msg)

    def info(self, msg):
        self.logger.info(msg)

    def warning(self, msg):
        self.logger.warning(msg)

    def error(self, msg):
        self.logger.error(msg)

    def set_console_level(self, level_name: str):
        for handler in self.logger.handlers:
            if not isinstance(handler, logging.FileHandler):
                handler.setLevel(getattr(logging, level_name.upper(), logging.INFO))

    def metric(self, metric_name: str, value: Any, context: Dict = None):
        """Log a numeric result"""
        context_str = f" | Context: {context}" if context else ""
        self.info(f"METRIC: {metric_name} = {value}{context_str}")

    def log_run_start(self, command: str, params: Dict = None) -> str:
        """Start logging a command run and return its run_id"""
        run_id = str(uuid.uuid4())
        self.info(f"Run started: {run_id} - {command} {params or {}}")
        return run_id

    def log_arl_complete(self, run_id: str, chart: str, dgp: str, grid: tuple, lam: float,
                         limit: float, estimate, elapsed: float):
        """Log a finished ARL experiment and persist it"""
        from .results_store import ArlRecord, results_store

        record = ArlRecord(
            run_id=run_id,
            timestamp=datetime.now(),
            chart=chart,
            dgp=dgp,
            m=grid[0],
            n=grid[1],
            lam=lam,
            limit=limit,
            replications=estimate.replications,
            mean=estimate.mean,
            stderr=estimate.stderr,
            cap_hits=estimate.cap_hits,
            elapsed=elapsed
        )
        if config_manager.get('store.enabled', True):
            results_store.log_arl(record)
        self.info(f"ARL run completed: {run_id} - ARL {estimate.mean:.3f} (se {estimate.stderr:.3f}) in {elapsed:.2f}s")

    def log_calibration_complete(self, run_id: str, chart: str, source: str, target_arl: float,
                                 result, elapsed: float):
        """Log a finished limit calibration and persist it"""
        from .results_store import CalibrationRecord, results_store

        record = CalibrationRecord(
            run_id=run_id,
            timestamp=datetime.now(),
            chart=chart,
            source=source,
            target_arl=target_arl,
            limit=result.limit,
            achieved_arl=result.achieved_arl.mean,
            stderr=result.achieved_arl.stderr,
            evaluations=len(result.iterations),
            converged=result.converged,
            discrete=result.discrete,
            elapsed=elapsed
        )
        if config_manager.get('store.enabled', True):
            results_store.log_calibration(record)
        self.info(f"Calibration completed: {run_id} - limit {result.limit:.6g}, ARL {result.achieved_arl.mean:.2f}")


# Global logger instance
sop_logger = SopLogger()
