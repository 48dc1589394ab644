import os
import sqlite3
from dataclasses import dataclass
from datetime import datetime
from typing import Dict, List, Optional

from .config_manager import config_manager

TABLES = ('arl_runs', 'calibration_runs')


@dataclass
class ArlRecord:
    run_id: str
    timestamp: datetime
    chart: str
    dgp: str
    m: int
    n: int
    lam: float
    limit: float
    replications: int
    mean: float
    stderr: float
    cap_hits: int
    elapsed: float


@dataclass
class CalibrationRecord:
    run_id: str
    timestamp: datetime
    chart: str
    source: str
    target_arl: float
    limit: float
    achieved_arl: float
    stderr: float
    evaluations: int
    converged: bool
    discrete: bool
    elapsed: float


class ResultsStore:
    """SQLite history of ARL experiments and calibrations"""

    def __init__(self, db_path: Optional[str] = None):
        self.db_path = db_path or config_manager.get('store.path', 'data/results.db')
        self._initialized = False

    def use_path(self, db_path: str):
        if db_path != self.db_path:
            self.db_path = db_path
            self._initialized = False

    def _connect(self) -> sqlite3.Connection:
        if not self._initialized:
            self.init_database()
        return sqlite3.connect(self.db_path)

    def init_database(self):
        """Initialize results database"""
        directory = os.path.dirname(self.db_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        conn = sqlite3.connect(self.db_path)
        cursor = conn.cursor()

        cursor.execute('''
            CREATE TABLE IF NOT EXISTS arl_runs (
                run_id TEXT PRIMARY KEY,
                timestamp DATETIME,
                chart TEXT,
                dgp TEXT,
                m INTEGER,
                n INTEGER,
                lam REAL,
                control_limit REAL,
                replications INTEGER,
                mean REAL,
                stderr REAL,
                cap_hits INTEGER,
                elapsed REAL
            )
        ''')

        cursor.execute('''
            CREATE TABLE IF NOT EXISTS calibration_runs (
                run_id TEXT PRIMARY KEY,
                timestamp DATETIME,
                chart TEXT,
                source TEXT,
                target_arl REAL,
                control_limit REAL,
                achieved_arl REAL,
                stderr REAL,
                evaluations INTEGER,
                converged INTEGER,
                discrete INTEGER,
                elapsed REAL
            )
        ''')

        conn.commit()
        conn.close()
        self._initialized = True

    def log_arl(self, record: ArlRecord):
        conn = self._connect()
        conn.execute('''
            INSERT OR REPLACE INTO arl_runs VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
        ''', (
            record.run_id,
            record.timestamp.isoformat(),
            record.chart,
            record.dgp,
            record.m,
            record.n,
            record.lam,
            record.limit,
            record.replications,
            record.mean,
            record.stderr,
            record.cap_hits,
            record.elapsed
        ))
        conn.commit()
        conn.close()

    def log_calibration(self, record: CalibrationRecord):
        conn = self._connect()
        conn.execute('''
            INSERT OR REPLACE INTO calibration_runs VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
        ''', (
            record.run_id,
            record.timestamp.isoformat(),
            record.chart,
            record.source,
            record.target_arl,
            record.limit,
            record.achieved_arl,
            record.stderr,
            record.evaluations,
            int(record.converged),
            int(record.discrete),
            record.elapsed
        ))
        conn.commit()
        conn.close()

    def get_recent(self, table: str = 'arl_runs', limit: int = 10) -> List[Dict]:
        """Most recent rows of one table, newest first"""
        if table not in TABLES:
            raise ValueError(f"Unknown results table: {table}")
        conn = self._connect()
        conn.row_factory = sqlite3.Row
        rows = conn.execute(f'SELECT * FROM {table} ORDER BY timestamp DESC LIMIT ?', (limit,)).fetchall()
        conn.close()
        return [dict(row) for row in rows]

    def get_summary(self) -> Dict:
        conn = self._connect()
        cursor = conn.cursor()

        cursor.execute('SELECT COUNT(*), SUM(replications), SUM(cap_hits), SUM(elapsed) FROM arl_runs')
        arl = cursor.fetchone()

        cursor.execute('''
            SELECT COUNT(*), SUM(converged), SUM(discrete), AVG(evaluations)
            FROM calibration_runs
        ''')
        cal = cursor.fetchone()

        conn.close()

        return {
            'arl_runs': {
                'count': arl[0] or 0,
                'replications': arl[1] or 0,
                'cap_hits': arl[2] or 0,
                'elapsed_s': arl[3] or 0.0
            },
            'calibration_runs': {
                'count': cal[0] or 0,
                'converged': cal[1] or 0,
                'discrete': cal[2] or 0,
                'avg_evaluations': cal[3] or 0.0
            }
        }


# Global results store
results_store = ResultsStore()
