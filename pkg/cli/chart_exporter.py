"""Chart output table `run,t,raw,smoothed,center,limit,alarm` and optional PNG rendering."""
import os
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from core.charts import ChartPoint
from core.logger import sop_logger

try:
    import matplotlib
    matplotlib.use('Agg')
    import matplotlib.pyplot as plt
    PLOT_AVAILABLE = True
except ImportError:
    PLOT_AVAILABLE = False

OUTPUT_COLUMNS = ['run', 't', 'raw', 'smoothed', 'center', 'limit', 'alarm']
MEAN_RUN = 0


class ChartExporter:
    """Turns monitored runs into the chart table; run 0 is the pointwise mean of noise runs"""

    def build_table(self, runs: Sequence[List[ChartPoint]], include_mean: bool = False) -> pd.DataFrame:
        rows = []
        if include_mean and runs:
            rows.extend(self._mean_rows(runs))
        for run, points in enumerate(runs, start=1):
            rows.extend((run, p.t, p.raw, p.smoothed, p.center, p.limit, p.alarm) for p in points)
        table = pd.DataFrame(rows, columns=OUTPUT_COLUMNS)
        table['alarm'] = table['alarm'].astype(int)
        return table

    def _mean_rows(self, runs: Sequence[List[ChartPoint]]):
        raw = np.array([[p.raw for p in points] for points in runs])
        smoothed = np.array([[p.smoothed for p in points] for points in runs])
        first = runs[0]
        raw_mean = raw.mean(axis=0)
        smoothed_mean = smoothed.mean(axis=0)
        for i, p in enumerate(first):
            alarm = abs(smoothed_mean[i] - p.center) > p.limit
            yield (MEAN_RUN, p.t, float(raw_mean[i]), float(smoothed_mean[i]), p.center, p.limit, alarm)

    def export_csv(self, table: pd.DataFrame, file_path: str) -> str:
        directory = os.path.dirname(file_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        table.to_csv(file_path, index=False, lineterminator='\n', encoding='utf-8')
        return file_path

    def export_plot(self, table: pd.DataFrame, file_path: str, title: Optional[str] = None) -> bool:
        """Grey curve per run, blue mean curve, dashed control limits"""
        if not PLOT_AVAILABLE:
            sop_logger.warning("matplotlib not installed; skipping plot")
            return False

        try:
            fig, ax = plt.subplots(figsize=(9, 4))
            runs = table[table['run'] != MEAN_RUN]
            single = runs['run'].nunique() == 1
            for _, curve in runs.groupby('run'):
                ax.plot(curve['t'], curve['smoothed'], color='tab:blue' if single else 'lightgray', linewidth=0.8)
            mean = table[table['run'] == MEAN_RUN]
            if not mean.empty:
                ax.plot(mean['t'], mean['smoothed'], color='tab:blue', linewidth=1.5, label='mean of runs')
                ax.legend(loc='upper right')

            reference = mean if not mean.empty else runs[runs['run'] == runs['run'].min()]
            ax.plot(reference['t'], reference['center'] + reference['limit'], 'r--', linewidth=1)
            ax.plot(reference['t'], reference['center'] - reference['limit'], 'r--', linewidth=1)
            ax.set_xlabel('t')
            ax.set_ylabel('smoothed statistic')
            if title:
                ax.set_title(title)
            fig.tight_layout()
            fig.savefig(file_path, dpi=120)
            plt.close(fig)
            return True
        except Exception as e:
            sop_logger.error(f"Error plotting chart: {e}")
            return False


# Global instance
chart_exporter = ChartExporter()
