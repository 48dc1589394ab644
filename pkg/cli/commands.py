"""Subcommand runners shared by main.py and the tests."""
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Union

import numpy as np

from core.calibration import (ArlEstimate, BootstrapPool, CalibrationResult, bootstrap_calibrate,
                              build_pool, calibrate_limit, estimate_arl)
from core.charts import ChartConfig, ChartKind, run_chart
from core.config_manager import config_manager
from core.dgp import DgpSpec
from core.errors import ConfigError, NonConvergence, SopValidationError
from core.lattice import CountGrid, FrameStream, RealGrid, jitter
from core.logger import sop_logger
from core.results_store import results_store
from core.rng import stream_rng

from .chart_exporter import chart_exporter
from .frame_io import read_frames, read_pool_values, write_frames


@dataclass
class RunConfig:
    chart: ChartConfig
    m: int = 10
    n: int = 10
    dgp: Optional[DgpSpec] = None
    input: Optional[str] = None
    output: Optional[str] = None
    plot: Optional[str] = None
    jitter_scale: Optional[float] = None
    noise_runs: int = 1
    seed: Optional[int] = None
    workers: Optional[int] = None
    replications: int = 10000
    cap: int = 1000000
    target_arl: float = 370.0
    rel_tol: Optional[float] = None
    max_evals: int = 40
    frames: int = 100
    pool_values: Optional[Union[str, List[float]]] = None
    pool_frames: Optional[str] = None
    pool_kind: ChartKind = field(default_factory=ChartKind.tau_tilde)

    def __post_init__(self):
        if self.noise_runs < 1:
            raise ConfigError(f"noise_runs must be at least 1, got {self.noise_runs}")
        if self.jitter_scale is not None and not self.jitter_scale > 0:
            raise ConfigError(f"jitter_scale must be positive, got {self.jitter_scale}")
        if self.frames < 1:
            raise ConfigError(f"Frame count must be at least 1, got {self.frames}")

    @classmethod
    def from_config(cls, cm=config_manager) -> 'RunConfig':
        """Collect a run description from the layered configuration"""
        try:
            chart = ChartConfig(
                kind=ChartKind.parse(cm.get('chart.kind', 'tau_tilde')),
                lam=float(cm.get('chart.lambda', 0.1)),
                limit=cm.get('chart.limit'),
                center=float(cm.get('chart.center', 0.0)),
                init=cm.get('chart.init'),
                reference=cm.get('chart.reference')
            )
            dgp_config = cm.get('dgp')
            if isinstance(dgp_config, str):
                dgp_config = {'process': 'iid', 'innovation': dgp_config}
            return cls(
                chart=chart,
                m=int(cm.get('grid.m', 10)),
                n=int(cm.get('grid.n', 10)),
                dgp=DgpSpec.from_config(dgp_config) if dgp_config else None,
                input=cm.get('run.input'),
                output=cm.get('run.output'),
                plot=cm.get('run.plot'),
                jitter_scale=cm.get('run.jitter_scale'),
                noise_runs=int(cm.get('run.noise_runs', 1)),
                seed=cm.get('run.seed'),
                workers=cm.get('run.workers'),
                replications=int(cm.get('run.replications', 10000)),
                cap=int(cm.get('run.cap', 1000000)),
                target_arl=float(cm.get('run.target_arl', 370.0)),
                rel_tol=cm.get('run.rel_tol'),
                max_evals=int(cm.get('run.max_evals', 40)),
                frames=int(cm.get('run.frames', 100)),
                pool_values=cm.get('pool.values'),
                pool_frames=cm.get('pool.frames'),
                pool_kind=ChartKind.parse(cm.get('pool.kind', 'tau_tilde'))
            )
        except SopValidationError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid run configuration: {e}") from e

    def require_seed(self, command: str) -> int:
        if self.seed is None:
            raise ConfigError(f"'{command}' needs --seed")
        return int(self.seed)

    def require_limit(self, command: str) -> float:
        if self.chart.limit is None:
            raise ConfigError(f"'{command}' needs a control limit (--limit or chart.limit)")
        return self.chart.limit

    def require_one_source(self, command: str):
        if (self.dgp is None) == (self.input is None):
            raise ConfigError(f"'{command}' needs exactly one of a dgp section or --input")


def _clean(value: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, non-finite floats to null"""
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_record(record: Dict, output: Optional[str] = None):
    text = json.dumps(_clean(record), indent=2)
    if output:
        with open(output, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text + '\n')
    else:
        print(text)


def simulate_stream(run: RunConfig, command: str = 'simulate') -> FrameStream:
    """Frames 1..T of the configured DGP; stream 0 of the seed is reserved for this"""
    seed = run.require_seed(command)
    if run.dgp is None:
        raise ConfigError("No dgp section configured")
    values = run.dgp.sample_frames(run.m, run.n, stream_rng(seed, 0), run.frames)
    integer = values.dtype.kind in 'iu' and (values >= 0).all()
    return FrameStream([CountGrid(v) if integer else RealGrid(v) for v in values])


def cmd_monitor(run: RunConfig):
    """Run the chart over a frame stream; one curve per noise run when jittering counts"""
    run.require_one_source('monitor')
    run.require_limit('monitor')
    run_id = sop_logger.log_run_start('monitor', {'chart': str(run.chart.kind), 'input': run.input})

    stream = read_frames(run.input) if run.input else simulate_stream(run, 'monitor')
    sop_logger.info(f"Monitoring {len(stream)} frame(s) of shape {stream.shape}")

    jittered = stream.is_count and run.jitter_scale is not None
    if jittered:
        seed = run.require_seed('monitor')
        runs = []
        for k in range(1, run.noise_runs + 1):
            rng = stream_rng(seed, k)
            runs.append(run_chart(run.chart, [jitter(frame, run.jitter_scale, rng) for frame in stream]))
    else:
        if stream.is_count:
            sop_logger.warning("Count frames monitored without jitter; ties are ranked by position")
        if run.noise_runs > 1:
            sop_logger.warning("noise_runs > 1 has no effect without jittered count frames")
        runs = [run_chart(run.chart, stream)]

    table = chart_exporter.build_table(runs, include_mean=jittered and len(runs) > 1)
    if run.output:
        chart_exporter.export_csv(table, run.output)
    else:
        table.to_csv(sys.stdout, index=False, lineterminator='\n')
    if run.plot:
        chart_exporter.export_plot(table, run.plot, title=str(run.chart.kind))

    alarms = int(table.loc[table['run'] == table['run'].min(), 'alarm'].sum())
    sop_logger.info(f"Monitor run {run_id}: {alarms} alarm(s) over {len(stream)} frame(s)")
    return table


def _load_pool(run: RunConfig) -> BootstrapPool:
    if isinstance(run.pool_values, str):
        return BootstrapPool(tuple(read_pool_values(run.pool_values)))
    if run.pool_values:
        return BootstrapPool(tuple(run.pool_values))
    stream = read_frames(run.pool_frames)
    frames = list(stream)
    if stream.is_count and run.jitter_scale is not None:
        rng = stream_rng(run.require_seed('calibrate'), 0)
        frames = [jitter(frame, run.jitter_scale, rng) for frame in frames]
    return build_pool(frames, run.pool_kind)


def cmd_calibrate(run: RunConfig) -> CalibrationResult:
    """Calibrate against a DGP, or by bootstrap from a Phase-I pool"""
    seed = run.require_seed('calibrate')
    use_pool = bool(run.pool_values or run.pool_frames)
    if (run.dgp is None) == (not use_pool):
        raise ConfigError("'calibrate' needs exactly one of a dgp section or a pool (pool.values / pool.frames)")

    source = f"bootstrap:{run.pool_frames or 'values'}" if use_pool else run.dgp.describe()
    run_id = sop_logger.log_run_start('calibrate', {'chart': str(run.chart.kind), 'source': source})
    start = time.time()

    try:
        if use_pool:
            pool = _load_pool(run)
            result = bootstrap_calibrate(pool, run.chart.lam, run.target_arl, run.replications, run.rel_tol,
                                         seed, run.cap, run.workers, run.max_evals)
        else:
            result = calibrate_limit(run.chart, run.dgp, run.m, run.n, run.target_arl, run.replications,
                                     run.rel_tol, seed, run.jitter_scale, run.cap, run.workers, run.max_evals)
    except NonConvergence as e:
        if e.result is not None:
            write_record(_calibration_record(run, source, e.result), run.output)
            sop_logger.log_calibration_complete(run_id, str(run.chart.kind), source, run.target_arl,
                                                e.result, time.time() - start)
        raise

    write_record(_calibration_record(run, source, result), run.output)
    sop_logger.log_calibration_complete(run_id, str(run.chart.kind), source, run.target_arl,
                                        result, time.time() - start)
    return result


def _calibration_record(run: RunConfig, source: str, result: CalibrationResult) -> Dict:
    record = {'command': 'calibrate', 'chart': str(run.chart.kind), 'lambda': run.chart.lam,
              'source': source, 'seed': run.seed, 'replications': run.replications}
    if run.dgp is not None:
        record['grid'] = [run.m, run.n]
    record.update(result.to_dict())
    return record


def cmd_arl(run: RunConfig) -> ArlEstimate:
    seed = run.require_seed('arl')
    limit = run.require_limit('arl')
    if run.dgp is None or run.input is not None:
        raise ConfigError("'arl' simulates from a dgp section; frame input is not used")
    run_id = sop_logger.log_run_start('arl', {'chart': str(run.chart.kind), 'dgp': run.dgp.describe()})
    start = time.time()

    estimate = estimate_arl(run.chart, run.dgp, run.m, run.n, run.jitter_scale, run.cap,
                            run.replications, seed, run.workers)

    write_record({
        'command': 'arl', 'chart': str(run.chart.kind), 'lambda': run.chart.lam, 'limit': limit,
        'dgp': run.dgp.describe(), 'grid': [run.m, run.n], 'seed': seed, 'cap': run.cap,
        **estimate.to_dict()
    }, run.output)
    sop_logger.log_arl_complete(run_id, str(run.chart.kind), run.dgp.describe(), (run.m, run.n),
                                run.chart.lam, limit, estimate, time.time() - start)
    return estimate


def cmd_simulate(run: RunConfig) -> int:
    """Write T simulated frames; the same seed always gives the same file"""
    if not run.output:
        raise ConfigError("'simulate' needs --output")
    stream = simulate_stream(run)
    count = write_frames(run.output, stream)
    sop_logger.info(f"Wrote {count} records ({len(stream)} frames of {run.dgp.describe()}) to {run.output}")
    return count


def cmd_history(limit: int = 10, output: Optional[str] = None) -> Dict:
    record = {
        'summary': results_store.get_summary(),
        'arl_runs': results_store.get_recent('arl_runs', limit),
        'calibration_runs': results_store.get_recent('calibration_runs', limit)
    }
    write_record(record, output)
    return record
