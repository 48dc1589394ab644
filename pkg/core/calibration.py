"""Run-length simulation, ARL estimation and control-limit calibration.

Replication ``r`` of an experiment seeded with ``master_seed`` always draws
from ``stream_rng(master_seed, r)`` and generates frames in a fixed chunk
schedule that does not depend on the limit. Two consequences:

* estimates do not depend on the number of worker processes, and
* evaluating several limits reuses the same sample paths (common random
  numbers), so the estimated ARL is a nondecreasing step function of the
  limit and bisection on it is well defined.
"""
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .charts import ChartConfig, ChartKind, observe, plotted_statistic, smooth_block
from .dgp import DgpSpec
from .errors import BracketError, CapWarning, ConfigError, NonConvergence, ParamError
from .lattice import jitter_values
from .logger import sop_logger
from .resource_monitor import resource_monitor
from .rng import stream_rng

DEFAULT_CAP = 1_000_000
DEFAULT_MAX_EVALS = 40
MAX_CHUNK = 512


@dataclass
class ArlEstimate:
    mean: float
    stderr: float
    replications: int
    cap_hits: int

    def to_dict(self):
        return asdict(self)


@dataclass
class CalibrationResult:
    limit: float
    achieved_arl: ArlEstimate
    iterations: List[Tuple[float, float]] = field(default_factory=list)
    target_arl: float = float('nan')
    converged: bool = True
    bracket: Optional[Tuple[float, float]] = None
    discrete: bool = False

    def to_dict(self):
        return {
            'limit': self.limit,
            'target_arl': self.target_arl,
            'achieved_arl': self.achieved_arl.to_dict(),
            'converged': self.converged,
            'discrete': self.discrete,
            'bracket': list(self.bracket) if self.bracket else None,
            'iterations': [{'limit': l, 'arl': a} for l, a in self.iterations]
        }


@dataclass
class BootstrapPool:
    phase1_stats: Tuple[float, ...]
    mean: float = field(init=False)

    def __post_init__(self):
        stats = tuple(float(v) for v in self.phase1_stats)
        if not stats:
            raise ParamError("Bootstrap pool is empty")
        if not all(math.isfinite(v) for v in stats):
            raise ParamError("Bootstrap pool contains non-finite values")
        self.phase1_stats = stats
        self.mean = math.fsum(stats) / len(stats)

    def max_deviation(self) -> float:
        return max(abs(v - self.mean) for v in self.phase1_stats)


def default_rel_tol(replications: int) -> float:
    return 0.01 if replications >= 1_000_000 else 0.03


def _chunk_sizes() -> Iterator[int]:
    size = 8
    while True:
        yield size
        size = min(2 * size, MAX_CHUNK)


@dataclass(frozen=True)
class ChartSimulation:
    """Chart fed by simulated frames"""
    config: ChartConfig
    dgp: DgpSpec
    m: int
    n: int
    jitter_scale: Optional[float] = None

    def deviations(self, rng: np.random.Generator) -> Iterator[np.ndarray]:
        """|plotted statistic - center| for t = 1, 2, ..., one chunk at a time"""
        cfg = self.config
        channels = cfg.initial_channels()
        reference = cfg.reference_array()
        jitter = self.jitter_scale is not None and self.dgp.is_integer
        for size in _chunk_sizes():
            frames = self.dgp.sample_frames(self.m, self.n, rng, size)
            if jitter:
                frames = jitter_values(frames, self.jitter_scale, rng)
            smoothed = smooth_block(observe(cfg.kind, frames), channels, cfg.lam)
            channels = smoothed[-1]
            yield np.abs(plotted_statistic(cfg.kind, smoothed, reference) - cfg.center)

    def max_deviation(self) -> float:
        return self.config.kind.max_deviation() + abs(self.config.center)

    def describe(self) -> str:
        return f"{self.config.kind} lambda={self.config.lam} on {self.dgp.describe()} ({self.m},{self.n})"


@dataclass(frozen=True)
class PoolSimulation:
    """Chart fed by i.i.d. resampling from a Phase-I pool"""
    values: Tuple[float, ...]
    lam: float

    def deviations(self, rng: np.random.Generator) -> Iterator[np.ndarray]:
        pool = np.asarray(self.values)
        mean = math.fsum(self.values) / len(self.values)
        level = np.asarray(mean)
        for size in _chunk_sizes():
            smoothed = smooth_block(pool[rng.integers(0, len(pool), size)], level, self.lam)
            level = smoothed[-1]
            yield np.abs(smoothed - mean)

    def describe(self) -> str:
        return f"bootstrap pool of {len(self.values)} lambda={self.lam}"


def first_alarms(deviations: Iterator[np.ndarray], limits: np.ndarray, cap: int) -> Tuple[np.ndarray, np.ndarray]:
    """First t with deviation > limit, for each limit; runs without alarm are capped"""
    lengths = np.full(len(limits), cap, dtype=np.int64)
    done = np.zeros(len(limits), dtype=bool)
    t0 = 0
    for dev in deviations:
        dev = dev[:cap - t0]
        pending = np.flatnonzero(~done)
        exceed = dev[:, np.newaxis] > limits[pending][np.newaxis, :]
        hit = exceed.any(axis=0)
        lengths[pending[hit]] = t0 + exceed.argmax(axis=0)[hit] + 1
        done[pending[hit]] = True
        t0 += len(dev)
        if done.all() or t0 >= cap:
            break
    return lengths, ~done


def _simulate_batch(args):
    """Run a block of replications in a worker process.

    Module level so ProcessPoolExecutor can pickle it.
    """
    simulation, limits, cap, master_seed, rep_ids = args
    lengths = np.empty((len(rep_ids), len(limits)), dtype=np.int64)
    capped = np.empty((len(rep_ids), len(limits)), dtype=bool)
    for row, rep in enumerate(rep_ids):
        lengths[row], capped[row] = first_alarms(simulation.deviations(stream_rng(master_seed, int(rep))), limits, cap)
    return rep_ids, lengths, capped


def simulate_run_lengths(simulation, limits: Sequence[float], replications: int, master_seed: int,
                         cap: int = DEFAULT_CAP, workers: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Run lengths of shape (replications, len(limits)) and the matching cap flags"""
    if replications < 1:
        raise ParamError(f"Need at least one replication, got {replications}")
    if cap < 1:
        raise ParamError(f"Run-length cap must be at least 1, got {cap}")
    if master_seed is None:
        raise ConfigError("A master seed is required for simulation")
    limits = np.asarray(limits, dtype=np.float64)
    workers = resource_monitor.resolve_workers(workers)

    lengths = np.empty((replications, len(limits)), dtype=np.int64)
    capped = np.empty((replications, len(limits)), dtype=bool)
    batches = [b for b in np.array_split(np.arange(replications), min(replications, 4 * workers)) if len(b)]
    tasks = [(simulation, limits, int(cap), int(master_seed), ids) for ids in batches]

    if workers == 1:
        for task in tasks:
            ids, l, c = _simulate_batch(task)
            lengths[ids], capped[ids] = l, c
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(_simulate_batch, task) for task in tasks]
            for future in as_completed(futures):
                ids, l, c = future.result()
                lengths[ids], capped[ids] = l, c

    resource_monitor.log_snapshot(f"{replications} replications on {workers} worker(s)")
    return lengths, capped


def summarize(lengths: np.ndarray, capped: np.ndarray) -> ArlEstimate:
    """ARL estimate from one column of run lengths; exact sums, so reduction order is irrelevant"""
    values = lengths.astype(np.float64)
    r = len(values)
    mean = math.fsum(values) / r
    if r > 1:
        stderr = math.sqrt(math.fsum((values - mean) ** 2) / (r - 1) / r)
    else:
        stderr = float('nan')
    return ArlEstimate(mean=mean, stderr=stderr, replications=r, cap_hits=int(capped.sum()))


def _warn_cap(estimate: ArlEstimate, limit: float, cap: int):
    if estimate.cap_hits > 0:
        message = f"{estimate.cap_hits} of {estimate.replications} runs hit the cap {cap} at limit {limit:.6g}"
        sop_logger.warning(message)
        warnings.warn(message, CapWarning, stacklevel=3)


def run_length(cfg: ChartConfig, dgp: DgpSpec, m: int, n: int, jitter_scale: Optional[float],
               cap: int, rng: np.random.Generator) -> int:
    """Zero-state run length of one simulated monitoring run"""
    if cfg.limit is None:
        raise ConfigError("Run-length simulation needs a control limit")
    if cap < 1:
        raise ParamError(f"Run-length cap must be at least 1, got {cap}")
    cfg.kind.check_grid(m, n)
    simulation = ChartSimulation(cfg, dgp, m, n, jitter_scale)
    lengths, capped = first_alarms(simulation.deviations(rng), np.array([cfg.limit]), cap)
    if capped[0]:
        sop_logger.warning(f"Run reached the cap {cap} without an alarm")
    return int(lengths[0])


def estimate_arl_curve(cfg: ChartConfig, dgp: DgpSpec, m: int, n: int, limits: Sequence[float],
                       jitter_scale: Optional[float] = None, cap: int = DEFAULT_CAP,
                       replications: int = 10000, master_seed: int = 0,
                       workers: Optional[int] = None) -> List[ArlEstimate]:
    """ARL at several limits from the same sample paths"""
    cfg.kind.check_grid(m, n)
    simulation = ChartSimulation(cfg, dgp, m, n, jitter_scale)
    lengths, capped = simulate_run_lengths(simulation, limits, replications, master_seed, cap, workers)
    estimates = [summarize(lengths[:, i], capped[:, i]) for i in range(len(limits))]
    for limit, estimate in zip(limits, estimates):
        _warn_cap(estimate, limit, cap)
    return estimates


def estimate_arl(cfg: ChartConfig, dgp: DgpSpec, m: int, n: int, jitter_scale: Optional[float] = None,
                 cap: int = DEFAULT_CAP, replications: int = 10000, master_seed: int = 0,
                 workers: Optional[int] = None) -> ArlEstimate:
    if cfg.limit is None:
        raise ConfigError("ARL estimation needs a control limit")
    start = time.time()
    estimate = estimate_arl_curve(cfg, dgp, m, n, [cfg.limit], jitter_scale, cap, replications,
                                  master_seed, workers)[0]
    sop_logger.metric('arl', round(estimate.mean, 4), {
        'chart': str(cfg.kind), 'limit': cfg.limit, 'stderr': round(estimate.stderr, 4),
        'R': replications, 'elapsed_s': round(time.time() - start, 2)
    })
    return estimate


def _closest(candidates, target: float):
    return min(candidates, key=lambda item: abs(item[1].mean - target))


def search_limit(evaluate: Callable[[float], ArlEstimate], target_arl: float, rel_tol: float,
                 start: float, ceiling: float, max_evals: int = DEFAULT_MAX_EVALS) -> CalibrationResult:
    """Find l with |ARL(l) - target| / target <= rel_tol for a nondecreasing ARL(l)

    A doubling/halving walk from `start` brackets the target, then bisection
    narrows the bracket.
    """
    if not target_arl > 1:
        raise ParamError(f"Target ARL must exceed 1, got {target_arl}")
    if not rel_tol >= 0:
        raise ParamError(f"Relative tolerance must be nonnegative, got {rel_tol}")
    if not ceiling > 0:
        raise BracketError("Statistic never deviates from its center; no limit can reach the target")

    floor = ceiling * 1e-12
    trace: List[Tuple[float, float]] = []
    trials: List[Tuple[float, ArlEstimate]] = []
    lo: Optional[Tuple[float, ArlEstimate]] = None
    hi: Optional[Tuple[float, ArlEstimate]] = None

    def result(limit, estimate, converged=True, discrete=False):
        bracket = (lo[0], hi[0]) if lo and hi else None
        return CalibrationResult(limit=limit, achieved_arl=estimate, iterations=list(trace),
                                 target_arl=target_arl, converged=converged, bracket=bracket,
                                 discrete=discrete)

    def give_up(reason, discrete=False):
        limit, estimate = _closest(trials, target_arl)
        raise NonConvergence(reason, result(limit, estimate, converged=False, discrete=discrete))

    def trial(limit):
        if len(trace) >= max_evals:
            give_up(f"Limit search used all {max_evals} evaluations without meeting rel_tol={rel_tol}")
        estimate = evaluate(limit)
        trace.append((limit, estimate.mean))
        trials.append((limit, estimate))
        sop_logger.info(f"Search step {len(trace)}: limit {limit:.6g} -> ARL {estimate.mean:.3f} (se {estimate.stderr:.3f})")
        return estimate

    def on_target(estimate):
        return abs(estimate.mean - target_arl) / target_arl <= rel_tol

    limit = min(start, ceiling)
    while lo is None or hi is None:
        estimate = trial(limit)
        if on_target(estimate):
            return result(limit, estimate)
        if estimate.mean < target_arl:
            lo = (limit, estimate)
            if hi is None:
                if limit >= ceiling:
                    raise BracketError(f"ARL stays below {target_arl} up to the largest sensible limit {ceiling:.6g}")
                limit = min(2 * limit, ceiling)
        else:
            hi = (limit, estimate)
            if lo is None:
                if limit <= floor:
                    raise BracketError(f"ARL stays above {target_arl} down to limit {floor:.3g}")
                limit = max(limit / 2, floor)

    while True:
        mid = 0.5 * (lo[0] + hi[0])
        if hi[0] - lo[0] <= 1e-9 * hi[0] or mid in (lo[0], hi[0]):
            give_up(f"ARL jumps over {target_arl} between limits {lo[0]:.9g} and {hi[0]:.9g} "
                    f"(ARL {lo[1].mean:.2f} vs {hi[1].mean:.2f})", discrete=True)
        estimate = trial(mid)
        if on_target(estimate):
            return result(mid, estimate)
        if estimate.mean < target_arl:
            lo = (mid, estimate)
        else:
            hi = (mid, estimate)


def _search_cap(cap: int, target_arl: float) -> int:
    # runs far beyond the target carry no information for the search
    return int(min(cap, max(1000, math.ceil(50 * target_arl))))


def calibrate_limit(cfg: ChartConfig, dgp: DgpSpec, m: int, n: int, target_arl: float,
                    replications: int = 100000, rel_tol: Optional[float] = None, master_seed: int = 0,
                    jitter_scale: Optional[float] = None, cap: int = DEFAULT_CAP,
                    workers: Optional[int] = None, max_evals: int = DEFAULT_MAX_EVALS) -> CalibrationResult:
    """Control limit whose simulated IC-ARL matches `target_arl`; cfg.limit is ignored"""
    cfg.kind.check_grid(m, n)
    rel_tol = default_rel_tol(replications) if rel_tol is None else rel_tol
    simulation = ChartSimulation(cfg, dgp, m, n, jitter_scale)
    search_cap = _search_cap(cap, target_arl)
    sop_logger.info(f"Calibrating {simulation.describe()} to ARL0={target_arl} with R={replications}")

    def evaluate(limit):
        lengths, capped = simulate_run_lengths(simulation, [limit], replications, master_seed, search_cap, workers)
        return summarize(lengths[:, 0], capped[:, 0])

    ceiling = simulation.max_deviation()
    result = search_limit(evaluate, target_arl, rel_tol, ceiling / 64, ceiling, max_evals)
    _warn_cap(result.achieved_arl, result.limit, search_cap)
    sop_logger.metric('calibrated_limit', result.limit, {'chart': str(cfg.kind), 'arl': round(result.achieved_arl.mean, 3)})
    return result


def bootstrap_calibrate(pool: BootstrapPool, lam: float, target_arl: float, replications: int = 100000,
                        rel_tol: Optional[float] = None, master_seed: int = 0, cap: int = DEFAULT_CAP,
                        workers: Optional[int] = None, max_evals: int = DEFAULT_MAX_EVALS) -> CalibrationResult:
    """Limit for a chart centred at the pool mean, with IC behaviour taken from the pool"""
    if not 0 < lam <= 1:
        raise ParamError(f"Smoothing parameter must lie in (0, 1], got {lam}")
    rel_tol = default_rel_tol(replications) if rel_tol is None else rel_tol
    simulation = PoolSimulation(pool.phase1_stats, lam)
    search_cap = _search_cap(cap, target_arl)
    sop_logger.info(f"Bootstrap calibration from {len(pool.phase1_stats)} values (mean {pool.mean:.6g}), ARL0={target_arl}")

    def evaluate(limit):
        lengths, capped = simulate_run_lengths(simulation, [limit], replications, master_seed, search_cap, workers)
        return summarize(lengths[:, 0], capped[:, 0])

    ceiling = pool.max_deviation()
    result = search_limit(evaluate, target_arl, rel_tol, ceiling / 64, ceiling, max_evals)
    _warn_cap(result.achieved_arl, result.limit, search_cap)
    sop_logger.metric('bootstrap_limit', result.limit, {'arl': round(result.achieved_arl.mean, 3)})
    return result


def build_pool(frames, kind: Optional[ChartKind] = None) -> BootstrapPool:
    """Phase-I pool of raw per-frame statistics (tau_tilde by default)"""
    kind = kind or ChartKind.tau_tilde()
    values = np.stack([np.asarray(getattr(f, 'values', f)) for f in frames])
    kind.check_grid(values.shape[-2] - 1, values.shape[-1] - 1)
    raw = plotted_statistic(kind, observe(kind, values))
    return BootstrapPool(tuple(float(v) for v in raw))
