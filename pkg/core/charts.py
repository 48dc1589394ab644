"""EWMA/Shewhart control charts on SOP type frequencies and spatial ACFs.

A chart keeps one smoothed channel per delay (type-frequency vectors) or per
lag (ACF values). The plotted statistic is evaluated on the smoothed
channels, and an alarm is raised when it leaves ``center +/- limit``.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigError, DimensionError, ParamError
from .lattice import CountGrid, RealGrid
from .logger import sop_logger
from .sop_core import Delay, SpatialLag, acf_array, type_frequency_array

THIRD = 1.0 / 3.0


class ChartFamily(str, Enum):
    TAU_HAT = 'tau_hat'
    KAPPA_HAT = 'kappa_hat'
    TAU_TILDE = 'tau_tilde'
    KAPPA_TILDE = 'kappa_tilde'
    ACF = 'acf'
    TAU_TILDE_DELAYED = 'tau_tilde_delayed'
    ACF_LAGGED = 'acf_lagged'
    TAU_TILDE_BP = 'tau_tilde_bp'
    ACF_BP = 'acf_bp'


SOP_FAMILIES = {
    ChartFamily.TAU_HAT, ChartFamily.KAPPA_HAT, ChartFamily.TAU_TILDE, ChartFamily.KAPPA_TILDE,
    ChartFamily.TAU_TILDE_DELAYED, ChartFamily.TAU_TILDE_BP,
}
BP_FAMILIES = {ChartFamily.TAU_TILDE_BP, ChartFamily.ACF_BP}


def _pair(text: str, name: str) -> Tuple[int, int]:
    try:
        a, b = (int(part) for part in text.split(','))
    except ValueError as e:
        raise ConfigError(f"{name} needs two integers 'a,b', got '{text}'") from e
    return a, b


@dataclass(frozen=True)
class ChartKind:
    family: ChartFamily
    delay: Delay = Delay(1, 1)
    lag: SpatialLag = SpatialLag(1, 1)
    window: int = 1

    def __post_init__(self):
        object.__setattr__(self, 'family', ChartFamily(self.family))
        if self.family in BP_FAMILIES and (int(self.window) != self.window or self.window < 1):
            raise ConfigError(f"Box-Pierce window must be a positive integer, got {self.window}")

    @classmethod
    def tau_hat(cls):
        return cls(ChartFamily.TAU_HAT)

    @classmethod
    def kappa_hat(cls):
        return cls(ChartFamily.KAPPA_HAT)

    @classmethod
    def tau_tilde(cls):
        return cls(ChartFamily.TAU_TILDE)

    @classmethod
    def kappa_tilde(cls):
        return cls(ChartFamily.KAPPA_TILDE)

    @classmethod
    def acf(cls):
        return cls(ChartFamily.ACF)

    @classmethod
    def tau_tilde_delayed(cls, d1: int, d2: int):
        return cls(ChartFamily.TAU_TILDE_DELAYED, delay=Delay(d1, d2))

    @classmethod
    def acf_lagged(cls, h1: int, h2: int):
        return cls(ChartFamily.ACF_LAGGED, lag=SpatialLag(h1, h2))

    @classmethod
    def tau_tilde_bp(cls, w: int):
        return cls(ChartFamily.TAU_TILDE_BP, window=w)

    @classmethod
    def acf_bp(cls, w: int):
        return cls(ChartFamily.ACF_BP, window=w)

    @classmethod
    def parse(cls, text: str) -> 'ChartKind':
        """Read the configuration form, e.g. `tau_tilde`, `tau_tilde_delayed:2,2`, `acf_bp:2`"""
        name, _, arg = str(text).strip().partition(':')
        try:
            family = ChartFamily(name.strip().lower())
        except ValueError as e:
            raise ConfigError(f"Unknown chart kind '{name}'") from e
        if family is ChartFamily.TAU_TILDE_DELAYED:
            return cls(family, delay=Delay(*_pair(arg, 'Delay')))
        if family is ChartFamily.ACF_LAGGED:
            return cls(family, lag=SpatialLag(*_pair(arg, 'Lag')))
        if family in BP_FAMILIES:
            try:
                return cls(family, window=int(arg))
            except ValueError as e:
                raise ConfigError(f"Box-Pierce window must be an integer, got '{arg}'") from e
        if arg:
            raise ConfigError(f"Chart kind '{name}' takes no argument")
        return cls(family)

    def __str__(self):
        if self.family is ChartFamily.TAU_TILDE_DELAYED:
            return f"{self.family.value}:{self.delay}"
        if self.family is ChartFamily.ACF_LAGGED:
            return f"{self.family.value}:{self.lag}"
        if self.family in BP_FAMILIES:
            return f"{self.family.value}:{self.window}"
        return self.family.value

    @property
    def is_sop(self) -> bool:
        return self.family in SOP_FAMILIES

    @property
    def is_bp(self) -> bool:
        return self.family in BP_FAMILIES

    def delays(self) -> List[Delay]:
        if self.family is ChartFamily.TAU_TILDE_DELAYED:
            return [self.delay]
        if self.family is ChartFamily.TAU_TILDE_BP:
            w = self.window
            return [Delay(d1, d2) for d1 in range(1, w + 1) for d2 in range(1, w + 1)]
        if self.is_sop:
            return [Delay(1, 1)]
        return []

    def lags(self) -> List[SpatialLag]:
        """Lags actually computed; for ACF-BP one representative per {h, -h} pair"""
        if self.family is ChartFamily.ACF:
            return [SpatialLag(1, 1)]
        if self.family is ChartFamily.ACF_LAGGED:
            return [self.lag.canonical()]
        if self.family is ChartFamily.ACF_BP:
            w = self.window
            return [SpatialLag(h1, h2) for h1 in range(0, w + 1) for h2 in range(-w, w + 1)
                    if h1 > 0 or h2 > 0]
        return []

    @property
    def n_channels(self) -> int:
        return len(self.delays()) if self.is_sop else len(self.lags())

    @property
    def channel_shape(self) -> Tuple[int, ...]:
        return (self.n_channels, 3) if self.is_sop else (self.n_channels,)

    def check_grid(self, m: int, n: int):
        for d in self.delays():
            d.check(m, n)
        for h in self.lags():
            h.check(m, n)

    def max_deviation(self) -> float:
        """Upper bound of |statistic - center| for IC-centred charts"""
        if self.family in (ChartFamily.TAU_HAT, ChartFamily.TAU_TILDE, ChartFamily.TAU_TILDE_DELAYED):
            return 2.0 / 3.0
        if self.family in (ChartFamily.KAPPA_HAT, ChartFamily.KAPPA_TILDE):
            return 1.0
        if self.family is ChartFamily.TAU_TILDE_BP:
            return self.n_channels * (2.0 / 3.0) ** 2
        if self.family is ChartFamily.ACF_BP:
            return 8.0 * self.n_channels
        return 2.0

    def channels_for_level(self, level: float) -> np.ndarray:
        """Channel values at which the per-channel statistic equals `level`"""
        if not self.is_sop:
            return np.full(self.channel_shape, float(level))
        if self.family is ChartFamily.TAU_HAT:
            p = (THIRD + level, (2 * THIRD - level) / 2, (2 * THIRD - level) / 2)
        elif self.family is ChartFamily.KAPPA_HAT:
            p = (THIRD, THIRD + level / 2, THIRD - level / 2)
        elif self.family is ChartFamily.KAPPA_TILDE:
            p = (THIRD + level / 2, THIRD - level / 2, THIRD)
        else:
            p = ((2 * THIRD - level) / 2, (2 * THIRD - level) / 2, THIRD + level)
        return np.tile(np.array(p), (self.n_channels, 1))


def observe(kind: ChartKind, values: np.ndarray) -> np.ndarray:
    """Raw channel observations of a frame or stack: (..., C, 3) for SOP kinds, (..., C) for ACF kinds"""
    if kind.is_sop:
        return np.stack([type_frequency_array(values, d) for d in kind.delays()], axis=-2)
    return acf_array(values, kind.lags())


def plotted_statistic(kind: ChartKind, channels: np.ndarray, reference: Optional[np.ndarray] = None):
    """Plotted value of (smoothed or raw) channels; broadcasts over leading axes"""
    f = kind.family
    if f is ChartFamily.TAU_HAT:
        return channels[..., 0, 0] - THIRD
    if f is ChartFamily.KAPPA_HAT:
        return channels[..., 0, 1] - channels[..., 0, 2]
    if f in (ChartFamily.TAU_TILDE, ChartFamily.TAU_TILDE_DELAYED):
        return channels[..., 0, 2] - THIRD
    if f is ChartFamily.KAPPA_TILDE:
        return channels[..., 0, 0] - channels[..., 0, 1]
    if f in (ChartFamily.ACF, ChartFamily.ACF_LAGGED):
        return channels[..., 0]
    ref = np.zeros(kind.n_channels) if reference is None else reference
    if f is ChartFamily.TAU_TILDE_BP:
        dev = channels[..., :, 2] - THIRD - ref
        return np.sum(dev * dev, axis=-1)
    dev = channels - ref
    # each stored lag stands for itself and its mirror image
    return 2.0 * np.sum(dev * dev, axis=-1)


def ewma_step(prev, obs, lam: float):
    """One EWMA update: lam * obs + (1 - lam) * prev"""
    if not 0 < lam <= 1:
        raise ParamError(f"Smoothing parameter must lie in (0, 1], got {lam}")
    if np.shape(prev) != np.shape(obs):
        raise ParamError(f"EWMA shapes differ: {np.shape(prev)} vs {np.shape(obs)}")
    return lam * obs + (1 - lam) * prev


def smooth_block(raw: np.ndarray, prev: np.ndarray, lam: float) -> np.ndarray:
    """EWMA over the leading (time) axis of `raw`, continuing from `prev`"""
    zi = ((1 - lam) * np.asarray(prev, dtype=np.float64))[np.newaxis]
    smoothed, _ = lfilter([lam], [1.0, -(1 - lam)], raw, axis=0, zi=zi)
    return smoothed


@dataclass
class ChartConfig:
    kind: ChartKind
    lam: float = 0.1
    limit: Optional[float] = None
    center: float = 0.0
    init: Optional[Union[float, Sequence]] = None
    reference: Optional[Sequence[float]] = None

    def __post_init__(self):
        if isinstance(self.kind, str):
            self.kind = ChartKind.parse(self.kind)
        if not 0 < self.lam <= 1:
            raise ConfigError(f"Smoothing parameter lambda must lie in (0, 1], got {self.lam}")
        if self.limit is not None and not self.limit >= 0:
            raise ConfigError(f"Control limit must be nonnegative, got {self.limit}")
        if self.reference is not None and np.shape(self.reference) != (self.kind.n_channels,):
            raise ConfigError(f"Reference needs {self.kind.n_channels} values, got shape {np.shape(self.reference)}")

    @classmethod
    def for_pool(cls, kind: ChartKind, lam: float, pool, limit: Optional[float] = None) -> 'ChartConfig':
        """Chart centred and started at the Phase-I mean of a bootstrap pool"""
        return cls(kind=kind, lam=lam, limit=limit, center=pool.mean, init=pool.mean)

    def with_limit(self, limit: float) -> 'ChartConfig':
        return ChartConfig(self.kind, self.lam, limit, self.center, self.init, self.reference)

    def reference_array(self) -> np.ndarray:
        if self.reference is None:
            return np.zeros(self.kind.n_channels)
        return np.asarray(self.reference, dtype=np.float64)

    def initial_channels(self) -> np.ndarray:
        kind = self.kind
        if self.init is None:
            channels = np.full(kind.channel_shape, THIRD) if kind.is_sop else np.zeros(kind.channel_shape)
        elif np.ndim(self.init) == 0:
            channels = kind.channels_for_level(float(self.init))
        else:
            channels = np.array(self.init, dtype=np.float64)
            if channels.shape != kind.channel_shape:
                if kind.is_sop and channels.shape == (3,) and kind.n_channels == 1:
                    channels = channels.reshape(1, 3)
                else:
                    raise ConfigError(f"Initial value must have shape {kind.channel_shape}, got {channels.shape}")

        if kind.is_sop:
            if (channels < -1e-12).any() or (np.abs(channels.sum(axis=-1) - 1) > 1e-9).any():
                raise ConfigError(f"Initial type frequencies are not probability vectors: {channels.tolist()}")
        elif (np.abs(channels) > 1).any():
            raise ConfigError(f"Initial ACF values must lie in [-1, 1]: {channels.tolist()}")
        return channels


@dataclass
class ChartState:
    config: ChartConfig
    channels: np.ndarray
    t: int = 0
    shape: Optional[Tuple[int, int]] = None


@dataclass(frozen=True)
class ChartPoint:
    t: int
    raw: float
    smoothed: float
    center: float
    limit: float
    alarm: bool


def init_chart(cfg: ChartConfig) -> ChartState:
    return ChartState(config=cfg, channels=cfg.initial_channels())


def update_chart(state: ChartState, frame: Union[RealGrid, CountGrid, np.ndarray]) -> ChartPoint:
    """Feed one frame; returns the plotted point and advances the state"""
    cfg = state.config
    if cfg.limit is None:
        raise ConfigError("Chart has no control limit")
    values = frame.values if isinstance(frame, (RealGrid, CountGrid)) else np.asarray(frame)
    if values.ndim != 2:
        raise DimensionError(f"Chart update takes a single frame, got shape {values.shape}")
    if state.shape is None:
        cfg.kind.check_grid(values.shape[0] - 1, values.shape[1] - 1)
        state.shape = values.shape
    elif values.shape != state.shape:
        raise DimensionError(f"Frame shape changed from {state.shape} to {values.shape} at t={state.t + 1}")

    reference = cfg.reference_array()
    obs = observe(cfg.kind, values)
    state.channels = ewma_step(state.channels, obs, cfg.lam)
    state.t += 1

    raw = float(plotted_statistic(cfg.kind, obs, reference))
    smoothed = float(plotted_statistic(cfg.kind, state.channels, reference))
    alarm = abs(smoothed - cfg.center) > cfg.limit
    if alarm:
        sop_logger.debug(f"Alarm at t={state.t}: {cfg.kind} = {smoothed:.6f} (limit {cfg.limit})")
    return ChartPoint(t=state.t, raw=raw, smoothed=smoothed, center=cfg.center, limit=cfg.limit, alarm=alarm)


def run_chart(cfg: ChartConfig, frames: Iterable) -> List[ChartPoint]:
    state = init_chart(cfg)
    return [update_chart(state, frame) for frame in frames]


def bp_sop_stat(state: ChartState) -> float:
    if state.config.kind.family is not ChartFamily.TAU_TILDE_BP:
        raise ParamError(f"bp_sop_stat needs a tau_tilde_bp chart, got {state.config.kind}")
    return float(plotted_statistic(state.config.kind, state.channels, state.config.reference_array()))


def bp_acf_stat(state: ChartState) -> float:
    if state.config.kind.family is not ChartFamily.ACF_BP:
        raise ParamError(f"bp_acf_stat needs an acf_bp chart, got {state.config.kind}")
    return float(plotted_statistic(state.config.kind, state.channels, state.config.reference_array()))
