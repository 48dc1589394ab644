"""Rectangular lattice frames and the jittering transform.

A frame is an (m+1)x(n+1) matrix stored row-major: row index s1 in {0..m},
column index s2 in {0..n}.
"""
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple, Union

import numpy as np

from .errors import DimensionError, NonFiniteError, ParamError, ScaleError, ShapeError
from .logger import sop_logger


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, copy=True)
    values.setflags(write=False)
    return values


def _check_shape(values: np.ndarray):
    if values.ndim != 2:
        raise DimensionError(f"Frame must be a matrix, got {values.ndim} dimension(s)")
    if values.shape[0] < 2 or values.shape[1] < 2:
        raise DimensionError(f"Frame needs at least 2x2 cells, got {values.shape[0]}x{values.shape[1]}")


@dataclass(frozen=True)
class RealGrid:
    """Frame of finite real measurements"""
    values: np.ndarray

    def __post_init__(self):
        try:
            values = np.asarray(self.values, dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise NonFiniteError(f"Frame values are not real numbers: {e}") from e
        _check_shape(values)
        if not np.isfinite(values).all():
            raise NonFiniteError(f"Frame contains {int((~np.isfinite(values)).sum())} NaN/inf value(s)")
        object.__setattr__(self, 'values', _frozen(values))

    @property
    def m(self) -> int:
        return self.values.shape[0] - 1

    @property
    def n(self) -> int:
        return self.values.shape[1] - 1

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class CountGrid:
    """Frame of nonnegative integer counts"""
    values: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.values)
        _check_shape(raw)
        if raw.dtype.kind == 'f':
            if not np.isfinite(raw).all() or not np.array_equal(raw, np.round(raw)):
                raise ParamError("Count frame contains non-integer values")
        elif raw.dtype.kind not in 'iub':
            raise ParamError(f"Count frame has non-numeric dtype {raw.dtype}")
        values = raw.astype(np.int64)
        if (values < 0).any():
            raise ParamError(f"Count frame contains negative values (min {values.min()})")
        object.__setattr__(self, 'values', _frozen(values))

    @property
    def m(self) -> int:
        return self.values.shape[0] - 1

    @property
    def n(self) -> int:
        return self.values.shape[1] - 1

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape


Frame = Union[RealGrid, CountGrid]


class FrameStream:
    """Ordered frames of one monitored process, all of the same shape"""

    def __init__(self, frames: Optional[List[Frame]] = None):
        self.frames: List[Frame] = []
        for frame in frames or []:
            self.append(frame)

    def append(self, frame: Frame):
        if self.frames and frame.shape != self.shape:
            raise ShapeError(
                f"Frame t={len(self.frames) + 1} has shape {frame.shape}, stream has {self.shape}"
            )
        self.frames.append(frame)

    @property
    def shape(self) -> Optional[Tuple[int, int]]:
        return self.frames[0].shape if self.frames else None

    @property
    def is_count(self) -> bool:
        return bool(self.frames) and all(isinstance(f, CountGrid) for f in self.frames)

    def as_array(self) -> np.ndarray:
        """Stack of shape (T, m+1, n+1)"""
        return np.stack([f.values for f in self.frames])

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self) -> Iterator[Frame]:
        return iter(self.frames)

    def __getitem__(self, index: int) -> Frame:
        return self.frames[index]


def validate_grid(values) -> RealGrid:
    return RealGrid(values)


def open_uniform(rng: np.random.Generator, shape) -> np.ndarray:
    """Uniform draws on the open interval (0, 1)"""
    u = rng.random(shape)
    zero = u == 0.0
    while zero.any():
        u[zero] = rng.random(int(zero.sum()))
        zero = u == 0.0
    return u


def jitter_values(values: np.ndarray, scale: float, rng: np.random.Generator) -> np.ndarray:
    """Array form of `jitter`; works on a single frame or a stack of frames"""
    if not scale > 0:
        raise ScaleError(f"Jitter scale must be positive, got {scale}")
    return np.asarray(values, dtype=np.float64) + scale * open_uniform(rng, np.shape(values))


def jitter(x: CountGrid, scale: float, rng: np.random.Generator) -> RealGrid:
    """Break ties in a count frame by adding scale * U(0,1) noise to every cell"""
    if not scale > 0:
        raise ScaleError(f"Jitter scale must be positive, got {scale}")
    if scale > 1:
        sop_logger.warning(f"Jitter scale {scale} exceeds the unit gap of integer data; orders may change")
    return RealGrid(jitter_values(x.values, scale, rng))
