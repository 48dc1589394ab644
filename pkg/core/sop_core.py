"""Spatial ordinal patterns (SOPs) of 2x2 squares and derived statistics.

Squares are read row by row, ``(y1 y2; y3 y4)``. The SOP is the rank
permutation of the four values with ties ranked by position, and its type is
the rank that shares a diagonal with rank 4.

All frame functions accept a single frame or a stack of frames whose last two
axes are the lattice; the stacked forms are what the simulation engine uses.
"""
import math
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from itertools import permutations
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DegenerateError, DelayError, NonFiniteError, OverlapError, ParamError
from .lattice import CountGrid, RealGrid

ArrayLike = Union[RealGrid, CountGrid, np.ndarray]


class SopType(IntEnum):
    MONOTONE = 1   # monotonic along rows and columns
    ONE_WAY = 2    # trend along one dimension only
    DIAGONAL = 3   # both lowest and both highest ranks on a diagonal


# Types of all 24 rank squares, written out as (r1, r2, r3, r4)
TYPE_LISTING: Dict[int, List[Tuple[int, int, int, int]]] = {
    1: [(1, 2, 3, 4), (1, 3, 2, 4), (2, 1, 4, 3), (2, 4, 1, 3),
        (3, 1, 4, 2), (3, 4, 1, 2), (4, 2, 3, 1), (4, 3, 2, 1)],
    2: [(1, 2, 4, 3), (1, 4, 2, 3), (2, 1, 3, 4), (2, 3, 1, 4),
        (3, 2, 4, 1), (3, 4, 2, 1), (4, 1, 3, 2), (4, 3, 1, 2)],
    3: [(1, 3, 4, 2), (1, 4, 3, 2), (2, 3, 4, 1), (2, 4, 3, 1),
        (3, 1, 2, 4), (3, 2, 1, 4), (4, 1, 2, 3), (4, 2, 1, 3)],
}

# Lexicographic order, so list position == Lehmer code
PERMUTATIONS: List[Tuple[int, int, int, int]] = list(permutations((1, 2, 3, 4)))

# Partner of each position on its diagonal: 1<->4 main, 2<->3 anti
_DIAGONAL_PARTNER = {0: 3, 3: 0, 1: 2, 2: 1}


@dataclass(frozen=True)
class Sop:
    ranks: Tuple[int, int, int, int]

    def __post_init__(self):
        ranks = tuple(int(r) for r in self.ranks)
        if sorted(ranks) != [1, 2, 3, 4]:
            raise ParamError(f"SOP ranks must be a permutation of 1..4, got {self.ranks}")
        object.__setattr__(self, 'ranks', ranks)

    @property
    def lehmer_code(self) -> int:
        r = self.ranks
        l1 = (r[1] < r[0]) + (r[2] < r[0]) + (r[3] < r[0])
        l2 = (r[2] < r[1]) + (r[3] < r[1])
        l3 = int(r[3] < r[2])
        return 6 * l1 + 2 * l2 + l3


@dataclass(frozen=True)
class Delay:
    d1: int = 1
    d2: int = 1

    def __post_init__(self):
        if int(self.d1) != self.d1 or int(self.d2) != self.d2 or self.d1 < 1 or self.d2 < 1:
            raise DelayError(f"Delay components must be positive integers, got ({self.d1}, {self.d2})")

    def check(self, m: int, n: int):
        if self.d1 > m or self.d2 > n:
            raise DelayError(f"Delay ({self.d1}, {self.d2}) exceeds grid extent m={m}, n={n}")

    def __str__(self):
        return f"{self.d1},{self.d2}"


@dataclass(frozen=True)
class SpatialLag:
    h1: int = 1
    h2: int = 1

    def __post_init__(self):
        if int(self.h1) != self.h1 or int(self.h2) != self.h2:
            raise ParamError(f"Spatial lag must be integer, got ({self.h1}, {self.h2})")
        if self.h1 == 0 and self.h2 == 0:
            raise ParamError("Spatial lag (0, 0) is not allowed")

    def canonical(self) -> 'SpatialLag':
        """Representative of {h, -h} with h1 > 0, or h1 == 0 and h2 > 0"""
        if self.h1 > 0 or (self.h1 == 0 and self.h2 > 0):
            return self
        return SpatialLag(-self.h1, -self.h2)

    def check(self, m: int, n: int):
        if abs(self.h1) > m or abs(self.h2) > n:
            raise OverlapError(f"Lag ({self.h1}, {self.h2}) leaves no overlap on an m={m}, n={n} grid")

    def __str__(self):
        return f"{self.h1},{self.h2}"


@dataclass(frozen=True)
class TypeFrequencies:
    p1: float
    p2: float
    p3: float
    counts: Optional[Tuple[int, int, int]] = field(default=None, compare=False)

    def __post_init__(self):
        p = (self.p1, self.p2, self.p3)
        if min(p) < 0 or max(p) > 1 or abs(math.fsum(p) - 1.0) > 1e-12:
            raise ParamError(f"Type frequencies must form a probability vector, got {p}")

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> 'TypeFrequencies':
        counts = tuple(int(c) for c in counts)
        total = sum(counts)
        if total <= 0:
            raise ParamError("Cannot normalise empty type counts")
        return cls(counts[0] / total, counts[1] / total, counts[2] / total, counts=counts)

    def as_array(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.p3])

    def exact(self) -> Tuple[Fraction, Fraction, Fraction]:
        if self.counts is not None:
            total = sum(self.counts)
            return tuple(Fraction(c, total) for c in self.counts)
        return Fraction(self.p1), Fraction(self.p2), Fraction(self.p3)


@dataclass(frozen=True)
class DependenceStats:
    """The four type statistics, held as exact rationals"""
    tau_hat: Fraction
    kappa_hat: Fraction
    tau_tilde: Fraction
    kappa_tilde: Fraction

    def as_floats(self) -> Tuple[float, float, float, float]:
        return float(self.tau_hat), float(self.kappa_hat), float(self.tau_tilde), float(self.kappa_tilde)


def sop_of_square(q: Sequence[float]) -> Sop:
    """Rank pattern of four values read row by row; ties rank the earlier position lower"""
    y = np.asarray(q, dtype=np.float64).ravel()
    if y.size != 4:
        raise ParamError(f"A square has 4 values, got {y.size}")
    if not np.isfinite(y).all():
        raise NonFiniteError(f"Square contains non-finite values: {tuple(y)}")
    order = np.argsort(y, kind='stable')
    ranks = np.empty(4, dtype=int)
    ranks[order] = np.arange(1, 5)
    return Sop(tuple(ranks))


def type_of_sop(pi: Sop) -> SopType:
    top = pi.ranks.index(4)
    return SopType(pi.ranks[_DIAGONAL_PARTNER[top]])


def _build_type_table() -> np.ndarray:
    table = np.array([int(type_of_sop(Sop(p))) for p in PERMUTATIONS], dtype=np.int8)
    for k, members in TYPE_LISTING.items():
        listed = sorted(PERMUTATIONS.index(p) for p in members)
        derived = sorted(np.flatnonzero(table == k).tolist())
        if listed != derived:
            raise RuntimeError(f"Type table disagrees with the listing for type {k}")
    return table


# Type per Lehmer code
TYPE_TABLE = _build_type_table()


def _values(g: ArrayLike) -> np.ndarray:
    values = g.values if isinstance(g, (RealGrid, CountGrid)) else np.asarray(g)
    if values.ndim < 2:
        raise ParamError(f"Expected a frame or a stack of frames, got shape {values.shape}")
    return values


def _as_delay(d) -> Delay:
    if isinstance(d, Delay):
        return d
    return Delay(*d)


def _as_lag(h) -> SpatialLag:
    if isinstance(h, SpatialLag):
        return h
    return SpatialLag(*h)


def square_codes(g: ArrayLike, d=(1, 1)) -> np.ndarray:
    """Lehmer code of the SOP of every delayed square Y_s^(d), s in {d1..m}x{d2..n}"""
    values = _values(g)
    d = _as_delay(d)
    d.check(values.shape[-2] - 1, values.shape[-1] - 1)
    y1 = values[..., :-d.d1, :-d.d2]
    y2 = values[..., :-d.d1, d.d2:]
    y3 = values[..., d.d1:, :-d.d2]
    y4 = values[..., d.d1:, d.d2:]
    # For a later position l > k, r_l < r_k exactly when y_l < y_k
    l1 = (y2 < y1).astype(np.int8) + (y3 < y1) + (y4 < y1)
    l2 = (y3 < y2).astype(np.int8) + (y4 < y2)
    l3 = (y4 < y3).astype(np.int8)
    return 6 * l1 + 2 * l2 + l3


def type_counts(g: ArrayLike, d=(1, 1)) -> np.ndarray:
    """Integer counts of types 1..3, shape (..., 3)"""
    types = TYPE_TABLE[square_codes(g, d)]
    flat = types.reshape(types.shape[:-2] + (-1,))
    return np.stack([(flat == k).sum(axis=-1) for k in (1, 2, 3)], axis=-1)


def type_frequency_array(g: ArrayLike, d=(1, 1)) -> np.ndarray:
    """Relative type frequencies, shape (..., 3)"""
    counts = type_counts(g, d)
    return counts / counts.sum(axis=-1, keepdims=True)


def type_frequencies(g: RealGrid, d=(1, 1)) -> TypeFrequencies:
    counts = type_counts(g, d)
    if counts.ndim != 1:
        raise ParamError("type_frequencies takes a single frame; use type_frequency_array for stacks")
    return TypeFrequencies.from_counts(counts)


def sop_matrix(g: RealGrid, d=(1, 1)) -> np.ndarray:
    """Rank quadruple of every square, shape (m-d1+1, n-d2+1, 4)"""
    return np.array(PERMUTATIONS)[square_codes(g, d)]


def type_matrix(g: RealGrid, d=(1, 1)) -> np.ndarray:
    return TYPE_TABLE[square_codes(g, d)].astype(int)


def sop_frequencies(g: ArrayLike, d=(1, 1)) -> np.ndarray:
    """Relative frequencies of the 24 SOPs, indexed by Lehmer code"""
    codes = square_codes(g, d)
    counts = np.bincount(codes.ravel().astype(np.int64), minlength=24)
    return counts / counts.sum()


def dependence_stats(p: TypeFrequencies) -> DependenceStats:
    p1, p2, p3 = p.exact()
    third = Fraction(1, 3)
    return DependenceStats(
        tau_hat=p1 - third,
        kappa_hat=p2 - p3,
        tau_tilde=p3 - third,
        kappa_tilde=p1 - p2
    )


def acf_array(g: ArrayLike, lags: Sequence) -> np.ndarray:
    """Sample spatial ACF at several lags, shape (..., len(lags))

    Numerator over the overlap of s and s-h, denominator over the whole frame,
    one global mean per frame.
    """
    values = np.asarray(_values(g), dtype=np.float64)
    rows, cols = values.shape[-2], values.shape[-1]
    if (np.ptp(values, axis=(-2, -1)) == 0).any():
        raise DegenerateError("Spatial ACF is undefined for a constant frame")

    dev = values - values.mean(axis=(-2, -1), keepdims=True)
    denom = np.einsum('...ij,...ij->...', dev, dev)

    result = []
    for h in lags:
        h = _as_lag(h)
        h.check(rows - 1, cols - 1)
        h = h.canonical()
        a_rows, b_rows = slice(h.h1, rows), slice(0, rows - h.h1)
        if h.h2 >= 0:
            a_cols, b_cols = slice(h.h2, cols), slice(0, cols - h.h2)
        else:
            a_cols, b_cols = slice(0, cols + h.h2), slice(-h.h2, cols)
        num = np.einsum('...ij,...ij->...', dev[..., a_rows, a_cols], dev[..., b_rows, b_cols])
        result.append(num / denom)
    return np.stack(result, axis=-1)


def spatial_acf(g: RealGrid, h=(1, 1)) -> float:
    values = _values(g)
    if values.ndim != 2:
        raise ParamError("spatial_acf takes a single frame; use acf_array for stacks")
    return float(acf_array(values, [h])[0])
