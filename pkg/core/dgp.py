"""Spatial data-generating processes for simulation experiments.

Every generator draws a stack of independent frames at once, shape
``(count, m+1, n+1)``; the single-frame functions are thin wrappers around
the stacked form. All randomness comes from the caller's generator.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from .errors import ConfigError, ConvergenceError, ModelError, ParamError, StationarityError
from .lattice import CountGrid, RealGrid
from .logger import sop_logger


# ---------------------------------------------------------------------------
# Marginal distributions
# ---------------------------------------------------------------------------

class MarginalSpec:
    """Base class of the innovation / IID marginal menu"""
    family = ''
    is_integer = False

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> str:
        params = ','.join(f"{k}={v}" for k, v in self.__dict__.items())
        return f"{self.family}({params})"


@dataclass(frozen=True)
class Normal(MarginalSpec):
    mu: float = 0.0
    sigma: float = 1.0
    family = 'normal'

    def __post_init__(self):
        if not self.sigma > 0:
            raise ParamError(f"Normal sigma must be positive, got {self.sigma}")

    def sample(self, rng, shape):
        return rng.normal(self.mu, self.sigma, size=shape)


@dataclass(frozen=True)
class StudentT(MarginalSpec):
    df: float = 2.0
    family = 'student_t'

    def __post_init__(self):
        if not self.df > 0:
            raise ParamError(f"Student-t degrees of freedom must be positive, got {self.df}")

    def sample(self, rng, shape):
        return rng.standard_t(self.df, size=shape)


@dataclass(frozen=True)
class Exponential(MarginalSpec):
    rate: float = 1.0
    family = 'exponential'

    def __post_init__(self):
        if not self.rate > 0:
            raise ParamError(f"Exponential rate must be positive, got {self.rate}")

    def sample(self, rng, shape):
        return rng.exponential(1.0 / self.rate, size=shape)


@dataclass(frozen=True)
class Uniform(MarginalSpec):
    low: float = 0.0
    high: float = 1.0
    family = 'uniform'

    def __post_init__(self):
        if not self.low < self.high:
            raise ParamError(f"Uniform needs low < high, got ({self.low}, {self.high})")

    def sample(self, rng, shape):
        return rng.uniform(self.low, self.high, size=shape)


@dataclass(frozen=True)
class Poisson(MarginalSpec):
    mean: float = 5.0
    family = 'poisson'
    is_integer = True

    def __post_init__(self):
        if not self.mean > 0:
            raise ParamError(f"Poisson mean must be positive, got {self.mean}")

    def sample(self, rng, shape):
        return rng.poisson(self.mean, size=shape)


@dataclass(frozen=True)
class ZeroInflatedPoisson(MarginalSpec):
    """Zero with probability `zero_prob`, else Poisson with mean mean / (1 - zero_prob)"""
    zero_prob: float = 0.9
    mean: float = 5.0
    family = 'zip'
    is_integer = True

    def __post_init__(self):
        if not 0 <= self.zero_prob < 1:
            raise ParamError(f"ZIP zero probability must lie in [0, 1), got {self.zero_prob}")
        if not self.mean > 0:
            raise ParamError(f"ZIP mean must be positive, got {self.mean}")

    @property
    def poisson_mean(self) -> float:
        return self.mean / (1.0 - self.zero_prob)

    def sample(self, rng, shape):
        counts = rng.poisson(self.poisson_mean, size=shape)
        keep = rng.random(shape) >= self.zero_prob
        return counts * keep


@dataclass(frozen=True)
class Bernoulli(MarginalSpec):
    p: float = 0.5
    family = 'bernoulli'
    is_integer = True

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ParamError(f"Bernoulli p must lie in [0, 1], got {self.p}")

    def sample(self, rng, shape):
        return rng.binomial(1, self.p, size=shape)


@dataclass(frozen=True)
class Laplace(MarginalSpec):
    loc: float = 0.0
    scale: float = 1.0
    family = 'laplace'

    def __post_init__(self):
        if not self.scale > 0:
            raise ParamError(f"Laplace scale must be positive, got {self.scale}")

    def sample(self, rng, shape):
        return rng.laplace(self.loc, self.scale, size=shape)


@dataclass(frozen=True)
class SkewNormal(MarginalSpec):
    loc: float = 0.0
    scale: float = 1.0
    shape: float = 10.0
    family = 'skew_normal'

    def __post_init__(self):
        if not self.scale > 0:
            raise ParamError(f"Skew-normal scale must be positive, got {self.scale}")

    def sample(self, rng, shape):
        return stats.skewnorm.rvs(self.shape, loc=self.loc, scale=self.scale, size=shape, random_state=rng)


@dataclass(frozen=True)
class Weibull(MarginalSpec):
    shape: float = 1.0
    scale: float = 1.5
    family = 'weibull'

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ParamError(f"Weibull shape and scale must be positive, got ({self.shape}, {self.scale})")

    def sample(self, rng, shape):
        return self.scale * rng.weibull(self.shape, size=shape)


@dataclass(frozen=True)
class NormalMixture(MarginalSpec):
    weights: Tuple[float, ...] = (0.5, 0.5)
    components: Tuple[Tuple[float, float], ...] = ((-9.0, 1.0), (9.0, 1.0))
    family = 'normal_mixture'

    def __post_init__(self):
        object.__setattr__(self, 'weights', tuple(float(w) for w in self.weights))
        object.__setattr__(self, 'components', tuple(tuple(float(x) for x in c) for c in self.components))
        if len(self.weights) != len(self.components) or not self.weights:
            raise ParamError("Mixture needs one weight per component")
        if min(self.weights) < 0 or abs(sum(self.weights) - 1) > 1e-9:
            raise ParamError(f"Mixture weights must be a probability vector, got {self.weights}")
        if any(len(c) != 2 or c[1] <= 0 for c in self.components):
            raise ParamError(f"Mixture components must be (mu, sigma) with sigma > 0, got {self.components}")

    def sample(self, rng, shape):
        which = rng.choice(len(self.weights), size=shape, p=self.weights)
        mus = np.array([c[0] for c in self.components])
        sigmas = np.array([c[1] for c in self.components])
        return rng.normal(mus[which], sigmas[which])


@dataclass(frozen=True)
class ScaledPoissonProduct(MarginalSpec):
    """Bernoulli(p) * Poisson(mean), drawn independently per cell"""
    p: float = 0.2
    mean: float = 5.0
    family = 'scaled_poisson'
    is_integer = True

    def __post_init__(self):
        if not 0 <= self.p <= 1 or not self.mean > 0:
            raise ParamError(f"Invalid Bernoulli-Poisson parameters ({self.p}, {self.mean})")

    def sample(self, rng, shape):
        return rng.binomial(1, self.p, size=shape) * rng.poisson(self.mean, size=shape)


MARGINALS = {cls.family: cls for cls in (
    Normal, StudentT, Exponential, Uniform, Poisson, ZeroInflatedPoisson, Bernoulli,
    Laplace, SkewNormal, Weibull, NormalMixture, ScaledPoissonProduct
)}


def marginal_from_config(config: Union[str, Dict[str, Any], MarginalSpec]) -> MarginalSpec:
    """Build a marginal from `{'family': 'poisson', 'mean': 5}` or a bare family name"""
    if isinstance(config, MarginalSpec):
        return config
    if isinstance(config, str):
        config = {'family': config}
    params = dict(config)
    family = str(params.pop('family', '')).lower()
    if family not in MARGINALS:
        raise ConfigError(f"Unknown marginal family '{family}', choose from {sorted(MARGINALS)}")
    try:
        return MARGINALS[family](**params)
    except TypeError as e:
        raise ConfigError(f"Bad parameters for {family}: {e}") from e


# ---------------------------------------------------------------------------
# Contamination
# ---------------------------------------------------------------------------

class ContaminationModel(str, Enum):
    FIXED_ADD = 'fixed_add'
    SYMMETRIC_ADD = 'symmetric_add'
    POISSON_ADD = 'poisson_add'


@dataclass(frozen=True)
class ContaminationSpec:
    fraction: float
    model: ContaminationModel
    value: float

    def __post_init__(self):
        try:
            object.__setattr__(self, 'model', ContaminationModel(self.model))
        except ValueError as e:
            raise ConfigError(f"Unknown contamination model '{self.model}'") from e
        if not 0 <= self.fraction <= 1:
            raise ParamError(f"Contamination fraction must lie in [0, 1], got {self.fraction}")
        if self.model is ContaminationModel.POISSON_ADD and not self.value > 0:
            raise ParamError(f"Poisson contamination mean must be positive, got {self.value}")

    @property
    def keeps_integers(self) -> bool:
        return self.model is ContaminationModel.POISSON_ADD or float(self.value).is_integer()

    def cell_count(self, cells: int) -> int:
        return int(math.floor(self.fraction * cells + 0.5))

    def describe(self) -> str:
        return f"{self.model.value}({self.value})@{self.fraction}"


def contaminate_values(values: np.ndarray, spec: ContaminationSpec, rng: np.random.Generator,
                       integer: bool) -> np.ndarray:
    """Contaminate a frame or a stack of frames in place of a copy"""
    if spec.model is ContaminationModel.POISSON_ADD and not integer:
        raise ModelError("Poisson contamination applies to count frames only")
    values = np.asarray(values)
    single = values.ndim == 2
    stack = values[np.newaxis] if single else values
    count, rows, cols = stack.shape
    k = spec.cell_count(rows * cols)

    dtype = np.int64 if integer and spec.keeps_integers else np.float64
    flat = stack.reshape(count, rows * cols).astype(dtype)
    if k > 0:
        # k distinct cells per frame, uniformly without replacement
        cells = np.argsort(rng.random((count, rows * cols)), axis=1)[:, :k]
        if spec.model is ContaminationModel.FIXED_ADD:
            shift = np.full((count, k), spec.value)
        elif spec.model is ContaminationModel.SYMMETRIC_ADD:
            shift = np.where(rng.random((count, k)) < 0.5, -spec.value, spec.value)
        else:
            shift = rng.poisson(spec.value, size=(count, k))
        flat[np.arange(count)[:, np.newaxis], cells] += shift.astype(dtype)

    result = flat.reshape(count, rows, cols)
    return result[0] if single else result


def contaminate(g: Union[RealGrid, CountGrid], spec: ContaminationSpec, rng: np.random.Generator):
    integer = isinstance(g, CountGrid)
    values = contaminate_values(g.values, spec, rng, integer)
    if integer and values.dtype.kind == 'i' and (values >= 0).all():
        return CountGrid(values)
    return RealGrid(values)


# ---------------------------------------------------------------------------
# Field generators
# ---------------------------------------------------------------------------

def binom_thin(x, alpha: float, rng: np.random.Generator):
    """Binomial thinning alpha o x, elementwise for arrays"""
    if not 0 <= alpha < 1:
        raise ParamError(f"Thinning probability must lie in [0, 1), got {alpha}")
    if np.any(np.asarray(x) < 0):
        raise ParamError("Binomial thinning needs nonnegative counts")
    return rng.binomial(x, alpha)


def unilateral_sweep(innovations: np.ndarray, lag: int,
                     combine: Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
    """Solve a causal recursion Y[i,j] = f(Y[i-L,j], Y[i,j-L], Y[i-L,j-L], e[i,j]) with zero boundary

    Cells on one anti-diagonal depend only on earlier anti-diagonals, so each
    diagonal is filled in one vectorised step for the whole stack.
    """
    count, rows, cols = innovations.shape
    padded = np.zeros((count, rows + lag, cols + lag), dtype=innovations.dtype)
    for k in range(rows + cols - 1):
        i = np.arange(max(0, k - cols + 1), min(k, rows - 1) + 1)
        j = k - i
        up = padded[:, i, j + lag]
        left = padded[:, i + lag, j]
        diag = padded[:, i, j]
        padded[:, i + lag, j + lag] = combine(up, left, diag, innovations[:, i, j])
    return padded[:, lag:, lag:]


def _check_sar(alpha: Sequence[float], count: int, name: str):
    if len(alpha) != count:
        raise ParamError(f"{name} needs {count} coefficients, got {len(alpha)}")
    if math.fsum(abs(a) for a in alpha) >= 1:
        raise StationarityError(f"{name} coefficients {tuple(alpha)} violate sum |coef| < 1")


def _check_thinning(alpha: Sequence[float], name: str, upper_open: bool = True):
    if len(alpha) != 3:
        raise ParamError(f"{name} needs 3 coefficients, got {len(alpha)}")
    for a in alpha:
        if a < 0 or (a >= 1 if upper_open else a > 1):
            raise ParamError(f"{name} thinning coefficient {a} outside {'[0, 1)' if upper_open else '[0, 1]'}")


def _check_powers(powers: Sequence[int], count: int):
    if len(powers) != count or any(p not in (1, 2) for p in powers):
        raise ParamError(f"Powers must be {count} values from {{1, 2}}, got {tuple(powers)}")


def sar_field(alpha, rows: int, cols: int, burn: int, lag: int, innovation: MarginalSpec,
              rng: np.random.Generator, count: int) -> np.ndarray:
    a1, a2, a3 = alpha
    eps = np.asarray(innovation.sample(rng, (count, rows + burn, cols + burn)), dtype=np.float64)
    field_ = unilateral_sweep(eps, lag, lambda up, left, diag, e: a1 * up + a2 * left + a3 * diag + e)
    return field_[:, burn:, burn:]


def sinar_field(alpha, rows: int, cols: int, burn: int, lag: int, innovation: MarginalSpec,
                rng: np.random.Generator, count: int) -> np.ndarray:
    a1, a2, a3 = alpha
    eps = np.asarray(innovation.sample(rng, (count, rows + burn, cols + burn)), dtype=np.int64)

    def combine(up, left, diag, e):
        return rng.binomial(up, a1) + rng.binomial(left, a2) + rng.binomial(diag, a3) + e

    field_ = unilateral_sweep(eps, lag, combine)
    return field_[:, burn:, burn:]


def sqma_from_innovations(beta, powers, eps: np.ndarray, lag: int = 1) -> np.ndarray:
    """Unilateral QMA field from an innovation stack of shape (count, m+1+L, n+1+L)"""
    b1, b2, b3 = beta
    a, b, c = powers
    L = lag
    return (b1 * eps[..., :-L, L:] ** a + b2 * eps[..., L:, :-L] ** b
            + b3 * eps[..., :-L, :-L] ** c + eps[..., L:, L:])


def sqinma_from_innovations(beta, powers, eps: np.ndarray, rng: np.random.Generator, lag: int = 1) -> np.ndarray:
    b1, b2, b3 = beta
    a, b, c = powers
    L = lag
    return (rng.binomial(eps[..., :-L, L:] ** a, b1) + rng.binomial(eps[..., L:, :-L] ** b, b2)
            + rng.binomial(eps[..., :-L, :-L] ** c, b3) + eps[..., L:, L:])


def bilateral_neighbours(field_: np.ndarray, a) -> np.ndarray:
    """A*Y for the first-order simultaneous stencil, zero outside the grid"""
    a1, a2, a3, a4 = a
    out = np.zeros_like(field_)
    out[..., 1:, :] += a1 * field_[..., :-1, :]
    out[..., :, 1:] += a2 * field_[..., :, :-1]
    out[..., :, :-1] += a3 * field_[..., :, 1:]
    out[..., :-1, :] += a4 * field_[..., 1:, :]
    return out


def solve_bilateral_sar(a, eps: np.ndarray, tol: float = 1e-8, max_iter: int = 10000) -> np.ndarray:
    """Jacobi iteration for Y = A*Y + eps until every frame's relative residual is <= tol"""
    if not tol > 0:
        raise ParamError(f"Solver tolerance must be positive, got {tol}")
    eps = np.asarray(eps, dtype=np.float64)
    scale = np.sqrt(np.sum(eps * eps, axis=(-2, -1)))
    scale = np.where(scale > 0, scale, 1.0)

    field_ = eps
    neighbours = bilateral_neighbours(field_, a)
    for iteration in range(1, max_iter + 1):
        field_ = neighbours + eps
        neighbours = bilateral_neighbours(field_, a)
        residual = eps - field_ + neighbours
        rel = np.sqrt(np.sum(residual * residual, axis=(-2, -1))) / scale
        if np.max(rel) <= tol:
            sop_logger.debug(f"Bilateral SAR solve converged in {iteration} iterations")
            return field_
    raise ConvergenceError(f"Bilateral SAR solve did not reach tol={tol} in {max_iter} iterations")


def bilateral_sqma_from_innovations(b, powers, eps: np.ndarray) -> np.ndarray:
    """Bilateral QMA field from an innovation stack of shape (count, m+3, n+3)"""
    b1, b2, b3, b4 = b
    pa, pb, pc, pd = powers
    return (b1 * eps[..., :-2, :-2] ** pa + b2 * eps[..., 2:, :-2] ** pb
            + b3 * eps[..., 2:, 2:] ** pc + b4 * eps[..., :-2, 2:] ** pd
            + eps[..., 1:-1, 1:-1])


# ---------------------------------------------------------------------------
# Process specification
# ---------------------------------------------------------------------------

class ProcessKind(str, Enum):
    IID = 'iid'
    SAR = 'sar'
    SINAR = 'sinar'
    SQMA = 'sqma'
    SQINMA = 'sqinma'
    BILATERAL_SAR = 'bilateral_sar'
    BILATERAL_SQMA = 'bilateral_sqma'


COEFFICIENT_COUNT = {
    ProcessKind.IID: 0, ProcessKind.SAR: 3, ProcessKind.SINAR: 3, ProcessKind.SQMA: 3,
    ProcessKind.SQINMA: 3, ProcessKind.BILATERAL_SAR: 4, ProcessKind.BILATERAL_SQMA: 4,
}
COUNT_PROCESSES = {ProcessKind.SINAR, ProcessKind.SQINMA}


@dataclass(frozen=True)
class DgpSpec:
    process: ProcessKind
    coefficients: Tuple[float, ...] = ()
    powers: Optional[Tuple[int, ...]] = None
    innovation: Optional[MarginalSpec] = None
    lag: int = 1
    burn: int = 50
    buffer: int = 25
    tol: float = 1e-8
    max_iter: int = 10000
    contamination: Optional[ContaminationSpec] = None

    def __post_init__(self):
        try:
            process = ProcessKind(self.process)
        except ValueError as e:
            raise ConfigError(f"Unknown process '{self.process}'") from e
        object.__setattr__(self, 'process', process)
        object.__setattr__(self, 'coefficients', tuple(float(c) for c in self.coefficients))

        if self.innovation is None:
            default = Poisson(5.0) if process in COUNT_PROCESSES else Normal(0.0, 1.0)
            object.__setattr__(self, 'innovation', default)
        elif not isinstance(self.innovation, MarginalSpec):
            object.__setattr__(self, 'innovation', marginal_from_config(self.innovation))

        needed = COEFFICIENT_COUNT[process]
        if len(self.coefficients) != needed:
            raise ParamError(f"{process.value} needs {needed} coefficients, got {len(self.coefficients)}")

        if process in (ProcessKind.SQMA, ProcessKind.SQINMA, ProcessKind.BILATERAL_SQMA):
            powers = self.powers if self.powers is not None else (1,) * needed
            _check_powers(powers, needed)
            object.__setattr__(self, 'powers', tuple(int(p) for p in powers))

        if int(self.lag) != self.lag or self.lag < 1:
            raise ParamError(f"Lag must be a positive integer, got {self.lag}")
        if self.burn < 0 or self.buffer < 0:
            raise ParamError(f"Burn-in and buffer must be nonnegative, got ({self.burn}, {self.buffer})")

        if process is ProcessKind.SAR:
            _check_sar(self.coefficients, 3, 'SAR')
        elif process is ProcessKind.BILATERAL_SAR:
            _check_sar(self.coefficients, 4, 'Bilateral SAR')
        elif process is ProcessKind.SINAR:
            _check_thinning(self.coefficients, 'SINAR')
            if math.fsum(self.coefficients) >= 1:
                raise StationarityError(f"SINAR coefficients {self.coefficients} violate sum < 1")
        elif process is ProcessKind.SQINMA:
            _check_thinning(self.coefficients, 'SQINMA', upper_open=False)
        if process in COUNT_PROCESSES and not self.innovation.is_integer:
            raise ParamError(f"{process.value} needs integer innovations, got {self.innovation.family}")

    @classmethod
    def iid(cls, marginal: MarginalSpec, **kwargs) -> 'DgpSpec':
        return cls(ProcessKind.IID, innovation=marginal, **kwargs)

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> 'DgpSpec':
        params = dict(config)
        contamination = params.pop('contamination', None)
        if contamination:
            try:
                contamination = ContaminationSpec(**contamination)
            except TypeError as e:
                raise ConfigError(f"Bad contamination settings: {e}") from e
        innovation = params.pop('innovation', None)
        if innovation is not None:
            innovation = marginal_from_config(innovation)
        powers = params.pop('powers', None)
        try:
            return cls(
                process=params.pop('process', 'iid'),
                coefficients=tuple(params.pop('coefficients', ())),
                powers=tuple(powers) if powers is not None else None,
                innovation=innovation,
                contamination=contamination or None,
                **params
            )
        except TypeError as e:
            raise ConfigError(f"Bad DGP settings: {e}") from e

    @property
    def is_integer(self) -> bool:
        """Frames hold integer values (jittering applies)"""
        if self.process in COUNT_PROCESSES:
            base = True
        elif self.process is ProcessKind.IID:
            base = self.innovation.is_integer
        else:
            base = False
        return base and (self.contamination is None or self.contamination.keeps_integers)

    def describe(self) -> str:
        text = self.process.value
        if self.coefficients:
            text += '(' + ','.join(f"{c:g}" for c in self.coefficients) + ')'
        if self.powers:
            text += ' powers=' + ''.join(str(p) for p in self.powers)
        if self.lag != 1:
            text += f" lag={self.lag}"
        text += f" {self.innovation.describe()}"
        if self.contamination is not None:
            text += f" + {self.contamination.describe()}"
        return text

    def sample_frames(self, m: int, n: int, rng: np.random.Generator, count: int = 1) -> np.ndarray:
        """Stack of `count` independent frames, shape (count, m+1, n+1)"""
        if m < 1 or n < 1:
            raise ParamError(f"Grid needs m, n >= 1, got ({m}, {n})")
        rows, cols = m + 1, n + 1
        p = self.process
        c = self.coefficients
        if p is ProcessKind.IID:
            frames = self.innovation.sample(rng, (count, rows, cols))
        elif p is ProcessKind.SAR:
            frames = sar_field(c, rows, cols, self.burn, self.lag, self.innovation, rng, count)
        elif p is ProcessKind.SINAR:
            frames = sinar_field(c, rows, cols, self.burn, self.lag, self.innovation, rng, count)
        elif p is ProcessKind.SQMA:
            eps = self.innovation.sample(rng, (count, rows + self.lag, cols + self.lag))
            frames = sqma_from_innovations(c, self.powers, np.asarray(eps, dtype=np.float64), self.lag)
        elif p is ProcessKind.SQINMA:
            eps = np.asarray(self.innovation.sample(rng, (count, rows + self.lag, cols + self.lag)), dtype=np.int64)
            frames = sqinma_from_innovations(c, self.powers, eps, rng, self.lag)
        elif p is ProcessKind.BILATERAL_SAR:
            b = self.buffer
            eps = self.innovation.sample(rng, (count, rows + 2 * b, cols + 2 * b))
            frames = solve_bilateral_sar(c, eps, self.tol, self.max_iter)[:, b:b + rows, b:b + cols]
        else:
            eps = self.innovation.sample(rng, (count, rows + 2, cols + 2))
            frames = bilateral_sqma_from_innovations(c, self.powers, np.asarray(eps, dtype=np.float64))

        frames = np.asarray(frames)
        if self.contamination is not None:
            base_integer = frames.dtype.kind in 'iu'
            frames = contaminate_values(frames, self.contamination, rng, base_integer)
        return np.ascontiguousarray(frames)

    def generate(self, m: int, n: int, rng: np.random.Generator) -> Union[RealGrid, CountGrid]:
        frame = self.sample_frames(m, n, rng, 1)[0]
        if frame.dtype.kind in 'iu' and (frame >= 0).all():
            return CountGrid(frame)
        return RealGrid(frame)


# Single-frame entry points

def gen_iid(marg: MarginalSpec, m: int, n: int, rng: np.random.Generator):
    return DgpSpec.iid(marg).generate(m, n, rng)


def gen_sar11(alpha, m: int, n: int, burn: int, rng: np.random.Generator,
              innovation: Optional[MarginalSpec] = None, lag: int = 1) -> RealGrid:
    return DgpSpec(ProcessKind.SAR, alpha, innovation=innovation, lag=lag, burn=burn).generate(m, n, rng)


def gen_sinar11(alpha, innovation: MarginalSpec, m: int, n: int, burn: int, rng: np.random.Generator,
                lag: int = 1) -> CountGrid:
    return DgpSpec(ProcessKind.SINAR, alpha, innovation=innovation, lag=lag, burn=burn).generate(m, n, rng)


def gen_sqma11(beta, powers, m: int, n: int, rng: np.random.Generator,
               innovation: Optional[MarginalSpec] = None, lag: int = 1) -> RealGrid:
    return DgpSpec(ProcessKind.SQMA, beta, powers=powers, innovation=innovation, lag=lag).generate(m, n, rng)


def gen_sqinma11(beta, powers, m: int, n: int, rng: np.random.Generator,
                 innovation: Optional[MarginalSpec] = None, lag: int = 1) -> CountGrid:
    return DgpSpec(ProcessKind.SQINMA, beta, powers=powers, innovation=innovation, lag=lag).generate(m, n, rng)


def gen_bilateral_sar1(a, m: int, n: int, buffer: int, tol: float, rng: np.random.Generator,
                       innovation: Optional[MarginalSpec] = None) -> RealGrid:
    return DgpSpec(ProcessKind.BILATERAL_SAR, a, innovation=innovation, buffer=buffer, tol=tol).generate(m, n, rng)


def gen_bilateral_sqma1(b, powers, m: int, n: int, rng: np.random.Generator,
                        innovation: Optional[MarginalSpec] = None) -> RealGrid:
    return DgpSpec(ProcessKind.BILATERAL_SQMA, b, powers=powers, innovation=innovation).generate(m, n, rng)
