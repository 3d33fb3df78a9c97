"""Portfolio-selection benchmark suite.

Synthetic price histories are random walks with bounded fractional steps.
Each asset ``i`` is allocated ``sum_k 2**(k-1) * b * p_w * x_ik`` of the
budget through ``w`` binary variables, ``p_w = 1 / 2**(w-1)``.  The maximized
objective is::

    theta1 * sum_ik 2**(k-1) r_i x_ik
      - theta2 * (sum_ik 2**(k-1) b p_w x_ik - b)**2
      - theta3 * sum_{ik, jk'} 2**(k-1) 2**(k'-1) c_ij x_ik x_jk'

and the emitted QUBO is its exact negation, so the QUBO minimizer is the
best portfolio.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError
from .ising import IsingModel, Qubo, qubo_to_ising
from .seeding import hash64


@dataclass(frozen=True)
class SuiteConfig:
    m: int = 2
    w: int = 4
    b: float = 1.0
    n_f: int = 20
    theta: tuple[float, float, float] = (1.0, 10.0, 1.0)
    seed: int = 0
    volatility: float = 0.25
    price_range: tuple[float, float] = (1.0, 100.0)
    normalize: bool = True

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(float(t) for t in self.theta))
        if self.m < 1 or self.w < 1:
            raise ConfigError("need m >= 1 and w >= 1")
        if self.n_f < 2:
            raise ConfigError("need at least two price points")
        if not 0.0 <= self.volatility < 1.0:
            raise ConfigError("volatility must lie in [0, 1)")
        if len(self.theta) != 3 or any(t < 0 for t in self.theta):
            raise ConfigError("theta must be three nonnegative weights")
        lo, hi = self.price_range
        if not 0 < lo <= hi:
            raise ConfigError("price range must be positive")

    @property
    def n(self) -> int:
        return self.m * self.w

    @property
    def p_w(self) -> float:
        return 1.0 / 2 ** (self.w - 1)

    def with_seed(self, seed: int) -> SuiteConfig:
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d["seed"] = seed
        return SuiteConfig(**d)


@dataclass(frozen=True, eq=False)
class PriceData:
    a: np.ndarray  # (m, n_f) prices
    r: np.ndarray  # (m,) expected returns
    c: np.ndarray  # (m, m) scaled covariance


def price_statistics(a: np.ndarray, p_w: float) -> tuple[np.ndarray, np.ndarray]:
    """Expected returns (mean fractional step) and ``p_w**2``-scaled covariance."""
    a = np.asarray(a, dtype=np.float64)
    r = np.mean(a[:, 1:] / a[:, :-1] - 1.0, axis=1)
    shifted = a - a[:, :1]
    dev = shifted - shifted.mean(axis=1, keepdims=True)
    c = p_w ** 2 * (dev @ dev.T) / (a.shape[1] - 1)
    return r, c


def generate_prices(cfg: SuiteConfig) -> PriceData:
    rng = np.random.default_rng(cfg.seed)
    lo, hi = cfg.price_range
    start = rng.uniform(lo, hi, size=cfg.m)
    steps = 1.0 + rng.uniform(-cfg.volatility, cfg.volatility, size=(cfg.m, cfg.n_f - 1))
    a = np.empty((cfg.m, cfg.n_f))
    a[:, 0] = start
    a[:, 1:] = start[:, None] * np.cumprod(steps, axis=1)
    r, c = price_statistics(a, cfg.p_w)
    return PriceData(a, r, c)


def bit_weights(w: int) -> np.ndarray:
    return 2.0 ** np.arange(w)


def build_qubo(cfg: SuiteConfig, data: PriceData) -> Qubo:
    """Negated objective as a QUBO over ``x[i*w + k]`` (asset ``i``, bit ``k``)."""
    if data.r.shape != (cfg.m,) or data.c.shape != (cfg.m, cfg.m):
        raise DimensionError(f"price data does not describe m={cfg.m} assets")
    t1, t2, t3 = cfg.theta
    b, p_w = cfg.b, cfg.p_w
    n = cfg.n
    asset = np.repeat(np.arange(cfg.m), cfg.w)
    weight = np.tile(bit_weights(cfg.w), cfg.m)
    alloc = weight * b * p_w
    # x^2 = x folds the diagonal of both quadratic terms into q
    q = -t1 * weight * data.r[asset] - 2.0 * t2 * b * alloc + t2 * alloc ** 2 \
        + t3 * weight ** 2 * data.c[asset, asset]
    Q = {}
    for u in range(n):
        for v in range(u + 1, n):
            Q[(u, v)] = 2.0 * t2 * alloc[u] * alloc[v] + 2.0 * t3 * weight[u] * weight[v] * data.c[asset[u], asset[v]]
    return Qubo(n, q, Q, t2 * b * b)


def portfolio_objective(cfg: SuiteConfig, data: PriceData, x) -> float:
    """The maximized objective, evaluated term by term."""
    x = np.asarray(x, dtype=np.float64).reshape(cfg.m, cfg.w)
    t1, t2, t3 = cfg.theta
    weight = bit_weights(cfg.w)
    units = x @ weight
    ret = t1 * float(units @ data.r)
    budget = t2 * (cfg.b * cfg.p_w * units.sum() - cfg.b) ** 2
    risk = t3 * float(units @ data.c @ units)
    return ret - budget - risk


def normalize(model: IsingModel) -> IsingModel:
    """Scale so the largest ``|h_i|`` or ``|J_ij|`` is 1."""
    scale = max(np.max(np.abs(model.h), initial=0.0), max((abs(v) for v in model.J.values()), default=0.0))
    return model if scale == 0 else model.scaled(1.0 / scale)


def instance_seed(cfg: SuiteConfig, index: int) -> int:
    return hash64(cfg.seed, index)


def generate_instance(cfg: SuiteConfig, index: int) -> IsingModel:
    sub = cfg.with_seed(instance_seed(cfg, index))
    model = qubo_to_ising(build_qubo(sub, generate_prices(sub)))
    return normalize(model) if cfg.normalize else model


def generate_suite(cfg: SuiteConfig, count: int) -> list[IsingModel]:
    """``count`` independent instances; instance ``i`` uses seed ``hash64(cfg.seed, i)``."""
    if count < 0:
        raise ConfigError("count must be nonnegative")
    return [generate_instance(cfg, i) for i in range(count)]


def coupler_values(models) -> np.ndarray:
    """All ``J_ij`` values across ``models`` (histogram input)."""
    return np.array([v for m in models for _, v in sorted(m.J.items())])
