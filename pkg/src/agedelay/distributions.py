"""Service-time and inter-arrival distribution families.

Every service family is parameterized so that the mean service time is
exactly 1/mu for any admissible shape:

  deterministic  S = 1/mu
  exponential    rate mu
  lognormal      S = exp(-log(mu) - sigma^2/2 + sigma*N),  N ~ N(0,1)
  pareto         P(S > x) = (theta/x)^alpha for x > theta,
                 theta = (alpha-1)/(mu*alpha), alpha > 1
  weibull        P(S > x) = exp(-(x/beta)^k),
                 beta = 1/(mu*Gamma(1+1/k)), k > 0

Inter-arrival families are deterministic (X = 1/lambda) and exponential
(Poisson process at rate lambda).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc

from .errors import ParameterError

SERVICE_FAMILIES = ("det", "exp", "lognormal", "pareto", "weibull")
ARRIVAL_FAMILIES = ("det", "exp")

_SQRT2 = math.sqrt(2.0)


def _norm_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / _SQRT2)


@dataclass(frozen=True)
class ServiceDistribution:
    """One service-time law with mean pinned to 1/mu.

    family: one of 'det', 'exp', 'lognormal', 'pareto', 'weibull'.
    mu:     service rate (mean service time is 1/mu).
    shape:  sigma for lognormal, alpha for pareto, k for weibull;
            must be None for det/exp.
    """

    family: str
    mu: float
    shape: float | None = None

    def __post_init__(self):
        if self.family not in SERVICE_FAMILIES:
            raise ParameterError(f"unknown service family {self.family!r}")
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ParameterError(f"service rate mu must be positive, got {self.mu}")
        if self.family in ("det", "exp"):
            if self.shape is not None:
                raise ParameterError(f"{self.family} service takes no shape parameter")
            return
        if self.shape is None or not math.isfinite(self.shape):
            raise ParameterError(f"{self.family} service requires a finite shape parameter")
        if self.family == "pareto" and not self.shape > 1:
            raise ParameterError(f"pareto requires alpha > 1, got {self.shape}")
        if self.family in ("lognormal", "weibull") and not self.shape > 0:
            raise ParameterError(f"{self.family} requires a positive shape, got {self.shape}")

    # ---- derived parameters -------------------------------------------------

    @property
    def pareto_scale(self) -> float:
        """theta(alpha) = (alpha-1)/(mu*alpha)."""
        return (self.shape - 1.0) / (self.mu * self.shape)

    @property
    def weibull_scale(self) -> float:
        """beta(k) = 1/(mu*Gamma(1+1/k))."""
        return 1.0 / (self.mu * math.gamma(1.0 + 1.0 / self.shape))

    @property
    def lognormal_location(self) -> float:
        """Location of log(S), chosen so E[S] = 1/mu."""
        return -math.log(self.mu) - 0.5 * self.shape * self.shape

    # ---- moments ------------------------------------------------------------

    def mean(self) -> float:
        return 1.0 / self.mu

    def second_moment(self) -> float:
        """E[S^2]; math.inf when it diverges (pareto with alpha <= 2)."""
        mu = self.mu
        if self.family == "det":
            return 1.0 / (mu * mu)
        if self.family == "exp":
            return 2.0 / (mu * mu)
        if self.family == "lognormal":
            return math.exp(self.shape * self.shape) / (mu * mu)
        if self.family == "pareto":
            a = self.shape
            if a <= 2.0:
                return math.inf
            th = self.pareto_scale
            return a * th * th / (a - 2.0)
        b = self.weibull_scale
        return b * b * math.gamma(1.0 + 2.0 / self.shape)

    def moments(self) -> tuple[float, float]:
        """(E[S], E[S^2]), the second possibly math.inf."""
        return self.mean(), self.second_moment()

    def variance(self) -> float:
        m2 = self.second_moment()
        if math.isinf(m2):
            return math.inf
        return m2 - 1.0 / (self.mu * self.mu)

    def median(self) -> float:
        if self.family == "det":
            return 1.0 / self.mu
        if self.family == "exp":
            return math.log(2.0) / self.mu
        if self.family == "lognormal":
            return math.exp(self.lognormal_location)
        if self.family == "pareto":
            return self.pareto_scale * 2.0 ** (1.0 / self.shape)
        return self.weibull_scale * math.log(2.0) ** (1.0 / self.shape)

    # ---- tail and truncated moments ------------------------------------------

    def tail_prob(self, x: float) -> float:
        """P(S > x), exact closed form."""
        if not x > 0:
            raise ParameterError(f"threshold x must be positive, got {x}")
        if self.family == "det":
            return 1.0 if x < 1.0 / self.mu else 0.0
        if self.family == "exp":
            return math.exp(-self.mu * x)
        if self.family == "lognormal":
            z = (math.log(x) - self.lognormal_location) / self.shape
            return 0.5 * math.erfc(z / _SQRT2)
        if self.family == "pareto":
            th = self.pareto_scale
            if x <= th:
                return 1.0
            return (th / x) ** self.shape
        return math.exp(-((x / self.weibull_scale) ** self.shape))

    def expected_min_with(self, x: float) -> float:
        """E[min(S, x)] = integral of P(S > t) over (0, x), in closed form."""
        if not x > 0:
            raise ParameterError(f"threshold x must be positive, got {x}")
        mu = self.mu
        if self.family == "det":
            return min(x, 1.0 / mu)
        if self.family == "exp":
            return -math.expm1(-mu * x) / mu
        if self.family == "lognormal":
            # E[S 1{S<x}] + x P(S>x) with the lognormal partial expectation
            m, s = self.lognormal_location, self.shape
            z = (math.log(x) - m) / s
            below = (1.0 / mu) * _norm_cdf(z - s)
            return below + x * 0.5 * math.erfc(z / _SQRT2)
        if self.family == "pareto":
            th, a = self.pareto_scale, self.shape
            if x <= th:
                return x
            return th + th * (1.0 - (th / x) ** (a - 1.0)) / (a - 1.0)
        b, k = self.weibull_scale, self.shape
        u = (x / b) ** k
        below = (1.0 / mu) * gammainc(1.0 + 1.0 / k, u)
        return below + x * math.exp(-u)

    def truncated_mean_below(self, x: float) -> float:
        """E[S 1{S < x}], evaluated as E[min(S,x)] - x*P(S > x)."""
        val = self.expected_min_with(x) - x * self.tail_prob(x)
        return val if val > 0.0 else 0.0

    # ---- sampling -------------------------------------------------------------

    def sample(self, rng: np.random.Generator) -> float:
        """One strictly positive draw from this law."""
        if self.family == "det":
            return 1.0 / self.mu
        if self.family == "exp":
            return rng.standard_exponential() / self.mu
        if self.family == "lognormal":
            return math.exp(self.lognormal_location + self.shape * rng.standard_normal())
        if self.family == "pareto":
            return self.pareto_scale * math.exp(rng.standard_exponential() / self.shape)
        return self.weibull_scale * rng.standard_exponential() ** (1.0 / self.shape)

    def sample_n(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n i.i.d. draws as a float64 array, same transforms as sample()."""
        if self.family == "det":
            return np.full(n, 1.0 / self.mu)
        if self.family == "exp":
            return rng.standard_exponential(n) / self.mu
        if self.family == "lognormal":
            z = rng.standard_normal(n)
            return np.exp(self.lognormal_location + self.shape * z)
        if self.family == "pareto":
            return self.pareto_scale * np.exp(rng.standard_exponential(n) / self.shape)
        return self.weibull_scale * rng.standard_exponential(n) ** (1.0 / self.shape)

    def label(self) -> str:
        if self.shape is None:
            return self.family
        return f"{self.family} {_SHAPE_KEY[self.family]}={self.shape:g}"


@dataclass(frozen=True)
class ArrivalProcess:
    """Renewal generation process: 'det' (periodic) or 'exp' (Poisson) at rate lam."""

    family: str
    lam: float

    def __post_init__(self):
        if self.family not in ARRIVAL_FAMILIES:
            raise ParameterError(f"unknown arrival family {self.family!r}")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ParameterError(f"arrival rate lambda must be positive, got {self.lam}")

    def mean(self) -> float:
        return 1.0 / self.lam

    def second_moment(self) -> float:
        if self.family == "det":
            return 1.0 / (self.lam * self.lam)
        return 2.0 / (self.lam * self.lam)

    def moments(self) -> tuple[float, float]:
        return self.mean(), self.second_moment()

    def sample(self, rng: np.random.Generator) -> float:
        if self.family == "det":
            return 1.0 / self.lam
        return rng.standard_exponential() / self.lam

    def sample_n(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.family == "det":
            return np.full(n, 1.0 / self.lam)
        return rng.standard_exponential(n) / self.lam

    def label(self) -> str:
        return self.family


_SHAPE_KEY = {"lognormal": "sigma", "pareto": "alpha", "weibull": "k"}
_FAMILY_ALIASES = {
    "det": "det",
    "deterministic": "det",
    "exp": "exp",
    "exponential": "exp",
    "lognormal": "lognormal",
    "pareto": "pareto",
    "weibull": "weibull",
}


def _parse_family_spec(spec: str) -> tuple[str, dict[str, float]]:
    tokens = spec.split()
    if not tokens:
        raise ParameterError("empty distribution spec")
    family = _FAMILY_ALIASES.get(tokens[0].lower())
    if family is None:
        raise ParameterError(f"unknown distribution family {tokens[0]!r}")
    kwargs: dict[str, float] = {}
    for tok in tokens[1:]:
        key, sep, val = tok.partition("=")
        if not sep:
            raise ParameterError(f"expected key=value, got {tok!r} in {spec!r}")
        try:
            kwargs[key.lower()] = float(val)
        except ValueError:
            raise ParameterError(f"bad numeric value in {tok!r}") from None
    return family, kwargs


def parse_service(spec: str, mu: float) -> ServiceDistribution:
    """Build a ServiceDistribution from a CLI/config string.

    Examples: 'det', 'exp', 'pareto alpha=1.5', 'lognormal sigma=2.0',
    'weibull k=0.5'.
    """
    family, kwargs = _parse_family_spec(spec)
    if family in ("det", "exp"):
        if kwargs:
            raise ParameterError(f"{family} service takes no parameters, got {spec!r}")
        return ServiceDistribution(family, mu)
    key = _SHAPE_KEY[family]
    if set(kwargs) != {key}:
        raise ParameterError(f"{family} service requires exactly {key}=<value>, got {spec!r}")
    return ServiceDistribution(family, mu, kwargs[key])


def parse_arrival(spec: str, lam: float) -> ArrivalProcess:
    """Build an ArrivalProcess from 'det' or 'exp'."""
    family, kwargs = _parse_family_spec(spec)
    if family not in ARRIVAL_FAMILIES or kwargs:
        raise ParameterError(f"arrival spec must be 'det' or 'exp', got {spec!r}")
    return ArrivalProcess(family, lam)
