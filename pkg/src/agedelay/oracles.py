"""Closed-form and Monte-Carlo baselines the simulator is checked against.

These are independent of the event-driven engine: everything here is
computed from distribution moments, tail integrals, or direct sampling of
the station-independent quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .distributions import ArrivalProcess, ServiceDistribution
from .errors import ParameterError, StabilityError

# Heavy-tail limit direction per family: the sweep that drives the age
# floor while blowing up the second moment.
HEAVY_TAIL_LIMITS = {
    "pareto": "alpha -> 1+",
    "lognormal": "sigma -> +inf",
    "weibull": "k -> 0+",
}


def min_average_age(arrival: ArrivalProcess) -> float:
    """Floor on the time-average age over all policies and service laws.

    Equals E[X^2] / (2 E[X]): the average of the sawtooth obtained when
    every packet is delivered the instant it is generated.
    """
    m1, m2 = arrival.moments()
    return m2 / (2.0 * m1)


def pk_delay(lam: float, service: ServiceDistribution) -> float:
    """Pollaczek-Khinchine mean delay for a service-blind non-preemptive queue.

    D = (lam/2) E[S^2] / (1 - rho) + E[S] with rho = lam/mu, for Poisson
    arrivals.  Returns math.inf when E[S^2] diverges.
    """
    if not lam > 0:
        raise ParameterError(f"lambda must be positive, got {lam}")
    rho = lam / service.mu
    if rho >= 1.0:
        raise StabilityError(f"pk_delay needs rho < 1, got rho={rho}")
    m1, m2 = service.moments()
    if math.isinf(m2):
        return math.inf
    return 0.5 * lam * m2 / (1.0 - rho) + m1


def dd1_age(lam: float, mu: float) -> float:
    """Steady-state average age of the periodic-arrival deterministic-service queue.

    The sawtooth drops to 1/mu every 1/lam, so the time average is
    1/mu + 1/(2 lam).
    """
    if not (lam > 0 and mu > 0):
        raise ParameterError(f"rates must be positive, got lam={lam} mu={mu}")
    if not lam < mu:
        raise StabilityError(f"dd1_age needs lambda < mu, got lambda={lam} mu={mu}")
    return 1.0 / mu + 0.5 / lam


def pending_update_min(next_x: Callable[[], float], next_s: Callable[[], float]) -> float:
    """One draw of min over l >= 0 of (X_1 + ... + X_l + S_{l+1}).

    Stops as soon as the running arrival sum reaches the best candidate:
    service times are nonnegative, so no later candidate can be smaller.
    """
    best = next_s()
    partial = 0.0
    while True:
        partial += next_x()
        if partial >= best:
            return best
        cand = partial + next_s()
        if cand < best:
            best = cand


def gginf_age_estimate(
    arrival: ArrivalProcess,
    service: ServiceDistribution,
    n_samples: int = 100_000,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte-Carlo estimate of the infinite-server station's average age.

    The exact value is min_average_age(arrival) plus the expectation of the
    pending-update minimum; the expectation has no closed form for general
    families, so it is sampled.  Returns (estimate, standard error).
    """
    if n_samples < 1000:
        raise ParameterError(f"n_samples must be >= 1000, got {n_samples}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    next_x = lambda: arrival.sample(rng)  # noqa: E731
    next_s = lambda: service.sample(rng)  # noqa: E731
    z = np.fromiter(
        (pending_update_min(next_x, next_s) for _ in range(n_samples)),
        dtype=float,
        count=n_samples,
    )
    stderr = float(z.std(ddof=1) / math.sqrt(n_samples))
    return min_average_age(arrival) + float(z.mean()), stderr


@dataclass(frozen=True)
class LimitTable:
    """Tail/moment columns tabulated along a heavy-tail parameter sweep.

    shapes are ordered toward the family's limit (see HEAVY_TAIL_LIMITS);
    a None shape means the family has no parameter to sweep.  tail and
    truncated_mean have one row per shape and one column per threshold x;
    second_moment has one entry per shape (math.inf on the divergent
    branch).  Flags are None for the columns the table does not carry.
    """

    family: str
    shapes: tuple
    xs: tuple
    limit: str | None
    tail: np.ndarray | None = None
    truncated_mean: np.ndarray | None = None
    second_moment: np.ndarray | None = None
    columns_decreasing: bool | None = None
    second_moment_diverging: bool | None = None


def _sweep_distributions(family: str, shapes, mu: float):
    """Validate sweep direction and instantiate one distribution per shape."""
    if family in ("det", "exp"):
        if shapes:
            raise ParameterError(f"{family} has no shape parameter to sweep")
        return [ServiceDistribution(family, mu)], (None,)
    if family not in HEAVY_TAIL_LIMITS:
        raise ParameterError(f"unknown family {family!r}")
    shapes = tuple(float(s) for s in shapes)
    if not shapes:
        raise ParameterError("shape grid must be nonempty")
    diffs = [b - a for a, b in zip(shapes, shapes[1:])]
    if family == "lognormal":
        if any(d <= 0 for d in diffs):
            raise ParameterError("lognormal sweep must increase sigma toward +inf")
    else:
        if any(d >= 0 for d in diffs):
            limit = HEAVY_TAIL_LIMITS[family]
            raise ParameterError(f"{family} sweep must decrease toward its limit ({limit})")
    return [ServiceDistribution(family, mu, s) for s in shapes], shapes


def tail_decay_table(
    family: str,
    shapes: Sequence[float],
    xs: Sequence[float],
    mu: float,
    lam: float,
) -> LimitTable:
    """P(S > x) and E[S 1{S<x}] along the heavy-tail sweep, x >= 1/lam.

    Both quantities must vanish in the limit for the age floor to be
    approachable; the table flags whether every column is strictly
    decreasing along the sweep.
    """
    if not lam > 0:
        raise ParameterError(f"lambda must be positive, got {lam}")
    xs = tuple(float(x) for x in xs)
    if not xs:
        raise ParameterError("x grid must be nonempty")
    bad = [x for x in xs if x < 1.0 / lam - 1e-12]
    if bad:
        raise ParameterError(f"x grid values must be >= 1/lambda = {1.0 / lam}, got {bad}")
    dists, shape_out = _sweep_distributions(family, shapes, mu)
    tail = np.array([[d.tail_prob(x) for x in xs] for d in dists])
    trunc = np.array([[d.truncated_mean_below(x) for x in xs] for d in dists])
    if len(dists) >= 2:
        decreasing = bool(
            np.all(np.diff(tail, axis=0) < 0) and np.all(np.diff(trunc, axis=0) < 0)
        )
    else:
        decreasing = False
    return LimitTable(
        family=family,
        shapes=shape_out,
        xs=xs,
        limit=HEAVY_TAIL_LIMITS.get(family),
        tail=tail,
        truncated_mean=trunc,
        columns_decreasing=decreasing,
    )


def second_moment_table(
    family: str,
    shapes: Sequence[float],
    mu: float,
    divergence_threshold: float | None = None,
) -> LimitTable:
    """E[S^2] along the heavy-tail sweep, flagging divergence.

    The flag is True when some entry hits the infinite branch, or when the
    column is strictly increasing and its last finite value reaches the
    threshold (default 1e6 times the squared mean service time).
    """
    dists, shape_out = _sweep_distributions(family, shapes, mu)
    if divergence_threshold is None:
        divergence_threshold = 1e6 / (mu * mu)
    m2 = np.array([d.second_moment() for d in dists])
    if np.isinf(m2).any():
        diverging = True
    elif len(dists) >= 2:
        diverging = bool(np.all(np.diff(m2) > 0) and m2[-1] >= divergence_threshold)
    else:
        diverging = False
    return LimitTable(
        family=family,
        shapes=shape_out,
        xs=(),
        limit=HEAVY_TAIL_LIMITS.get(family),
        second_moment=m2,
        second_moment_diverging=diverging,
    )
