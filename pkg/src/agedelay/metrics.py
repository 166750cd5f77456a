"""Latency metrics computed exactly from a simulation trace.

The age process is piecewise linear: it grows at slope one and drops only
at informative receptions, so the time-average age over a window is an
exact sum of trapezoid areas with no discretization error.  Delay metrics
window packets by generation time, so long-delay packets near the horizon
are attributed to the window in which they were generated (the tradeoff is
driven by exactly those rare packets).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy import stats as spstats

from .errors import DegenerateSampleError, ParameterError

if TYPE_CHECKING:
    from .engine import SimulationTrace

DEFAULT_BATCHES = 32


class AgeTracker:
    """Incremental age-state updates, one reception at a time.

    A reception drops the age to (now - gen_time) iff gen_time exceeds the
    generation time of every previously received packet; everything else
    leaves the age growing at slope one.  Starts from age 0 at time 0.
    """

    __slots__ = ("latest_gen", "times", "ages")

    def __init__(self):
        self.latest_gen = -math.inf
        self.times = [0.0]
        self.ages = [0.0]

    def on_reception(self, gen_time: float, now: float) -> bool:
        """Record one reception; returns True iff it was informative."""
        if gen_time > self.latest_gen:
            self.latest_gen = gen_time
            self.times.append(now)
            self.ages.append(now - gen_time)
            return True
        return False


def default_window(trace: "SimulationTrace") -> tuple[float, float]:
    """Post-warmup window: from the first kept packet's generation to the horizon."""
    k = int(trace.point.warmup_fraction * trace.n_generated)
    k = min(k, trace.n_generated - 1)
    return float(trace.gen_times[k]), trace.horizon


def age_at(trace: "SimulationTrace", t) -> np.ndarray | float:
    """Age value(s) just after time t; t may be a scalar or an array."""
    t_arr = np.asarray(t, dtype=float)
    idx = np.searchsorted(trace.breakpoint_times, t_arr, side="right") - 1
    idx = np.clip(idx, 0, None)
    out = trace.breakpoint_ages[idx] + (t_arr - trace.breakpoint_times[idx])
    return float(out) if np.isscalar(t) else out


def compute_average_age(trace: "SimulationTrace", window: tuple[float, float] | None = None) -> float:
    """Exact time-average of the age process over the window.

    Between consecutive breakpoints the age starts at a and runs for d, so
    the area contribution is a*d + d^2/2; partial segments at the window
    edges are clipped exactly.
    """
    t_a, t_b = window if window is not None else default_window(trace)
    if not t_a < t_b:
        raise ParameterError(f"empty metrics window [{t_a}, {t_b}]")
    if t_a < 0 or t_b > trace.horizon + 1e-9:
        raise ParameterError(f"window [{t_a}, {t_b}] outside trace horizon {trace.horizon}")
    times = trace.breakpoint_times
    ages = trace.breakpoint_ages
    seg_end = np.append(times[1:], np.inf)
    start = np.maximum(times, t_a)
    end = np.minimum(seg_end, t_b)
    d = end - start
    live = d > 0
    a0 = ages[live] + (start[live] - times[live])
    d = d[live]
    area = float(np.sum(a0 * d + 0.5 * d * d))
    return area / (t_b - t_a)


def compute_delay_stats(
    trace: "SimulationTrace", window: tuple[float, float] | None = None
) -> tuple[float, float]:
    """(sample mean, unbiased sample variance) of delay over packets generated in the window.

    Counts every delivered packet, informative or not.
    """
    d = _windowed_delays(trace, window)
    if d.shape[0] < 2:
        raise DegenerateSampleError(f"need >= 2 packets for delay statistics, got {d.shape[0]}")
    return float(d.mean()), float(d.var(ddof=1))


def _windowed_delays(trace: "SimulationTrace", window) -> np.ndarray:
    t_a, t_b = window if window is not None else default_window(trace)
    if not t_a < t_b:
        raise ParameterError(f"empty metrics window [{t_a}, {t_b}]")
    lo = np.searchsorted(trace.gen_times, t_a, side="left")
    hi = np.searchsorted(trace.gen_times, t_b, side="right")
    return trace.recv_times[lo:hi] - trace.gen_times[lo:hi]


def informative_receptions(trace: "SimulationTrace") -> float:
    """Fraction of all delivered packets that caused an age drop."""
    if trace.n_generated < 1:
        raise DegenerateSampleError("no delivered packets")
    return float(trace.informative.mean())


def _t_halfwidth(values: np.ndarray) -> float:
    n = values.shape[0]
    if n < 2:
        return math.nan
    crit = spstats.t.ppf(0.975, n - 1)
    return float(crit * values.std(ddof=1) / math.sqrt(n))


@dataclass(frozen=True)
class MetricsReport:
    """Steady-state latency summary of one run."""

    avg_age: float
    mean_delay: float
    delay_variance: float
    informative_fraction: float
    n_counted: int
    ci_halfwidth_age: float
    ci_halfwidth_delay: float
    seed: int
    config: dict

    def to_json_dict(self) -> dict:
        return {
            "avg_age": self.avg_age,
            "mean_delay": self.mean_delay,
            "delay_variance": self.delay_variance,
            "informative_fraction": self.informative_fraction,
            "n_counted": self.n_counted,
            "ci_halfwidth_age": self.ci_halfwidth_age,
            "ci_halfwidth_delay": self.ci_halfwidth_delay,
            "seed": self.seed,
            "config": self.config,
        }


def describe_point(point) -> dict:
    """Config echo for reports and result files."""
    return {
        "arrival": point.arrival.label(),
        "lambda": point.arrival.lam,
        "service": point.service.label(),
        "mu": point.service.mu,
        "discipline": point.discipline.value,
        "n_arrivals": point.n_arrivals,
        "warmup_fraction": point.warmup_fraction,
    }


def summarize(trace: "SimulationTrace", n_batches: int = DEFAULT_BATCHES) -> MetricsReport:
    """Post-warmup metrics with batch-means confidence halfwidths.

    The window splits into n_batches equal-length sub-windows for the age
    CI; delays split into n_batches contiguous batches by generation order.
    """
    window = default_window(trace)
    t_a, t_b = window
    avg_age = compute_average_age(trace, window)
    delays = _windowed_delays(trace, window)
    if delays.shape[0] < 2:
        raise DegenerateSampleError("need >= 2 post-warmup packets to summarize")
    mean_delay = float(delays.mean())
    delay_var = float(delays.var(ddof=1))

    edges = np.linspace(t_a, t_b, n_batches + 1)
    age_batches = np.array(
        [compute_average_age(trace, (edges[j], edges[j + 1])) for j in range(n_batches)]
    )
    ci_age = _t_halfwidth(age_batches)

    if delays.shape[0] >= 2 * n_batches:
        delay_batches = np.array([b.mean() for b in np.array_split(delays, n_batches)])
        ci_delay = _t_halfwidth(delay_batches)
    else:
        ci_delay = _t_halfwidth(delays)

    counted = trace.informative[
        np.searchsorted(trace.gen_times, t_a, side="left") : np.searchsorted(
            trace.gen_times, t_b, side="right"
        )
    ]
    return MetricsReport(
        avg_age=avg_age,
        mean_delay=mean_delay,
        delay_variance=delay_var,
        informative_fraction=float(counted.mean()),
        n_counted=int(delays.shape[0]),
        ci_halfwidth_age=ci_age,
        ci_halfwidth_delay=ci_delay,
        seed=trace.seed,
        config=describe_point(trace.point),
    )
