"""Event-driven simulation of a renewal update stream through one station.

A run generates exactly n_arrivals packets, draws every packet's service
requirement at arrival time from a dedicated substream (so all disciplines
see identical arrival/service sequences for a given seed), stops generation,
drains the backlog completely, and returns the full trace.  Ties between a
departure and an arrival at the same instant process the departure first.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .disciplines import Discipline, make_server
from .distributions import ArrivalProcess, ServiceDistribution
from .errors import ParameterError, StabilityError

_INF = float("inf")


@dataclass
class Packet:
    """Lifecycle record of one update packet."""

    id: int
    gen_time: float
    service_req: float
    remaining: float
    recv_time: float | None
    informative: bool


@dataclass(frozen=True)
class ExperimentPoint:
    """One simulation configuration: who arrives, how service behaves, and the policy."""

    arrival: ArrivalProcess
    service: ServiceDistribution
    discipline: Discipline
    n_arrivals: int
    warmup_fraction: float = 0.1


@dataclass
class SimulationTrace:
    """Complete record of one run.

    Packet fields are stored as parallel arrays indexed by packet id
    (generation order).  Age breakpoints are the points where the age
    process drops: entry j says the age equals breakpoint_ages[j] just
    after time breakpoint_times[j] and then grows at slope one.  The
    leading breakpoint (0, 0) is the initial condition.
    """

    gen_times: np.ndarray
    service_reqs: np.ndarray
    recv_times: np.ndarray
    informative: np.ndarray
    breakpoint_times: np.ndarray
    breakpoint_ages: np.ndarray
    horizon: float
    n_generated: int
    seed: int
    point: ExperimentPoint = field(repr=False)

    @property
    def delays(self) -> np.ndarray:
        return self.recv_times - self.gen_times

    @property
    def age_breakpoints(self) -> np.ndarray:
        """(m, 2) array of (time, age just after)."""
        return np.column_stack((self.breakpoint_times, self.breakpoint_ages))

    @property
    def delivered(self) -> list[Packet]:
        """Materialized packet records; intended for small traces and tests."""
        return [
            Packet(i, g, s, 0.0, r, bool(f))
            for i, (g, s, r, f) in enumerate(
                zip(self.gen_times, self.service_reqs, self.recv_times, self.informative)
            )
        ]


def _mark_informative(gen: np.ndarray, recv: np.ndarray):
    """Informative flags plus age breakpoints, from the reception order.

    A reception is informative iff its generation time exceeds the largest
    generation time among all packets received earlier; only those
    receptions drop the age.
    """
    order = np.argsort(recv, kind="stable")
    g = gen[order]
    n = g.shape[0]
    flags_sorted = np.empty(n, dtype=bool)
    flags_sorted[0] = True
    running_max = np.maximum.accumulate(g)
    flags_sorted[1:] = g[1:] > running_max[:-1]
    informative = np.empty(n, dtype=bool)
    informative[order] = flags_sorted
    bp_t = recv[order][flags_sorted]
    bp_a = bp_t - g[flags_sorted]
    times = np.concatenate(([0.0], bp_t))
    ages = np.concatenate(([0.0], bp_a))
    return informative, times, ages


def _serve(gen: np.ndarray, svc: np.ndarray, discipline: Discipline) -> np.ndarray:
    """Run the event loop and return the reception time of every packet."""
    n = gen.shape[0]
    server = make_server(discipline)
    handle_arrival = server.handle_arrival
    handle_completion = server.handle_completion
    gen_l = gen.tolist()
    svc_l = svc.tolist()
    recv = [0.0] * n
    i = 0
    t_next_arrival = gen_l[0]
    while True:
        t_complete = server.t_complete
        if t_complete <= t_next_arrival:
            if t_complete == _INF:
                break  # no arrivals left and the server is idle: drained
            recv[handle_completion()] = t_complete
        else:
            handle_arrival(i, svc_l[i], t_next_arrival)
            i += 1
            t_next_arrival = gen_l[i] if i < n else _INF
    return np.asarray(recv)


def run_simulation(
    arrival: ArrivalProcess,
    service: ServiceDistribution,
    discipline: Discipline,
    n_arrivals: int,
    warmup_fraction: float = 0.1,
    seed: int = 0,
) -> SimulationTrace:
    """Simulate one run; identical inputs give a bit-identical trace.

    Service requirements are assigned once per packet, at arrival, and
    survive preemptions intact (preempt-resume).  Generation stops after
    n_arrivals packets and the backlog is drained, so every generated
    packet is delivered.
    """
    if n_arrivals < 1:
        raise ParameterError(f"n_arrivals must be >= 1, got {n_arrivals}")
    if not 0.0 <= warmup_fraction <= 0.5:
        raise ParameterError(f"warmup_fraction must lie in [0, 0.5], got {warmup_fraction}")
    if discipline.single_server and not arrival.lam < service.mu:
        raise StabilityError(
            f"single-server run needs lambda < mu, got lambda={arrival.lam} mu={service.mu}"
        )

    root = np.random.SeedSequence(seed)
    arrival_seq, service_seq = root.spawn(2)
    arrival_rng = np.random.Generator(np.random.PCG64(arrival_seq))
    service_rng = np.random.Generator(np.random.PCG64(service_seq))

    gen = np.cumsum(arrival.sample_n(arrival_rng, n_arrivals))
    svc = service.sample_n(service_rng, n_arrivals)

    recv = _serve(gen, svc, discipline)
    informative, bp_times, bp_ages = _mark_informative(gen, recv)

    return SimulationTrace(
        gen_times=gen,
        service_reqs=svc,
        recv_times=recv,
        informative=informative,
        breakpoint_times=bp_times,
        breakpoint_ages=bp_ages,
        horizon=float(recv.max()),
        n_generated=n_arrivals,
        seed=seed,
        point=ExperimentPoint(arrival, service, discipline, n_arrivals, warmup_fraction),
    )


def run_point(point: ExperimentPoint, seed: int) -> SimulationTrace:
    return run_simulation(
        point.arrival,
        point.service,
        point.discipline,
        point.n_arrivals,
        point.warmup_fraction,
        seed,
    )


def _replicate_worker(args: tuple[ExperimentPoint, int]) -> SimulationTrace:
    point, seed = args
    return run_point(point, seed)


def replicate(
    point: ExperimentPoint,
    n_reps: int,
    base_seed: int,
    parallel: bool = False,
    max_workers: int | None = None,
) -> list[SimulationTrace]:
    """n_reps independent runs seeded base_seed + rep index, in rep order.

    Replications share no state, so serial and concurrent execution return
    identical traces.
    """
    if n_reps < 1:
        raise ParameterError(f"n_reps must be >= 1, got {n_reps}")
    jobs = [(point, base_seed + rep) for rep in range(n_reps)]
    if not parallel or n_reps == 1:
        return [run_point(p, s) for p, s in jobs]
    with ProcessPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(_replicate_worker, jobs))


def busy_periods(gen: np.ndarray, svc: np.ndarray) -> list[tuple[float, float]]:
    """(start, end) of each busy period of a work-conserving single server.

    Depends only on the workload sample path, so this is a discipline-free
    oracle: any non-idling single-server policy finishes each busy period's
    work exactly at its end.
    """
    periods: list[tuple[float, float]] = []
    start = gen[0]
    end = gen[0] + svc[0]
    for g, s in zip(gen[1:].tolist(), svc[1:].tolist()):
        if g > end:
            periods.append((start, end))
            start = g
            end = g + s
        else:
            end += s
    periods.append((start, end))
    return periods


def throughput(trace: SimulationTrace) -> float:
    """Delivered packets per unit time over the whole run."""
    return trace.n_generated / trace.horizon
