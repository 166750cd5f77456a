import numpy as np
import pytest

from agedelay import Discipline, parse_arrival, parse_service, run_simulation
from agedelay.disciplines import (
    FcfsServer,
    InfiniteServer,
    LcfsPreemptiveServer,
    LcfsServer,
    make_server,
)
from agedelay.engine import busy_periods
from agedelay.metrics import summarize

INF = float("inf")


def test_fcfs_idle_arrival_starts_immediately():
    s = FcfsServer()
    assert s.t_complete == INF
    s.handle_arrival(0, 1.0, 5.0)
    assert s.serving == 0
    assert s.t_complete == 6.0


def test_fcfs_completion_picks_oldest():
    s = FcfsServer()
    s.handle_arrival(0, 1.0, 0.0)
    s.handle_arrival(1, 2.0, 0.3)
    s.handle_arrival(2, 0.5, 0.6)
    assert s.handle_completion() == 0
    assert s.serving == 1  # oldest waiter, not the newest
    assert s.t_complete == 3.0
    assert s.handle_completion() == 1
    assert s.serving == 2


def test_lcfs_np_completion_picks_newest():
    s = LcfsServer()
    s.handle_arrival(0, 1.0, 0.0)
    s.handle_arrival(1, 2.0, 0.3)
    s.handle_arrival(2, 0.5, 0.6)
    assert s.handle_completion() == 0
    assert s.serving == 2  # stack top
    assert s.handle_completion() == 2
    assert s.serving == 1


def test_lcfs_preemptive_preserves_remaining_work():
    s = LcfsPreemptiveServer()
    s.handle_arrival(0, 1.0, 0.0)  # A, will run 0.3 then be preempted
    s.handle_arrival(1, 2.0, 0.3)  # B seizes the server
    assert s.serving == 1
    assert s.stack == [(0, pytest.approx(0.7))]
    assert s.t_complete == pytest.approx(2.3)
    assert s.handle_completion() == 1
    # A resumes with exactly 0.7 of work left
    assert s.serving == 0
    assert s.t_complete == pytest.approx(3.0)
    assert s.handle_completion() == 0
    assert s.serving == -1 and s.t_complete == INF


def test_lcfs_preemptive_stack_is_lifo_under_nested_preemptions():
    s = LcfsPreemptiveServer()
    s.handle_arrival(0, 5.0, 0.0)
    s.handle_arrival(1, 5.0, 1.0)
    s.handle_arrival(2, 1.0, 1.5)
    assert s.serving == 2
    assert [pkt for pkt, _ in s.stack] == [0, 1]
    assert s.handle_completion() == 2
    assert s.serving == 1  # most recently suspended resumes first
    assert s.t_complete == pytest.approx(2.5 + 4.5)


def test_infinite_server_serves_overlapping_arrivals():
    s = InfiniteServer()
    s.handle_arrival(0, 3.0, 0.0)
    s.handle_arrival(1, 0.5, 0.1)
    s.handle_arrival(2, 1.0, 0.2)
    assert len(s.in_service) == 3
    assert s.t_complete == 0.6
    assert s.handle_completion() == 1
    assert s.handle_completion() == 2
    assert s.handle_completion() == 0
    assert s.t_complete == INF


def test_completion_with_empty_backlog_idles():
    for cls in (FcfsServer, LcfsServer, LcfsPreemptiveServer):
        s = cls()
        s.handle_arrival(0, 1.0, 0.0)
        s.handle_completion()
        assert s.serving == -1
        assert s.t_complete == INF


def test_make_server_dispatch():
    assert isinstance(make_server(Discipline.FCFS), FcfsServer)
    assert isinstance(make_server(Discipline.LCFS_NONPREEMPTIVE), LcfsServer)
    assert isinstance(make_server(Discipline.LCFS_PREEMPTIVE), LcfsPreemptiveServer)
    assert isinstance(make_server(Discipline.INFINITE_SERVER), InfiniteServer)


# ---- discipline-level properties via the engine -------------------------------

ARR = parse_arrival("exp", 0.5)


def test_fcfs_order_preserving_and_fully_informative():
    tr = run_simulation(ARR, parse_service("lognormal sigma=1", 0.8), Discipline.FCFS, 20_000, 0.1, 3)
    assert np.all(np.diff(tr.recv_times) > 0)
    assert tr.informative.all()
    assert float(tr.informative.mean()) == 1.0


def test_fcfs_and_lcfs_np_share_busy_periods_and_delay():
    svc = parse_service("lognormal sigma=1", 0.8)
    fcfs = run_simulation(ARR, svc, Discipline.FCFS, 200_000, 0.1, 17)
    lcfs = run_simulation(ARR, svc, Discipline.LCFS_NONPREEMPTIVE, 200_000, 0.1, 17)
    # identical coupled inputs: the workload path fixes the busy periods
    assert busy_periods(fcfs.gen_times, fcfs.service_reqs) == busy_periods(
        lcfs.gen_times, lcfs.service_reqs
    )
    rf, rl = summarize(fcfs), summarize(lcfs)
    gap = abs(rf.mean_delay - rl.mean_delay)
    assert gap <= rf.ci_halfwidth_delay + rl.ci_halfwidth_delay


def test_mm1_fcfs_and_lcfs_p_mean_delays_agree():
    svc = parse_service("exp", 0.8)
    rf = summarize(run_simulation(ARR, svc, Discipline.FCFS, 400_000, 0.1, 23))
    rp = summarize(run_simulation(ARR, svc, Discipline.LCFS_PREEMPTIVE, 400_000, 0.1, 23))
    gap = abs(rf.mean_delay - rp.mean_delay)
    assert gap <= rf.ci_halfwidth_delay + rp.ci_halfwidth_delay
    # both sit near the memoryless closed form 1/(mu - lambda)
    assert rf.mean_delay == pytest.approx(10.0 / 3.0, rel=0.05)


@pytest.mark.parametrize(
    "discipline",
    [Discipline.FCFS, Discipline.LCFS_NONPREEMPTIVE, Discipline.LCFS_PREEMPTIVE,
     Discipline.INFINITE_SERVER],
    ids=lambda d: d.value,
)
def test_delay_never_below_service_requirement(discipline):
    tr = run_simulation(ARR, parse_service("weibull k=0.5", 0.8), discipline, 20_000, 0.1, 29)
    # exact in real arithmetic; allow a few ulps at the timestamp magnitude
    tol = 1e-9 * (1.0 + tr.recv_times)
    assert np.all(tr.delays >= tr.service_reqs - tol)
