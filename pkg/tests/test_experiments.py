import itertools
import json
import math

import numpy as np
import pytest

from agedelay import (
    Discipline,
    FrontierPoint,
    ParameterError,
    StabilityError,
    SweepConfig,
    emit_outputs,
    load_config,
    load_preset,
    pareto_frontier,
    parse_arrival,
    parse_service,
    preset_path,
    run_and_emit,
    run_suite,
    scalarized_pick,
)
from agedelay.experiments import CSV_COLUMNS, PRESETS

ARR = parse_arrival("exp", 0.5)


def fp(age, delay, var=1.0, label="fcfs", family="exp", shape=None):
    return FrontierPoint(
        discipline=label,
        family=family,
        shape=shape,
        arrival_family="exp",
        lam=0.5,
        mu=0.8,
        n_arrivals=100,
        n_reps=1,
        seed=0,
        avg_age=age,
        avg_age_ci=0.0,
        mean_delay=delay,
        mean_delay_ci=0.0,
        delay_var=var,
        delay_var_ci=0.0,
        informative_frac=1.0,
        a_min=2.0,
        pk_delay=None,
        gginf_age=None,
        gginf_stderr=None,
        slow_convergence=False,
    )


def small_config(points=("fcfs exp", "lcfs-p exp"), n=2000, reps=2, seed=5):
    grid = []
    for line in points:
        tokens = line.split()
        disc = Discipline(tokens[0])
        arrival = ARR
        svc_tokens = []
        for t in tokens[1:]:
            if t.startswith("arrival="):
                arrival = parse_arrival(t.split("=")[1], 0.5)
            else:
                svc_tokens.append(t)
        grid.append((disc, parse_service(" ".join(svc_tokens), 0.8), arrival))
    return SweepConfig(
        arrival=ARR,
        mu=0.8,
        grid=tuple(grid),
        n_arrivals=n,
        n_reps=reps,
        base_seed=seed,
        warmup_fraction=0.1,
        nu_grid=(0.0, 1.0, 100.0),
        gginf_samples=2000,
    )


# ---- pareto frontier -----------------------------------------------------------


def test_frontier_drops_dominated_point():
    pts = [fp(1, 3), fp(2, 2), fp(3, 1), fp(2, 3)]
    front = pareto_frontier(pts)
    assert [(p.avg_age, p.mean_delay) for p in front] == [(1, 3), (2, 2), (3, 1)]


def test_frontier_single_point():
    p = fp(1, 1)
    assert pareto_frontier([p]) == [p]


def test_frontier_duplicates_both_kept():
    pts = [fp(1, 2), fp(1, 2), fp(0.5, 3)]
    front = pareto_frontier(pts)
    assert len(front) == 3


def test_frontier_never_returns_dominated_points_random_clouds():
    rng = np.random.default_rng(8)
    for trial in range(25):
        pts = [fp(a, d) for a, d in rng.uniform(0, 10, size=(40, 2))]
        front = pareto_frontier(pts)
        for p in front:
            for q in pts:
                dominated = (
                    q.avg_age <= p.avg_age
                    and q.mean_delay <= p.mean_delay
                    and (q.avg_age < p.avg_age or q.mean_delay < p.mean_delay)
                )
                assert not dominated
        ages = [p.avg_age for p in front]
        assert ages == sorted(ages)


def test_frontier_variance_objective():
    pts = [fp(1, 9, var=5), fp(2, 1, var=2), fp(3, 1, var=9)]
    front = pareto_frontier(pts, objective="delay_variance")
    assert [(p.avg_age, p.delay_var) for p in front] == [(1, 5), (2, 2)]
    with pytest.raises(ParameterError):
        pareto_frontier(pts, objective="nope")
    with pytest.raises(ParameterError):
        pareto_frontier([])


# ---- scalarization --------------------------------------------------------------


def test_scalarized_extremes():
    pts = [fp(1, 5), fp(3, 2), fp(6, 1)]
    assert scalarized_pick(pts, 0.0).mean_delay == 1
    big = scalarized_pick(pts, 1e9)
    assert big.avg_age == 1


def test_scalarized_tie_breaks_toward_lower_age():
    pts = [fp(2, 2), fp(1, 3)]  # equal score at nu=1
    assert scalarized_pick(pts, 1.0).avg_age == 1


def test_scalarized_picks_live_on_frontier_random_clouds():
    rng = np.random.default_rng(17)
    nus = [0.0, 0.1, 0.5, 1.0, 5.0, 100.0]
    for trial in range(25):
        pts = [fp(a, d, var=v) for a, d, v in rng.uniform(0, 10, size=(30, 3))]
        for objective in ("mean_delay", "delay_variance"):
            front = {id(p) for p in pareto_frontier(pts, objective)}
            for nu in nus:
                assert id(scalarized_pick(pts, nu, objective)) in front


def test_scalarized_validation():
    with pytest.raises(ParameterError):
        scalarized_pick([], 1.0)
    with pytest.raises(ParameterError):
        scalarized_pick([fp(1, 1)], -0.5)


# ---- run_suite -------------------------------------------------------------------


def test_run_suite_point_per_grid_entry_and_determinism():
    cfg = small_config()
    a = run_suite(cfg, parallel=False)
    b = run_suite(cfg, parallel=False)
    assert len(a) == 2
    assert a == b
    assert [p.discipline for p in a] == ["fcfs", "lcfs-p"]
    assert all(p.n_reps == 2 for p in a)
    assert a[0].seed == 5 and a[1].seed == 7
    assert all(p.informative_frac == 1.0 for p in a if p.discipline == "fcfs")


def test_run_suite_serial_vs_parallel_identical():
    cfg = small_config(n=3000, reps=3)
    assert run_suite(cfg, parallel=False) == run_suite(cfg, parallel=True)


def test_run_suite_oracle_columns():
    cfg = small_config(points=("fcfs pareto alpha=2", "fcfs det arrival=det"))
    pts = run_suite(cfg, parallel=False)
    assert math.isinf(pts[0].pk_delay)  # infinite second moment branch
    assert pts[0].a_min == 2.0
    assert pts[1].pk_delay is None  # periodic arrivals: no P-K column
    assert pts[1].a_min == 1.0
    assert pts[1].arrival_family == "det"
    assert all(p.gginf_age is not None for p in pts)


def test_run_suite_flags_slow_convergence():
    cfg = small_config(points=("lcfs-p pareto alpha=1.2",), n=500, reps=1)
    (pt,) = run_suite(cfg, parallel=False)
    assert pt.slow_convergence


def test_run_suite_names_unstable_point():
    bad = SweepConfig(
        arrival=parse_arrival("exp", 0.9),
        mu=0.8,
        grid=((Discipline.FCFS, parse_service("exp", 0.8), parse_arrival("exp", 0.9)),),
        n_arrivals=10,
        n_reps=1,
        base_seed=0,
        warmup_fraction=0.0,
        nu_grid=(0.0,),
    )
    with pytest.raises(StabilityError, match="grid point 0"):
        run_suite(bad, parallel=False)


def test_run_suite_rejects_empty_grid():
    cfg = small_config()
    empty = SweepConfig(**{**cfg.__dict__, "grid": ()})
    with pytest.raises(ParameterError):
        run_suite(empty, parallel=False)


# ---- outputs ----------------------------------------------------------------------


def test_emit_outputs_files_and_determinism(tmp_path):
    cfg = small_config()
    points = run_suite(cfg, parallel=False)
    front = pareto_frontier(points)
    picks = {nu: scalarized_pick(points, nu) for nu in cfg.nu_grid}
    paths = emit_outputs(points, front, tmp_path / "a", cfg=cfg, scalarized=picks)
    blobs = [p.read_bytes() for p in paths]
    paths2 = emit_outputs(points, front, tmp_path / "b", cfg=cfg, scalarized=picks)
    assert [p.read_bytes() for p in paths2] == blobs

    csv_lines = blobs[0].decode().strip().splitlines()
    assert csv_lines[0] == ",".join(CSV_COLUMNS)
    assert len(csv_lines) == 1 + len(points)

    doc = json.loads(blobs[1])
    assert doc["config"]["lambda"] == 0.5
    assert len(doc["points"]) == len(points)
    assert set(doc["frontier"]) <= {p.label() for p in points}
    assert doc["scalarized_picks"]["0"] in {p.label() for p in points}

    plot = blobs[2].decode()
    assert "gnuplot" in plot and "average age" in plot
    for p in points:
        assert f"{p.discipline} {p.family}" in plot


def test_emit_outputs_header_only_for_no_points(tmp_path):
    paths = emit_outputs([], [], tmp_path)
    lines = paths[0].read_text().splitlines()
    assert lines == [",".join(CSV_COLUMNS)]


def test_csv_12_significant_digits(tmp_path):
    pt = fp(2.0 / 3.0, 1.0 / 7.0)
    paths = emit_outputs([pt], [pt], tmp_path)
    row = paths[0].read_text().splitlines()[1].split(",")
    assert row[CSV_COLUMNS.index("avg_age")] == "0.666666666667"
    assert row[CSV_COLUMNS.index("mean_delay")] == "0.142857142857"
    assert row[CSV_COLUMNS.index("shape")] == ""
    assert row[CSV_COLUMNS.index("pk_delay")] == ""


def test_csv_infinite_pk_delay(tmp_path):
    cfg = small_config(points=("fcfs pareto alpha=2",), n=500, reps=1)
    points = run_suite(cfg, parallel=False)
    paths = emit_outputs(points, points, tmp_path)
    row = paths[0].read_text().splitlines()[1].split(",")
    assert row[CSV_COLUMNS.index("pk_delay")] == "inf"
    doc = json.loads(paths[1].read_text())
    assert doc["points"][0]["pk_delay"] == "inf"


def test_run_and_emit_round_trip(tmp_path):
    cfg = small_config(n=800, reps=1)
    paths = run_and_emit(cfg, tmp_path, parallel=False)
    assert all(p.exists() for p in paths)


# ---- config files -------------------------------------------------------------------


CONFIG_TEXT = """
[arrival]
family = exp
rate = 0.5

[service]
rate = 0.8

[run]
n_arrivals = 1500
n_reps = 2
base_seed = 9
warmup_fraction = 0.1

[grid]
points =
    fcfs det
    lcfs-p pareto alpha=1.5
    fcfs det arrival=det

[scalarization]
nu_grid = 0 1 5

[output]
csv = out.csv
"""


def test_load_config_round_trip(tmp_path):
    path = tmp_path / "cfg.ini"
    path.write_text(CONFIG_TEXT)
    cfg = load_config(path)
    assert cfg.n_arrivals == 1500
    assert cfg.nu_grid == (0.0, 1.0, 5.0)
    assert len(cfg.grid) == 3
    disc, svc, arr = cfg.grid[1]
    assert disc is Discipline.LCFS_PREEMPTIVE
    assert (svc.family, svc.shape) == ("pareto", 1.5)
    assert cfg.grid[2][2].family == "det"
    assert cfg.csv_name == "out.csv"


def test_load_config_overrides(tmp_path):
    path = tmp_path / "cfg.ini"
    path.write_text(CONFIG_TEXT)
    cfg = load_config(path, ["run.n_arrivals=99", "run.base_seed=123"])
    assert cfg.n_arrivals == 99
    assert cfg.base_seed == 123
    with pytest.raises(ParameterError):
        load_config(path, ["no-dots"])


def test_load_config_errors(tmp_path):
    with pytest.raises(OSError):
        load_config(tmp_path / "missing.ini")
    bad = tmp_path / "bad.ini"
    bad.write_text("[arrival]\nfamily = exp\n")
    with pytest.raises(ParameterError):
        load_config(bad)
    badgrid = tmp_path / "badgrid.ini"
    badgrid.write_text(CONFIG_TEXT.replace("fcfs det\n", "warp det\n", 1))
    with pytest.raises(ParameterError):
        load_config(badgrid)


def test_presets_ship_and_parse():
    for name in PRESETS:
        assert preset_path(name).exists()
        cfg = load_preset(name)
        assert cfg.grid
        assert cfg.n_arrivals == 1_000_000
        assert cfg.n_reps == 8
    fig = load_preset("figure1")
    assert len(fig.grid) == 18
    assert fig.arrival.lam == 0.5 and fig.mu == 0.8
    disciplines = {d.value for d, _, _ in fig.grid}
    assert disciplines == {"fcfs", "lcfs-p"}
    sweep = load_preset("tradeoff-sweep")
    assert [svc.shape for _, svc, _ in sweep.grid] == [3.0, 2.5, 2.0, 1.7, 1.5]
    nt = load_preset("no-tradeoff")
    assert any(arr.family == "det" for _, _, arr in nt.grid)
    with pytest.raises(ParameterError):
        preset_path("nope")


def test_preset_override_scales_down():
    cfg = load_preset("figure1", ["run.n_arrivals=100", "run.n_reps=1"])
    assert cfg.n_arrivals == 100 and cfg.n_reps == 1
