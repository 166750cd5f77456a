"""Config-driven experiment suites: sweeps, Pareto frontiers, result files.

A suite is a grid of (discipline, service law) points sharing one arrival
process (individual points may override the arrival family, which is how
the periodic-arrival baseline joins a Poisson suite).  Each point runs
n_reps independent replications; the aggregated point carries its oracle
columns so every result row is self-checking.
"""

from __future__ import annotations

import configparser
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import stats as spstats

from .disciplines import Discipline
from .distributions import ArrivalProcess, ServiceDistribution, parse_arrival, parse_service
from .engine import ExperimentPoint, run_point
from .errors import ParameterError, StabilityError
from .metrics import MetricsReport, summarize
from .oracles import gginf_age_estimate, min_average_age, pk_delay

CSV_COLUMNS = (
    "discipline",
    "family",
    "shape",
    "lambda",
    "mu",
    "n_arrivals",
    "n_reps",
    "seed",
    "avg_age",
    "avg_age_ci",
    "mean_delay",
    "mean_delay_ci",
    "delay_var",
    "informative_frac",
    "a_min",
    "pk_delay",
    "gginf_age",
)

PRESETS = ("figure1", "tradeoff-sweep", "no-tradeoff")

# Pareto sample means converge too slowly below this tail index for CI claims.
SLOW_CONVERGENCE_ALPHA = 1.5


@dataclass(frozen=True)
class SweepConfig:
    arrival: ArrivalProcess
    mu: float
    grid: tuple[tuple[Discipline, ServiceDistribution, ArrivalProcess], ...]
    n_arrivals: int
    n_reps: int
    base_seed: int
    warmup_fraction: float
    nu_grid: tuple[float, ...]
    csv_name: str = "points.csv"
    json_name: str = "points.json"
    plot_name: str = "plot.gp"
    gginf_samples: int = 200_000

    def echo(self) -> dict:
        return {
            "arrival": self.arrival.label(),
            "lambda": self.arrival.lam,
            "mu": self.mu,
            "n_arrivals": self.n_arrivals,
            "n_reps": self.n_reps,
            "base_seed": self.base_seed,
            "warmup_fraction": self.warmup_fraction,
            "nu_grid": list(self.nu_grid),
            "gginf_samples": self.gginf_samples,
            "grid": [_entry_label(d, s, a) for d, s, a in self.grid],
        }


def _entry_label(discipline: Discipline, service: ServiceDistribution, arrival: ArrivalProcess) -> str:
    label = f"{discipline.value} {service.label()}"
    return f"{label} arrival={arrival.family}" if arrival.family != "exp" else label


@dataclass(frozen=True)
class FrontierPoint:
    """One aggregated grid point with its oracle columns."""

    discipline: str
    family: str
    shape: float | None
    arrival_family: str
    lam: float
    mu: float
    n_arrivals: int
    n_reps: int
    seed: int
    avg_age: float
    avg_age_ci: float
    mean_delay: float
    mean_delay_ci: float
    delay_var: float
    delay_var_ci: float
    informative_frac: float
    a_min: float
    pk_delay: float | None
    gginf_age: float | None
    gginf_stderr: float | None
    slow_convergence: bool

    def label(self) -> str:
        shape = "" if self.shape is None else f" {self.shape:g}"
        tag = "" if self.arrival_family == "exp" else f" arrival={self.arrival_family}"
        return f"{self.discipline} {self.family}{shape}{tag}"

    def to_json_dict(self) -> dict:
        d = {
            "discipline": self.discipline,
            "family": self.family,
            "shape": self.shape,
            "arrival": self.arrival_family,
            "lambda": self.lam,
            "mu": self.mu,
            "n_arrivals": self.n_arrivals,
            "n_reps": self.n_reps,
            "seed": self.seed,
            "avg_age": self.avg_age,
            "avg_age_ci": self.avg_age_ci,
            "mean_delay": self.mean_delay,
            "mean_delay_ci": self.mean_delay_ci,
            "delay_var": self.delay_var,
            "delay_var_ci": _json_float(self.delay_var_ci),
            "informative_frac": self.informative_frac,
            "a_min": self.a_min,
            "pk_delay": _json_float(self.pk_delay),
            "gginf_age": self.gginf_age,
            "gginf_stderr": self.gginf_stderr,
            "slow_convergence": self.slow_convergence,
        }
        return d


def _json_float(x: float | None):
    if x is None or math.isnan(x):
        return None
    return "inf" if math.isinf(x) else x


def _suite_worker(args) -> tuple[int, int, MetricsReport]:
    idx, rep, point, seed = args
    return idx, rep, summarize(run_point(point, seed))


def _across_rep_ci(values: Sequence[float]) -> float:
    n = len(values)
    if n < 2:
        return math.nan
    arr = np.asarray(values)
    return float(spstats.t.ppf(0.975, n - 1) * arr.std(ddof=1) / math.sqrt(n))


def run_suite(cfg: SweepConfig, parallel: bool = True, max_workers: int | None = None) -> list[FrontierPoint]:
    """Run every grid point, aggregate replications, attach oracle columns.

    Deterministic for a given config and base seed: point base seeds are
    base_seed + index * n_reps and assembly order is (grid index, rep),
    regardless of execution order.
    """
    if not cfg.grid:
        raise ParameterError("sweep grid is empty")
    if cfg.n_reps < 1:
        raise ParameterError(f"n_reps must be >= 1, got {cfg.n_reps}")
    for idx, (discipline, service, arrival) in enumerate(cfg.grid):
        if discipline.single_server and not arrival.lam < service.mu:
            raise StabilityError(
                f"grid point {idx} ({_entry_label(discipline, service, arrival)}): "
                f"lambda={arrival.lam} >= mu={service.mu}"
            )

    jobs = []
    for idx, (discipline, service, arrival) in enumerate(cfg.grid):
        point = ExperimentPoint(arrival, service, discipline, cfg.n_arrivals, cfg.warmup_fraction)
        base = cfg.base_seed + idx * cfg.n_reps
        for rep in range(cfg.n_reps):
            jobs.append((idx, rep, point, base + rep))

    if parallel and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(_suite_worker, jobs))
    else:
        results = [_suite_worker(job) for job in jobs]
    reports: dict[int, list[MetricsReport]] = {}
    for idx, rep, report in sorted(results, key=lambda r: (r[0], r[1])):
        reports.setdefault(idx, []).append(report)

    gginf_cache: dict[tuple, tuple[float, float]] = {}
    gginf_seed_base = cfg.base_seed + len(cfg.grid) * cfg.n_reps
    points = []
    for idx, (discipline, service, arrival) in enumerate(cfg.grid):
        reps = reports[idx]
        ages = [r.avg_age for r in reps]
        delays = [r.mean_delay for r in reps]
        variances = [r.delay_variance for r in reps]
        if cfg.n_reps >= 2:
            age_ci = _across_rep_ci(ages)
            delay_ci = _across_rep_ci(delays)
            var_ci = _across_rep_ci(variances)
        else:
            age_ci = reps[0].ci_halfwidth_age
            delay_ci = reps[0].ci_halfwidth_delay
            var_ci = math.nan

        key = (arrival, service)
        if key not in gginf_cache:
            gginf_cache[key] = gginf_age_estimate(
                arrival, service, cfg.gginf_samples, gginf_seed_base + idx
            )
        gginf_val, gginf_se = gginf_cache[key]

        pk = None
        if discipline.single_server and arrival.family == "exp":
            pk = pk_delay(arrival.lam, service)

        points.append(
            FrontierPoint(
                discipline=discipline.value,
                family=service.family,
                shape=service.shape,
                arrival_family=arrival.family,
                lam=arrival.lam,
                mu=service.mu,
                n_arrivals=cfg.n_arrivals,
                n_reps=cfg.n_reps,
                seed=cfg.base_seed + idx * cfg.n_reps,
                avg_age=float(np.mean(ages)),
                avg_age_ci=age_ci,
                mean_delay=float(np.mean(delays)),
                mean_delay_ci=delay_ci,
                delay_var=float(np.mean(variances)),
                delay_var_ci=var_ci,
                informative_frac=float(np.mean([r.informative_fraction for r in reps])),
                a_min=min_average_age(arrival),
                pk_delay=pk,
                gginf_age=gginf_val,
                gginf_stderr=gginf_se,
                slow_convergence=(
                    service.family == "pareto" and service.shape < SLOW_CONVERGENCE_ALPHA
                ),
            )
        )
    return points


def _objective_value(point: FrontierPoint, objective: str) -> float:
    if objective == "mean_delay":
        return point.mean_delay
    if objective == "delay_variance":
        return point.delay_var
    raise ParameterError(f"objective must be 'mean_delay' or 'delay_variance', got {objective!r}")


def pareto_frontier(points: Sequence[FrontierPoint], objective: str = "mean_delay") -> list[FrontierPoint]:
    """Non-dominated subset under componentwise <= on (avg_age, objective).

    q dominates p when q is <= in both coordinates and strictly better in
    at least one.  Result is sorted by avg_age ascending.
    """
    if not points:
        raise ParameterError("pareto_frontier needs a nonempty point list")
    keep = []
    for p in points:
        pa, po = p.avg_age, _objective_value(p, objective)
        dominated = False
        for q in points:
            qa, qo = q.avg_age, _objective_value(q, objective)
            if qa <= pa and qo <= po and (qa < pa or qo < po):
                dominated = True
                break
        if not dominated:
            keep.append(p)
    return sorted(keep, key=lambda p: (p.avg_age, _objective_value(p, objective), p.label()))


def scalarized_pick(points: Sequence[FrontierPoint], nu: float, objective: str = "mean_delay") -> FrontierPoint:
    """Point minimizing objective + nu * avg_age; ties go to lower age, then label."""
    if not points:
        raise ParameterError("scalarized_pick needs a nonempty point list")
    if nu < 0:
        raise ParameterError(f"nu must be nonnegative, got {nu}")
    return min(
        points,
        key=lambda p: (_objective_value(p, objective) + nu * p.avg_age, p.avg_age, p.label()),
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return f"{value:.12g}"
    return str(value)


def _csv_row(p: FrontierPoint) -> str:
    cells = (
        p.discipline,
        p.family,
        p.shape,
        p.lam,
        p.mu,
        p.n_arrivals,
        p.n_reps,
        p.seed,
        p.avg_age,
        p.avg_age_ci,
        p.mean_delay,
        p.mean_delay_ci,
        p.delay_var,
        p.informative_frac,
        p.a_min,
        p.pk_delay,
        p.gginf_age,
    )
    return ",".join(_fmt(c) for c in cells)


def write_csv(points: Sequence[FrontierPoint], path: Path) -> None:
    lines = [",".join(CSV_COLUMNS)]
    lines.extend(_csv_row(p) for p in points)
    path.write_text("\n".join(lines) + "\n")


def _plot_script(points: Sequence[FrontierPoint], csv_name: str) -> str:
    series = []
    for p in points:
        key = (p.discipline, p.family)
        if key not in series:
            series.append(key)
    clauses = []
    for discipline, family in series:
        cond = f'strcol(1) eq "{discipline}" && strcol(2) eq "{family}"'
        clauses.append(
            f'  "{csv_name}" using ({cond} ? $9 : 1/0):($11) title "{discipline} {family}" with points'
        )
    body = ", \\\n".join(clauses) if clauses else f'  "{csv_name}" using 9:11 with points'
    return (
        "# age-delay scatter; render with: gnuplot -persist <this file>\n"
        "set datafile separator comma\n"
        "set key outside\n"
        'set xlabel "average age"\n'
        'set ylabel "mean delay"\n'
        "plot \\\n" + body + "\n"
    )


def emit_outputs(
    points: Sequence[FrontierPoint],
    frontier: Sequence[FrontierPoint],
    out_dir: Path,
    cfg: SweepConfig | None = None,
    scalarized: dict[float, FrontierPoint] | None = None,
    csv_name: str = "points.csv",
    json_name: str = "points.json",
    plot_name: str = "plot.gp",
) -> list[Path]:
    """Write the CSV/JSON/plot-script triple; returns the written paths.

    Reruns with the same inputs produce byte-identical files (there is no
    timestamp or other ambient state in any output).
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / csv_name
        json_path = out_dir / json_name
        plot_path = out_dir / plot_name
        write_csv(points, csv_path)
        doc = {
            "config": cfg.echo() if cfg is not None else None,
            "points": [p.to_json_dict() for p in points],
            "frontier": [p.label() for p in frontier],
            "scalarized_picks": (
                {_fmt(nu): p.label() for nu, p in scalarized.items()} if scalarized else None
            ),
        }
        json_path.write_text(json.dumps(doc, indent=2) + "\n")
        plot_path.write_text(_plot_script(points, csv_name))
    except OSError as exc:
        raise OSError(f"cannot write results under {out_dir}: {exc}") from exc
    return [csv_path, json_path, plot_path]


def run_and_emit(cfg: SweepConfig, out_dir: Path, parallel: bool = True) -> list[Path]:
    """run_suite + frontier + scalarized picks + output files."""
    points = run_suite(cfg, parallel=parallel)
    frontier = pareto_frontier(points)
    picks = {nu: scalarized_pick(points, nu) for nu in cfg.nu_grid}
    return emit_outputs(
        points,
        frontier,
        out_dir,
        cfg=cfg,
        scalarized=picks,
        csv_name=cfg.csv_name,
        json_name=cfg.json_name,
        plot_name=cfg.plot_name,
    )


# ---- configuration files ----------------------------------------------------


def _parse_grid_line(line: str, mu: float, arrival: ArrivalProcess):
    tokens = line.split()
    if len(tokens) < 2:
        raise ParameterError(f"grid line needs '<discipline> <service spec>', got {line!r}")
    try:
        discipline = Discipline(tokens[0].lower())
    except ValueError:
        raise ParameterError(f"unknown discipline {tokens[0]!r} in grid line {line!r}") from None
    service_tokens = []
    point_arrival = arrival
    for tok in tokens[1:]:
        if tok.startswith("arrival="):
            point_arrival = parse_arrival(tok.split("=", 1)[1], arrival.lam)
        else:
            service_tokens.append(tok)
    service = parse_service(" ".join(service_tokens), mu)
    return discipline, service, point_arrival


def load_config(text_or_path, overrides: Sequence[str] = ()) -> SweepConfig:
    """Parse a sweep config (INI schema, see README) with optional overrides.

    Overrides are 'section.key=value' strings applied on top of the file,
    mirroring the CLI --set flag.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    path = Path(text_or_path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    cp.read_string(text)
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep or "." not in key:
            raise ParameterError(f"override must look like section.key=value, got {item!r}")
        section, option = key.split(".", 1)
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section.strip(), option.strip(), value.strip())

    try:
        arrival = parse_arrival(cp.get("arrival", "family"), cp.getfloat("arrival", "rate"))
        mu = cp.getfloat("service", "rate")
        n_arrivals = cp.getint("run", "n_arrivals")
        n_reps = cp.getint("run", "n_reps")
        base_seed = cp.getint("run", "base_seed")
        warmup = cp.getfloat("run", "warmup_fraction")
        gginf_samples = cp.getint("run", "gginf_samples", fallback=200_000)
        grid_lines = [ln.strip() for ln in cp.get("grid", "points").splitlines() if ln.strip()]
        nu_grid = tuple(float(v) for v in cp.get("scalarization", "nu_grid").split())
    except (configparser.Error, ValueError) as exc:
        raise ParameterError(f"bad config: {exc}") from exc
    if not nu_grid:
        raise ParameterError("nu_grid must be nonempty")
    grid = tuple(_parse_grid_line(line, mu, arrival) for line in grid_lines)
    return SweepConfig(
        arrival=arrival,
        mu=mu,
        grid=grid,
        n_arrivals=n_arrivals,
        n_reps=n_reps,
        base_seed=base_seed,
        warmup_fraction=warmup,
        nu_grid=nu_grid,
        csv_name=cp.get("output", "csv", fallback="points.csv"),
        json_name=cp.get("output", "json", fallback="points.json"),
        plot_name=cp.get("output", "plot", fallback="plot.gp"),
        gginf_samples=gginf_samples,
    )


def preset_path(name: str) -> Path:
    """Filesystem path of a shipped preset config."""
    if name not in PRESETS:
        raise ParameterError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    return Path(str(resources.files("agedelay") / "presets" / f"{name}.ini"))


def load_preset(name: str, overrides: Sequence[str] = ()) -> SweepConfig:
    return load_config(preset_path(name), overrides)
