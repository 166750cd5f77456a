"""Command-line front end.

Subcommands:
  simulate   one (arrival, service, discipline) point, aggregated over reps
  sweep      run a config-file suite and write CSV/JSON/plot outputs
  figure1    shipped preset: the full age-delay scatter at lambda=0.5, mu=0.8
  oracle     print any analytic baseline as CSV on stdout
"""

from __future__ import annotations

import argparse
import sys

from .disciplines import Discipline
from .distributions import parse_arrival, parse_service
from .errors import DegenerateSampleError, ParameterError, StabilityError
from . import experiments, oracles


def _parse_floats(text: str) -> list[float]:
    parts = text.replace(",", " ").split()
    if not parts:
        raise ParameterError(f"expected a list of numbers, got {text!r}")
    return [float(p) for p in parts]


def _cmd_simulate(args) -> int:
    arrival = parse_arrival(args.arrival, args.lam)
    service = parse_service(args.service, args.mu)
    discipline = Discipline(args.discipline)
    cfg = experiments.SweepConfig(
        arrival=arrival,
        mu=args.mu,
        grid=((discipline, service, arrival),),
        n_arrivals=args.n_arrivals,
        n_reps=args.n_reps,
        base_seed=args.base_seed,
        warmup_fraction=args.warmup,
        nu_grid=(0.0,),
        gginf_samples=args.gginf_samples,
    )
    (point,) = experiments.run_suite(cfg, parallel=not args.serial)
    if args.json:
        import json

        print(json.dumps(point.to_json_dict(), indent=2))
    else:
        print(",".join(experiments.CSV_COLUMNS))
        print(experiments._csv_row(point))
    return 0


def _cmd_sweep(args, preset: str | None = None) -> int:
    overrides = args.set or []
    if preset is None:
        cfg = experiments.load_config(args.config, overrides)
    else:
        cfg = experiments.load_preset(preset, overrides)
    paths = experiments.run_and_emit(cfg, args.out_dir, parallel=not args.serial)
    for p in paths:
        print(p)
    return 0


def _cmd_oracle(args) -> int:
    kind = args.oracle_kind
    if kind == "a-min":
        arrival = parse_arrival(args.arrival, args.lam)
        print("arrival,lambda,a_min")
        print(f"{arrival.family},{args.lam:.12g},{oracles.min_average_age(arrival):.12g}")
    elif kind == "pk-delay":
        service = parse_service(args.service, args.mu)
        value = oracles.pk_delay(args.lam, service)
        print("service,lambda,mu,pk_delay")
        print(f"{service.label()},{args.lam:.12g},{args.mu:.12g},{experiments._fmt(value)}")
    elif kind == "dd1-age":
        print("lambda,mu,dd1_age")
        print(f"{args.lam:.12g},{args.mu:.12g},{oracles.dd1_age(args.lam, args.mu):.12g}")
    elif kind == "gginf":
        arrival = parse_arrival(args.arrival, args.lam)
        service = parse_service(args.service, args.mu)
        est, se = oracles.gginf_age_estimate(arrival, service, args.n_samples, args.seed)
        print("arrival,service,lambda,mu,n_samples,seed,gginf_age,stderr")
        print(
            f"{arrival.family},{service.label()},{args.lam:.12g},{args.mu:.12g},"
            f"{args.n_samples},{args.seed},{est:.12g},{se:.12g}"
        )
    elif kind == "tail-table":
        table = oracles.tail_decay_table(
            args.family, _parse_floats(args.shapes) if args.shapes else (),
            _parse_floats(args.xs), args.mu, args.lam
        )
        print("family,shape,x,tail_prob,truncated_mean")
        for i, shape in enumerate(table.shapes):
            for j, x in enumerate(table.xs):
                s = "" if shape is None else f"{shape:.12g}"
                print(
                    f"{table.family},{s},{x:.12g},"
                    f"{table.tail[i, j]:.12g},{table.truncated_mean[i, j]:.12g}"
                )
        print(f"# columns_decreasing={table.columns_decreasing}", file=sys.stderr)
    else:  # moment-table
        table = oracles.second_moment_table(
            args.family,
            _parse_floats(args.shapes) if args.shapes else (),
            args.mu,
            args.threshold,
        )
        print("family,shape,second_moment")
        for i, shape in enumerate(table.shapes):
            s = "" if shape is None else f"{shape:.12g}"
            print(f"{table.family},{s},{experiments._fmt(float(table.second_moment[i]))}")
        print(f"# second_moment_diverging={table.second_moment_diverging}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agedelay",
        description="Age-of-information vs. delay simulator and oracle toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one configuration point")
    sim.add_argument("--arrival", default="exp", help="arrival family: det or exp")
    sim.add_argument("--lam", "--lambda", dest="lam", type=float, required=True, help="generation rate")
    sim.add_argument("--service", required=True, help="service spec, e.g. 'pareto alpha=1.5'")
    sim.add_argument("--mu", type=float, required=True, help="service rate")
    sim.add_argument(
        "--discipline",
        default="fcfs",
        choices=[d.value for d in Discipline],
    )
    sim.add_argument("--n-arrivals", type=int, default=100_000)
    sim.add_argument("--n-reps", type=int, default=4)
    sim.add_argument("--base-seed", type=int, default=0)
    sim.add_argument("--warmup", type=float, default=0.1)
    sim.add_argument("--gginf-samples", type=int, default=50_000)
    sim.add_argument("--serial", action="store_true", help="disable concurrent replications")
    sim.add_argument("--json", action="store_true", help="emit JSON instead of a CSV row")
    sim.set_defaults(func=_cmd_simulate)

    sweep = sub.add_parser("sweep", help="run a config-file suite")
    sweep.add_argument("--config", required=True, help="INI config path")
    _add_sweep_common(sweep)
    sweep.set_defaults(func=_cmd_sweep)

    fig = sub.add_parser("figure1", help="run the shipped age-delay scatter preset")
    _add_sweep_common(fig)
    fig.set_defaults(func=lambda args: _cmd_sweep(args, preset="figure1"))

    oracle = sub.add_parser("oracle", help="print analytic baselines as CSV")
    okind = oracle.add_subparsers(dest="oracle_kind", required=True)

    amin = okind.add_parser("a-min", help="age floor from the arrival process")
    amin.add_argument("--arrival", default="exp")
    amin.add_argument("--lam", "--lambda", dest="lam", type=float, required=True)

    pk = okind.add_parser("pk-delay", help="Pollaczek-Khinchine mean delay")
    pk.add_argument("--service", required=True)
    pk.add_argument("--mu", type=float, required=True)
    pk.add_argument("--lam", "--lambda", dest="lam", type=float, required=True)

    dd1 = okind.add_parser("dd1-age", help="periodic-arrival deterministic-service age")
    dd1.add_argument("--lam", "--lambda", dest="lam", type=float, required=True)
    dd1.add_argument("--mu", type=float, required=True)

    gg = okind.add_parser("gginf", help="infinite-server age estimate")
    gg.add_argument("--arrival", default="exp")
    gg.add_argument("--lam", "--lambda", dest="lam", type=float, required=True)
    gg.add_argument("--service", required=True)
    gg.add_argument("--mu", type=float, required=True)
    gg.add_argument("--n-samples", type=int, default=100_000)
    gg.add_argument("--seed", type=int, default=0)

    tail = okind.add_parser("tail-table", help="tail and truncated-mean sweep table")
    tail.add_argument("--family", required=True)
    tail.add_argument("--shapes", default="", help="shape grid, ordered toward the limit")
    tail.add_argument("--xs", required=True, help="thresholds, each >= 1/lambda")
    tail.add_argument("--mu", type=float, required=True)
    tail.add_argument("--lam", "--lambda", dest="lam", type=float, required=True)

    mom = okind.add_parser("moment-table", help="second-moment sweep table")
    mom.add_argument("--family", required=True)
    mom.add_argument("--shapes", default="")
    mom.add_argument("--mu", type=float, required=True)
    mom.add_argument("--threshold", type=float, default=None)

    oracle.set_defaults(func=_cmd_oracle)
    return parser


def _add_sweep_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument(
        "--set",
        action="append",
        metavar="SECTION.KEY=VALUE",
        help="override a config value, e.g. --set run.n_arrivals=10000",
    )
    sp.add_argument("--out-dir", default="results", help="directory for output files")
    sp.add_argument("--serial", action="store_true", help="disable concurrent execution")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, StabilityError, DegenerateSampleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
