"""Command-line entry point: ``ohca {summarize,allocate,simulate,train,benchmark}``.

Every random draw derives from ``--seed`` (default 0, or the scenario's own
seed for ``simulate``). Errors print ``error: <ErrorName>: <message>`` on
stderr and exit with status 1.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import predictor
from .allocators import allocate, parse_strategy
from .core import AllocationPlan, Direction, average_allocation
from .errors import OhcaError
from .sim import simulator
from .traffic import (
    ChannelBounds,
    ProbabilityVector,
    idle_time_probabilities,
    inverse_packet_count_probabilities,
    read_trace_csv,
    summarize_trace,
)

DEFAULT_SEED = 0


def _bounds(args, fallback=None):
    if args.lmin is None and args.lmax is None:
        return fallback
    l_min = args.lmin if args.lmin is not None else 1
    l_max = args.lmax if args.lmax is not None else l_min
    return ChannelBounds(l_min, l_max)


def _write(path, text):
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True)
    path.write_text(text)


def read_probs_csv(path) -> ProbabilityVector:
    """``station,probability`` rows; values are renormalized if off by rounding."""
    with open(path, newline="") as fh:
        rows = sorted(
            ((int(r["station"]), float(r["probability"])) for r in csv.DictReader(fh)),
            key=lambda r: r[0],
        )
    if [s for s, _ in rows] != list(range(len(rows))):
        raise ValueError("probability file must list stations 0..M-1")
    return ProbabilityVector.from_weights([p for _, p in rows])


def _probs_from_trace(args) -> ProbabilityVector:
    stats = [summarize_trace(t) for t in read_trace_csv(args.trace, args.window_length)]
    if args.source == "packets":
        return inverse_packet_count_probabilities(stats)
    return idle_time_probabilities(stats)


def cmd_summarize(args):
    stats = [summarize_trace(t) for t in read_trace_csv(args.trace, args.window_length)]
    idle = idle_time_probabilities(stats)
    try:
        inv = inverse_packet_count_probabilities(stats).values
    except OhcaError:
        inv = None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["station", "idle_time", "packet_count", "p_idle", "p_inverse_packets"])
    for i, s in enumerate(stats):
        w.writerow([
            s.station_id, repr(s.idle_time), s.packet_count, repr(idle.values[i]),
            repr(inv[i]) if inv is not None else "",
        ])
    if args.out:
        _write(args.out, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def cmd_allocate(args):
    if (args.trace is None) == (args.probs is None):
        raise SystemExit("allocate: give exactly one of --trace or --probs")
    probs = read_probs_csv(args.probs) if args.probs else _probs_from_trace(args)
    plan = allocate(args.strategy, probs, args.channels, _bounds(args), Direction(args.direction))
    if args.out:
        out = Path(args.out)
        _write(out, plan.to_csv())
        _write(out.with_suffix(".json"), plan.to_json())
    else:
        sys.stdout.write(plan.to_csv())
    print(f"objective={average_allocation(plan, probs)!r} residual={plan.residual_to_pool}")


def _scenario_plan(scenario, strategy, bounds, direction):
    fixed_L, dynamic = simulator.split_channels(scenario.total_channels, scenario.fixed_fraction)
    probs = simulator.scenario_probabilities(scenario)
    if bounds is None:
        bounds = simulator.scenario_bounds(scenario)
    plan = allocate(strategy, probs, fixed_L, bounds, direction)
    return plan, dynamic + plan.residual_to_pool, probs


def cmd_simulate(args):
    scenario = simulator.ScenarioConfig.load(args.scenario)
    seed = args.seed if args.seed is not None else scenario.seed
    if args.plan:
        plan = AllocationPlan.from_json_dict(json.loads(Path(args.plan).read_text()))
        _, dynamic = simulator.split_channels(scenario.total_channels, scenario.fixed_fraction)
        pool = dynamic + plan.residual_to_pool
    else:
        plan, pool, _ = _scenario_plan(
            scenario, args.strategy, _bounds(args), Direction(args.direction)
        )
    metrics = simulator.run_hca_simulation(scenario, plan, pool, seed=seed)
    if args.out:
        _write(args.out, metrics.to_csv())
    else:
        sys.stdout.write(metrics.to_csv())
    print(metrics.summary_line())


def cmd_train(args):
    if args.dataset:
        records = predictor.read_dataset_csv(args.dataset)
        M = max(r.features.bsn for r in records) + 1
        slots = max(r.features.slot for r in records) + 1
        M = max(M, args.stations or 0)
        slots = max(slots, args.slots or 0)
    else:
        M, slots = args.stations or 4, args.slots or 24
        records = predictor.synth_traffic_dataset(M, args.days, slots, seed=args.seed)
    if args.write_dataset:
        predictor.write_dataset_csv(records, args.write_dataset)
    data = predictor.encode_dataset(records, M, slots)
    model = predictor.init_model([M + 3, *args.hidden, 2], seed=args.seed)
    config = predictor.TrainConfig(args.lr, args.epochs, args.batch_size, args.seed)
    trained, history = predictor.mlp_train(model, data, config)
    initial = predictor.standardized_mse(model, data, trained.target_mean, trained.target_scale)

    _write(args.out, json.dumps(trained.to_json_dict(), indent=1) + "\n")
    if args.history:
        lines = ["epoch,mse"] + [f"{i},{v!r}" for i, v in enumerate(history)]
        _write(args.history, "\n".join(lines) + "\n")

    packets = [
        predictor.predict_parameters(
            trained, predictor.TrafficFeatures(b, w, s), M, slots
        )[1]
        for b in range(M) for w in (False, True) for s in range(slots)
    ]
    bounds = predictor.derive_bounds(packets, args.capacity_factor)
    print(
        f"initial_mse={initial!r} final_mse={history[-1]!r} "
        f"l_min={bounds.l_min} l_max={bounds.l_max}"
    )


def _bench_job(job):
    scenario_doc, token, bounds, direction, seeds = job
    scenario = simulator.ScenarioConfig.from_dict(scenario_doc)
    plan, pool, probs = _scenario_plan(scenario, token, bounds, direction)
    summary = simulator.evaluate_plan(scenario, plan, seeds, dynamic_pool=pool, probs=probs)
    return token, summary.objective, summary.mean_blocking, summary.std_blocking


def run_benchmark(scenario, strategies, seeds, bounds=None, direction=Direction.MINIMIZE, jobs=1):
    """One ``(strategy, objective, mean_blocking, std_blocking)`` row per strategy.

    Every strategy is simulated on the same seeds; rows come back sorted by
    strategy token.
    """
    tokens = [parse_strategy(s).value for s in strategies]
    work = [(scenario.to_dict(), t, bounds, direction, list(seeds)) for t in tokens]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_bench_job, work))
    else:
        rows = [_bench_job(w) for w in work]
    return sorted(rows, key=lambda r: r[0])


def cmd_benchmark(args, parser):
    strategies = [s for s in (args.strategies or "").split(",") if s.strip()]
    if not strategies:
        parser.error("benchmark: --strategies must name at least one strategy")
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    if not seeds:
        parser.error("benchmark: --seeds must list at least one seed")
    scenario = simulator.ScenarioConfig.load(args.scenario)
    rows = run_benchmark(
        scenario, [s.strip() for s in strategies], seeds, _bounds(args),
        Direction(args.direction), args.jobs,
    )
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["strategy", "objective", "mean_blocking", "std_blocking"])
    for token, obj, mean, std in rows:
        w.writerow([token, repr(obj), repr(mean), repr(std)])
    if args.out:
        _write(args.out, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _add_alloc_flags(p):
    p.add_argument("--strategy", default="uniform",
                   help="ap1 | ap2 | ap3 | gp4 | source | uniform")
    p.add_argument("--lmin", type=int)
    p.add_argument("--lmax", type=int)
    p.add_argument("--direction", choices=["min", "max"], default="min")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ohca", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("summarize", help="per-station idle time, packets and probabilities")
    p.add_argument("--trace", required=True)
    p.add_argument("--window-length", type=float, default=3600.0)
    p.add_argument("--out")

    p = sub.add_parser("allocate", help="compute a fixed-channel plan")
    p.add_argument("--trace")
    p.add_argument("--window-length", type=float, default=3600.0)
    p.add_argument("--source", choices=["idle", "packets"], default="idle")
    p.add_argument("--probs", help="CSV with station,probability")
    p.add_argument("--channels", "-L", type=int, required=True, dest="channels")
    _add_alloc_flags(p)
    p.add_argument("--out", help="plan CSV path; the JSON goes next to it")

    p = sub.add_parser("simulate", help="simulate one scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--plan", help="plan JSON from `allocate` (overrides --strategy)")
    _add_alloc_flags(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = sub.add_parser("train", help="train the traffic predictor")
    p.add_argument("--dataset", help="CSV bsn,is_weekend,slot,idle_time,packet_count")
    p.add_argument("--stations", type=int)
    p.add_argument("--days", type=int, default=30)
    p.add_argument("--slots", type=int)
    p.add_argument("--hidden", type=int, nargs="*", default=[16])
    p.add_argument("--lr", type=float, default=predictor.TrainConfig.learning_rate)
    p.add_argument("--epochs", type=int, default=predictor.TrainConfig.epochs)
    p.add_argument("--batch-size", type=int, default=predictor.TrainConfig.batch_size)
    p.add_argument("--capacity-factor", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--write-dataset")
    p.add_argument("--history")
    p.add_argument("--out", required=True)

    p = sub.add_parser("benchmark", help="compare strategies on one scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--strategies", default="")
    p.add_argument("--seeds", default=str(DEFAULT_SEED), help="comma-separated seeds")
    p.add_argument("--lmin", type=int)
    p.add_argument("--lmax", type=int)
    p.add_argument("--direction", choices=["min", "max"], default="min")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "benchmark":
            cmd_benchmark(args, parser)
        else:
            {
                "summarize": cmd_summarize,
                "allocate": cmd_allocate,
                "simulate": cmd_simulate,
                "train": cmd_train,
            }[args.command](args)
    except OhcaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
