"""Experiment driver: generate traces, train agents, evaluate, compare.

Exit codes: 0 ok, 2 usage, 3 configuration, 4 data/consistency,
5 numeric divergence. Every CSV starts with `#iabsim v<version> seed=<seed>`
and is byte-reproducible for a fixed seed (timing columns excepted).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import __version__, allocation, baseline, dqn, scheduling
from .allocation import ResourceKind
from .config import ALLOCATOR_PRESETS, ExperimentConfig, load_config, serialize_config
from .errors import (
    ConfigurationError,
    ConsistencyError,
    IabsimError,
    NumericError,
)
from .network import DayTrace, derive_seed, generate_day
from .traceio import write_trace

SCHEDULER_CKPT = "scheduler.ckpt"
BAND_CKPT = "band.ckpt"
ANTENNA_CKPT = "antenna.ckpt"


@dataclass(frozen=True)
class MetricsRow:
    method: str
    day: int
    interval: int
    reward: float
    allocated_total: float
    demand_total: float
    waste: float


def throughput_metrics(method: str, day: int, interval: int, decisions) -> MetricsRow:
    """Aggregate one interval's bandwidth decisions into a metrics row."""
    allocated = sum(d.granted for d in decisions)
    demand = sum(d.demand for d in decisions)
    reward = sum(d.reward for d in decisions)
    return MetricsRow(method, day, interval, reward, allocated, demand, allocated - demand)


def _csv_header(seed: int) -> str:
    return f"#iabsim v{__version__} seed={seed}"


def _write_csv(path: Path, seed: int, column_line: str, rows, footer: str | None = None) -> None:
    lines = [_csv_header(seed), column_line]
    lines.extend(rows)
    if footer is not None:
        lines.append(footer)
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def _require_checkpoint(path: Path) -> None:
    if not path.is_file():
        raise ConsistencyError(
            f"missing model checkpoint {path}; run the matching train command first"
        )


def _scheduler_net_for(cfg: ExperimentConfig, path: Path) -> dqn.QNetwork:
    _require_checkpoint(path)
    net, _ = dqn.checkpoint_load(path)
    expected = 2 * cfg.scheduler.max_links
    if net.input_dim != expected:
        raise ConsistencyError(
            f"checkpoint input dim {net.input_dim} does not fit scenario state size {expected}"
        )
    return net


def cmd_generate(cfg: ExperimentConfig, args) -> int:
    seed = args.seed if args.seed is not None else cfg.train_seed
    day = generate_day(seed, cfg.scenario)
    write_trace(day, cfg.scenario.cap_mb, cfg.scenario.antennas_per_bs, args.out)
    print(f"wrote {args.out} (seed={seed})")
    return 0


def _train_days(cfg: ExperimentConfig, seed: int):
    from .network import day_stream

    return day_stream(seed, cfg.scenario)


def cmd_train_scheduler(cfg: ExperimentConfig, args) -> int:
    seed = args.seed if args.seed is not None else cfg.train_seed
    out_dir = Path(args.out if args.out else cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train_cfg = cfg.scheduler.train_config(seed)
    net, rewards = scheduling.train_scheduler(
        train_cfg,
        cfg.scheduler.epsilon_schedule(),
        _train_days(cfg, seed),
        max_links=cfg.scheduler.max_links,
    )
    dqn.checkpoint_save(net, dqn.AdamState.for_network(net), out_dir / SCHEDULER_CKPT)
    _write_csv(
        out_dir / "scheduler_rewards.csv",
        seed,
        "episode,reward",
        (f"{ep},{r:.6f}" for ep, r in enumerate(rewards)),
    )
    print(f"trained scheduler for {len(rewards)} episodes; final reward {rewards[-1]:.4f}")
    return 0


def cmd_train_allocator(cfg: ExperimentConfig, args) -> int:
    seed = args.seed if args.seed is not None else cfg.train_seed
    settings = ALLOCATOR_PRESETS[args.alloc_config] if args.alloc_config else cfg.allocator
    out_dir = Path(args.out if args.out else cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (band_net, antenna_net), (band_curve, antenna_curve) = allocation.train_allocator(
        settings.train_config(seed),
        settings.epsilon_schedule(),
        _train_days(cfg, seed),
        settings.hidden_layers,
        num_bs=cfg.scenario.num_bs,
    )
    dqn.checkpoint_save(band_net, dqn.AdamState.for_network(band_net), out_dir / BAND_CKPT)
    dqn.checkpoint_save(
        antenna_net, dqn.AdamState.for_network(antenna_net), out_dir / ANTENNA_CKPT
    )
    _write_csv(
        out_dir / "allocator_rewards.csv",
        seed,
        "episode,band_reward,antenna_reward",
        (
            f"{ep},{b:.6f},{a:.6f}"
            for ep, (b, a) in enumerate(zip(band_curve, antenna_curve))
        ),
    )
    print(
        f"trained allocator for {len(band_curve)} episodes; final rewards "
        f"band={band_curve[-1]:.2f} antenna={antenna_curve[-1]:.2f} (max 288)"
    )
    return 0


def cmd_evaluate(cfg: ExperimentConfig, args) -> int:
    seed = args.seed if args.seed is not None else cfg.eval_seed
    model = Path(args.model) if args.model else Path(cfg.output_dir) / SCHEDULER_CKPT
    net = _scheduler_net_for(cfg, model)
    day = generate_day(seed, cfg.scenario)
    rows = _evaluate_snapshots(net, day.snapshots, cfg.scheduler.max_links, args.threads)
    acc, mean_s = scheduling.accuracy_summary(rows)
    out = Path(args.out) if args.out else Path(cfg.output_dir) / "schedule_report.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out,
        seed,
        "snapshot,links,activated_agent,activated_oracle,matches,reward_agent,reward_oracle,infer_seconds",
        (
            f"{r.interval_index},{r.links},{r.activated_agent},{r.activated_oracle},"
            f"{r.matches},{r.reward_agent:.6f},{r.reward_oracle:.6f},{r.infer_seconds:.6f}"
            for r in rows
        ),
        footer=f"#summary accuracy={acc:.6f} mean_infer_s={mean_s:.6f}",
    )
    print(f"accuracy {acc:.6f}, mean inference {mean_s:.6f}s per graph -> {out}")
    return 0


def _evaluate_snapshots(net, snapshots, max_links, threads):
    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        shards = [list(snapshots[i::threads]) for i in range(threads)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = pool.map(
                lambda shard: scheduling.evaluate_against_oracle(net, shard, max_links), shards
            )
        rows = [row for shard_rows in results for row in shard_rows]
        rows.sort(key=lambda r: r.interval_index)
        return rows
    return scheduling.evaluate_against_oracle(net, list(snapshots), max_links)


def _quadratic_total(decisions) -> float:
    return sum(allocation.allocation_reward(d.granted, d.demand) for d in decisions)


def run_comparison(
    cfg: ExperimentConfig,
    band_net: dqn.QNetwork,
    antenna_net: dqn.QNetwork,
    out_dir: Path,
    seed: int,
    num_days: int,
) -> dict[str, float]:
    """Learned allocator vs largest-residual baseline vs exhaustive oracle.

    Emits reward, throughput and decision CSVs over num_days evaluation
    days; returns the summed per-method quadratic scores.
    """
    reward_rows: list[str] = []
    throughput_rows: list[str] = []
    decision_rows: list[str] = []
    totals = {"drl": 0.0, "baseline": 0.0, "oracle": 0.0}

    for day_index in range(num_days):
        day = generate_day(derive_seed(seed, day_index), cfg.scenario)
        loads = allocation.day_loads(day, cfg.scenario.num_bs)
        day_scores = {
            "drl": {"band": 0.0, "antenna": 0.0},
            "oracle": {"band": 0.0, "antenna": 0.0},
            "baseline": {"band": 0.0, "antenna": 0.0},
            "baseline_quadratic": {"band": 0.0, "antenna": 0.0},
        }
        for profiles, load in zip(day.slice_profiles, loads):
            interval = load.interval_index
            drl_decisions, _, _ = allocation.run_interval(
                band_net, antenna_net, profiles, load, 0.0
            )
            drl_by_resource = {
                ResourceKind.BANDWIDTH: [
                    d for d in drl_decisions if d.resource == ResourceKind.BANDWIDTH
                ],
                ResourceKind.ANTENNA: [
                    d for d in drl_decisions if d.resource == ResourceKind.ANTENNA
                ],
            }
            band_demands = [p.band_demand for p in profiles]
            antenna_demands = [p.antenna_demand for p in profiles]
            band_residuals = [load.residual_band[b] for b in sorted(load.residual_band)]
            antenna_residuals = [
                load.residual_antennas[b] for b in sorted(load.residual_antennas)
            ]

            oracle_scores = {}
            oracle_choices = {}
            for res_name, demands, residuals in (
                ("band", band_demands, band_residuals),
                ("antenna", antenna_demands, antenna_residuals),
            ):
                choices, total = allocation.oracle_allocation(demands, residuals)
                oracle_scores[res_name] = total
                oracle_choices[res_name] = choices

            base_decisions = {}
            for res_name, demands, residuals in (
                ("band", band_demands, band_residuals),
                ("antenna", antenna_demands, antenna_residuals),
            ):
                decisions, native_total = baseline.baseline_select(demands, residuals)
                base_decisions[res_name] = decisions
                day_scores["baseline"][res_name] += native_total
                day_scores["baseline_quadratic"][res_name] += _quadratic_total(decisions)

            for res_name, resource in (("band", ResourceKind.BANDWIDTH), ("antenna", ResourceKind.ANTENNA)):
                day_scores["drl"][res_name] += sum(d.reward for d in drl_by_resource[resource])
                day_scores["oracle"][res_name] += oracle_scores[res_name]

            drl_band = drl_by_resource[ResourceKind.BANDWIDTH]
            base_band = base_decisions["band"]
            rows = [
                throughput_metrics("drl", day_index, interval, drl_band),
                throughput_metrics("baseline", day_index, interval, base_band),
            ]
            oracle_alloc = _oracle_band_metrics(
                day_index, interval, band_demands, band_residuals, oracle_choices["band"]
            )
            rows.append(oracle_alloc)
            throughput_rows.extend(
                f"{r.day},{r.interval},{r.method},{r.allocated_total:.6f},"
                f"{r.demand_total:.6f},{r.waste:.6f}"
                for r in rows
            )

            for d in drl_decisions:
                decision_rows.append(
                    f"drl,{day_index},{interval},{d.slice_kind.value},{d.resource.value},"
                    f"{d.chosen_bs},{d.demand:.6f},{d.granted:.6f},{d.reward:.6f}"
                )
            for res_name in ("band", "antenna"):
                for d in base_decisions[res_name]:
                    decision_rows.append(
                        f"baseline,{day_index},{interval},{d.slice_kind.value},{res_name},"
                        f"{d.chosen_bs},{d.demand:.6f},{d.granted:.6f},{d.reward:.6f}"
                    )

        for method, scores in day_scores.items():
            reward_rows.append(
                f"{day_index},{method},{scores['band']:.6f},{scores['antenna']:.6f},"
                f"{scores['band'] + scores['antenna']:.6f}"
            )
        totals["drl"] += day_scores["drl"]["band"] + day_scores["drl"]["antenna"]
        totals["oracle"] += day_scores["oracle"]["band"] + day_scores["oracle"]["antenna"]
        totals["baseline"] += (
            day_scores["baseline_quadratic"]["band"] + day_scores["baseline_quadratic"]["antenna"]
        )

    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out_dir / "compare_rewards.csv", seed,
        "day,method,band_reward,antenna_reward,total_reward", reward_rows,
    )
    _write_csv(
        out_dir / "compare_throughput.csv", seed,
        "day,interval,method,allocated_total,demand_total,waste", throughput_rows,
    )
    _write_csv(
        out_dir / "compare_decisions.csv", seed,
        "method,episode,interval,slice,resource,chosen_bs,demand,granted,reward", decision_rows,
    )
    return totals


def _oracle_band_metrics(day, interval, demands, residuals, choices) -> MetricsRow:
    remaining = list(residuals)
    allocated = 0.0
    reward = 0.0
    for demand, bs in zip(demands, choices):
        granted = remaining[bs - 1]
        remaining[bs - 1] = 0.0
        allocated += granted
        reward += allocation.allocation_reward(granted, demand)
    demand_total = sum(demands)
    return MetricsRow("oracle", day, interval, reward, allocated, demand_total, allocated - demand_total)


def cmd_compare(cfg: ExperimentConfig, args) -> int:
    seed = args.seed if args.seed is not None else cfg.eval_seed
    models = Path(args.models) if args.models else Path(cfg.output_dir)
    band_path, antenna_path = models / BAND_CKPT, models / ANTENNA_CKPT
    _require_checkpoint(band_path)
    _require_checkpoint(antenna_path)
    band_net, _ = dqn.checkpoint_load(band_path)
    antenna_net, _ = dqn.checkpoint_load(antenna_path)
    expected = allocation.observation_size(cfg.scenario.num_bs)
    for name, net in (("band", band_net), ("antenna", antenna_net)):
        if net.input_dim != expected or net.output_dim != cfg.scenario.num_bs:
            raise ConsistencyError(
                f"{name} checkpoint dims {net.layer_dims} do not fit a "
                f"{cfg.scenario.num_bs}-BS scenario"
            )
    out_dir = Path(args.out) if args.out else Path(cfg.output_dir)
    totals = run_comparison(cfg, band_net, antenna_net, out_dir, seed, args.days)
    gain = (totals["drl"] - totals["baseline"]) / totals["baseline"] * 100.0
    print(
        f"quadratic-scored totals over {args.days} day(s): "
        f"drl={totals['drl']:.2f} baseline={totals['baseline']:.2f} "
        f"oracle={totals['oracle']:.2f} (drl vs baseline {gain:+.2f}%)"
    )
    return 0


def cmd_show_config(cfg: ExperimentConfig, args) -> int:
    sys.stdout.write(serialize_config(cfg))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iabsim",
        description="Dynamic IAB network simulator with learned link scheduling and slice allocation.",
    )
    parser.add_argument("--config", help="path to a key = value config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write one day trace")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train-scheduler", help="train the link scheduling agent")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=cmd_train_scheduler)

    p = sub.add_parser("train-allocator", help="train the bandwidth and antenna agents")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--alloc-config", type=int, choices=(1, 2), default=None,
                   help="preset: 1 = 2 hidden layers / 500 episodes, 2 = 1 layer / 21 episodes")
    p.set_defaults(func=cmd_train_allocator)

    p = sub.add_parser("evaluate", help="score the scheduler against the rank oracle")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--model", default=None, help="scheduler checkpoint path")
    p.add_argument("--out", default=None, help="report CSV path")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="learned allocator vs baseline vs oracle")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--models", default=None, help="directory holding band/antenna checkpoints")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--days", type=int, default=5)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("show-config", help="print the effective configuration")
    p.set_defaults(func=cmd_show_config)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, os.environ)
        return args.func(cfg, args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric divergence: {exc}", file=sys.stderr)
        return 5
    except IabsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
