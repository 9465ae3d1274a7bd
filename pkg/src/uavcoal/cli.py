"""Command-line entry point.

    uavcoal run      --scenario paper_baseline [--trace] [--oracle]
    uavcoal tables   --scenario paper_baseline
    uavcoal sweep    --scenario paper_baseline --parameter cooperation_cost --values 0,1,2,3,4,5,6
    uavcoal compare  --scenario paper_baseline --rounds 3
    uavcoal commtime --scenario paper_baseline --draws 1000

Exit codes: 0 success, 1 empty result (nothing allocated), 2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field, replace
from itertools import islice

import numpy as np

from .auction import (AuctionOutcome, allocate, coalition_profit, feasible, format_allocation,
                      valuation)
from .coalition import Coalition, MoveEvent, Partition, bell_number, enumerate_partitions, merge_and_split
from .oracle import exhaustive_best_partition
from .radio_energy import dbm_per_hz_to_w_per_hz, service_profile, shannon_rate, transmission_time
from .scenario import ScenarioConfig, ScenarioError, load_scenario, served_worker_count

TABLE_COALITIONS = ((3,), (1, 3), (2, 3), (1, 2, 3), (6,), (2, 6))
SWEEPABLE = ("cooperation_cost", "required_iterations")
EXIT_OK, EXIT_EMPTY, EXIT_USAGE = 0, 1, 2


@dataclass
class CoalitionRow:
    coalition: str
    cell: int
    revenue: float
    cost: float
    profit: float
    completion_time: float  # informational only


@dataclass
class ExperimentRecord:
    experiment: str
    seed: int
    partition: str
    allocation: str
    total_profit: float
    num_coalitions: int
    max_coalition_size: int
    swept_parameter: str = ""
    swept_value: float | None = None
    rows: list[CoalitionRow] = field(default_factory=list)

    SUMMARY_FIELDS = ("experiment", "seed", "swept_parameter", "swept_value", "partition",
                      "allocation", "total_profit", "num_coalitions", "max_coalition_size")

    def summary(self) -> dict:
        return {k: getattr(self, k) for k in self.SUMMARY_FIELDS}

    def as_dict(self) -> dict:
        d = self.summary()
        d["rows"] = [vars(r) for r in self.rows]
        return d


# --- experiments (pure functions of scenario and seed) -----------------------


def completion_time(outcome_pair, scenario: ScenarioConfig) -> float:
    """Scheduled iterations times per-iteration time, plus the farthest member's flight."""
    cell = scenario.cell(outcome_pair.cell_id)
    workers = served_worker_count(cell, scenario.game.importance_threshold)
    profiles = {m: service_profile(scenario.uav(m), cell, scenario.radio, workers)
                for m in outcome_pair.coalition}
    busy = sum(n * profiles[m].iteration_time for m, n in outcome_pair.schedule.assignments)
    return busy + max(p.travel_time for p in profiles.values())


def make_record(experiment: str, seed: int, partition: Partition, outcome: AuctionOutcome,
                scenario: ScenarioConfig, **extra) -> ExperimentRecord:
    rows = [CoalitionRow(str(p.coalition), p.cell_id, p.payment, p.cost, p.profit,
                         completion_time(p, scenario)) for p in outcome.allocation]
    rows.sort(key=lambda r: r.cell)
    return ExperimentRecord(
        experiment=experiment, seed=seed, partition=str(partition),
        allocation=format_allocation(outcome.as_mapping()),
        total_profit=outcome.total_profit, num_coalitions=len(partition),
        max_coalition_size=max((len(c) for c in partition), default=0),
        rows=rows, **extra)


def run_experiment(scenario: ScenarioConfig, seed: int, trace: bool = False):
    events: list[MoveEvent] = []
    partition, outcome = merge_and_split(None, scenario, hook=events.append if trace else None)
    return make_record("run", seed, partition, outcome, scenario), events, partition


def preference_table(scenario: ScenarioConfig) -> dict[int, dict[int, float]]:
    """Cell valuations for each UAV on its own, 0 where it cannot serve the cell."""
    table = {}
    for uid in scenario.uav_ids:
        c = Coalition.of(uid)
        table[uid] = {cell.id: valuation(cell, c, scenario) if feasible(c, cell, scenario) else 0.0
                      for cell in sorted(scenario.cells, key=lambda x: x.id)}
    return table


def coalition_table(scenario: ScenarioConfig, coalitions=TABLE_COALITIONS) -> list[dict]:
    known = set(scenario.uav_ids)
    out = []
    for members in coalitions:
        if not set(members) <= known:
            continue
        c = Coalition(members)
        for cell in sorted(scenario.cells, key=lambda x: x.id):
            if feasible(c, cell, scenario):
                rev, cost, prof = coalition_profit(c, cell, scenario)
            else:
                rev = cost = prof = 0.0
            out.append({"coalition": str(c), "cell": cell.id, "revenue": rev, "cost": cost,
                        "profit": prof})
    return out


def apply_parameter(scenario: ScenarioConfig, parameter: str, value: float) -> ScenarioConfig:
    if parameter == "cooperation_cost":
        return scenario.with_uavs(cooperation_cost=float(value))
    if parameter == "required_iterations":
        if float(value) != int(value):
            raise ValueError(f"required_iterations must be an integer, got {value}")
        return scenario.with_game(required_iterations=int(value))
    raise ValueError(f"unknown sweep parameter {parameter!r}; choose from {SWEEPABLE}")


def sweep(scenario: ScenarioConfig, parameter: str, values, seed: int) -> list[ExperimentRecord]:
    records = []
    for v in values:
        s = apply_parameter(scenario, parameter, v)
        partition, outcome = merge_and_split(None, s)
        records.append(make_record("sweep", seed, partition, outcome, s,
                                   swept_parameter=parameter, swept_value=float(v)))
    return records


def _maximal_assignments(partition: Partition, scenario: ScenarioConfig):
    """Injective feasible coalition-to-cell maps that cannot be extended."""
    coalitions = list(partition.coalitions)
    options = {c: [cell.id for cell in sorted(scenario.cells, key=lambda x: x.id)
                   if feasible(c, cell, scenario)] for c in coalitions}
    found = []

    def rec(k, used, chosen):
        if k == len(coalitions):
            free = [c for c in coalitions if c not in chosen]
            if not any(cid not in used for c in free for cid in options[c]):
                found.append(dict(chosen))
            return
        c = coalitions[k]
        for cid in options[c]:
            if cid not in used:
                chosen[c] = cid
                rec(k + 1, used | {cid}, chosen)
                del chosen[c]
        rec(k + 1, used, chosen)

    rec(0, frozenset(), {})
    return found


def random_allocation_profit(partition: Partition, scenario: ScenarioConfig,
                             rng: np.random.Generator) -> tuple[dict[Coalition, int], float]:
    options = _maximal_assignments(partition, scenario)
    choice = options[int(rng.integers(len(options)))]
    cells = {c.id: c for c in scenario.cells}
    total = sum(coalition_profit(c, cells[cid], scenario)[2] for c, cid in choice.items())
    return choice, total


def compare(scenario: ScenarioConfig, rounds: int, seed: int) -> list[ExperimentRecord]:
    """Joint scheme against random allocation (b) and random partitioning (c).

    Rounds share one random stream; per round, (b) draws first, then (c).
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    rng = np.random.default_rng(seed)
    ids = scenario.uav_ids
    n_partitions = bell_number(len(ids))
    partition, outcome = merge_and_split(None, scenario)
    records = []
    for r in range(1, rounds + 1):
        records.append(make_record("compare:joint", seed, partition, outcome, scenario,
                                   swept_parameter="round", swept_value=float(r)))
        choice, total = random_allocation_profit(partition, scenario, rng)
        records.append(ExperimentRecord(
            experiment="compare:random_allocation", seed=seed, partition=str(partition),
            allocation=format_allocation(choice), total_profit=total,
            num_coalitions=len(partition), max_coalition_size=max(len(c) for c in partition),
            swept_parameter="round", swept_value=float(r)))
        idx = int(rng.integers(n_partitions))
        rand_part = next(islice(enumerate_partitions(ids), idx, None))
        records.append(make_record("compare:random_partition", seed, rand_part,
                                   allocate(rand_part, scenario), scenario,
                                   swept_parameter="round", swept_value=float(r)))
    return records


def commtime(scenario: ScenarioConfig, draws: int, seed: int) -> list[dict]:
    """Upload time of one worker update vs one cell aggregate, with radio draws."""
    if draws < 1:
        raise ValueError("draws must be >= 1")
    rng = np.random.default_rng(seed)
    rt, env = scenario.commtime, scenario.radio
    noise = dbm_per_hz_to_w_per_hz(env.noise_psd_dbm_per_hz)
    rows = []
    for d in range(1, draws + 1):
        wb, wp, wg, ub, up, ug = (rng.uniform(*getattr(rt, name)) for name in (
            "worker_bandwidth", "worker_tx_power", "worker_channel_gain_db",
            "uav_bandwidth", "uav_tx_power", "uav_channel_gain_db"))
        w_rate = shannon_rate(wb, wp, wg, env.uplink_interference, noise)
        u_rate = shannon_rate(ub, up, ug, env.uplink_interference, noise)
        rows.append({"draw": d,
                     "worker_time": transmission_time(env.worker_update_size, w_rate),
                     "uav_time": transmission_time(env.cell_aggregate_size, u_rate)})
    return rows


# --- output ------------------------------------------------------------------


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def _csv_block(buf, header, rows):
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r.get(h)) for h in header])


def _records_csv(buf, records: list[ExperimentRecord], with_rows: bool):
    _csv_block(buf, ExperimentRecord.SUMMARY_FIELDS, [r.summary() for r in records])
    if with_rows:
        buf.write("\n")
        header = ("experiment", "swept_value", "coalition", "cell", "revenue", "cost", "profit",
                  "completion_time")
        rows = [{"experiment": r.experiment, "swept_value": r.swept_value, **vars(row)}
                for r in records for row in r.rows]
        _csv_block(buf, header, rows)


def _event_dict(e: MoveEvent) -> dict:
    return {"kind": e.kind, "before": str(e.before), "after": str(e.after),
            "gamma_before": e.gamma_before, "gamma_after": e.gamma_after,
            "allocation": format_allocation(e.outcome.as_mapping())}


def _emit(args, csv_writer, payload) -> None:
    if args.format == "json":
        text = json.dumps(payload, indent=2, sort_keys=False) + "\n"
    else:
        buf = io.StringIO()
        csv_writer(buf)
        text = buf.getvalue()
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)


# --- commands ------------------------------------------------------------------


def cmd_run(args, scenario, seed) -> int:
    record, events, partition = run_experiment(scenario, seed, trace=args.trace)
    report = exhaustive_best_partition(scenario, partition) if args.oracle else None

    def write_csv(buf):
        _records_csv(buf, [record], with_rows=True)
        if args.trace:
            buf.write("\n")
            _csv_block(buf, ("kind", "before", "after", "gamma_before", "gamma_after",
                             "allocation"), [_event_dict(e) for e in events])
        if report:
            buf.write("\n")
            d = report.as_dict()
            _csv_block(buf, tuple(d), [d])

    payload = record.as_dict()
    if args.trace:
        payload["trace"] = [_event_dict(e) for e in events]
    if report:
        payload["oracle"] = report.as_dict()
    _emit(args, write_csv, payload)
    return EXIT_OK if record.rows else EXIT_EMPTY


def cmd_tables(args, scenario, seed) -> int:
    prefs = preference_table(scenario)
    coal = coalition_table(scenario)
    cell_ids = scenario.cell_ids

    def write_csv(buf):
        header = ("uav",) + tuple(f"cell_{c}" for c in cell_ids)
        _csv_block(buf, header, [{"uav": u, **{f"cell_{c}": v for c, v in row.items()}}
                                 for u, row in prefs.items()])
        buf.write("\n")
        _csv_block(buf, ("coalition", "cell", "revenue", "cost", "profit"), coal)

    payload = {"preferences": {str(u): {str(c): v for c, v in row.items()}
                               for u, row in prefs.items()},
               "coalitions": coal}
    _emit(args, write_csv, payload)
    return EXIT_OK


def _parse_values(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_sweep(args, scenario, seed) -> int:
    records = sweep(scenario, args.parameter, args.values, seed)
    _emit(args, lambda buf: _records_csv(buf, records, with_rows=False),
          [r.as_dict() for r in records])
    return EXIT_OK


def cmd_compare(args, scenario, seed) -> int:
    records = compare(scenario, args.rounds, seed)
    _emit(args, lambda buf: _records_csv(buf, records, with_rows=False),
          [r.as_dict() for r in records])
    return EXIT_OK


def cmd_commtime(args, scenario, seed) -> int:
    rows = commtime(scenario, args.draws, seed)
    _emit(args, lambda buf: _csv_block(buf, ("draw", "worker_time", "uav_time"), rows), rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True,
                        help="scenario YAML path, or 'paper_baseline' for the bundled one")
    common.add_argument("--seed", type=int, help="override the scenario's rng_seed")
    common.add_argument("--out", help="output path (default: standard output)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--oracle", action="store_true", help="append the exhaustive oracle report")
    common.add_argument("--trace", action="store_true", help="include the merge/split event log")

    ap = argparse.ArgumentParser(prog="uavcoal", description="UAV coalition auction simulator")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="merge-and-split plus allocation")
    sub.add_parser("tables", parents=[common], help="valuation and profit matrices")
    p = sub.add_parser("sweep", parents=[common], help="rerun over a parameter grid")
    p.add_argument("--parameter", required=True, choices=SWEEPABLE)
    p.add_argument("--values", type=_parse_values, default=[],
                   help="comma-separated values, e.g. 0,1,2")
    p = sub.add_parser("compare", parents=[common], help="joint scheme vs random baselines")
    p.add_argument("--rounds", type=int, default=3)
    p = sub.add_parser("commtime", parents=[common], help="worker vs UAV upload times")
    p.add_argument("--draws", type=int, default=1000)
    return ap


COMMANDS = {"run": cmd_run, "tables": cmd_tables, "sweep": cmd_sweep,
            "compare": cmd_compare, "commtime": cmd_commtime}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        scenario = load_scenario(args.scenario)
        seed = scenario.game.rng_seed if args.seed is None else args.seed
        if not 0 <= seed < 2**64:
            raise ValueError("--seed must fit in an unsigned 64-bit integer")
        scenario = replace(scenario, game=replace(scenario.game, rng_seed=seed))
        return COMMANDS[args.command](args, scenario, seed)
    except (OSError, ScenarioError, ValueError) as exc:
        print(f"uavcoal: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
