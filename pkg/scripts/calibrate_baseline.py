"""Random search for the per-UAV radio draws of the bundled baseline scenario.

The geometry, energy capacities, prices and game weights are fixed to the
published table values. Per-UAV radio parameters are drawn from the
published ranges, and the data sizes are scaled down (keeping their 1:5:15
ratio) until the structural outcomes of the baseline experiment appear:
UAVs 1 and 2 cannot serve any cell alone, the singleton auction gives
4->1, 3->2, 6->3, and merge-and-split ends in {{1,3},{2},{4},{5},{6}}.

    python scripts/calibrate_baseline.py --samples 20000 --seed 7 --write
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from uavcoal.auction import allocate, coalition_profit, feasible
from uavcoal.coalition import Coalition, Partition, merge_and_split
from uavcoal.oracle import certify_stability, exhaustive_best_assignment, exhaustive_best_partition
from uavcoal.scenario import dump_scenario, scenario_from_dict

CELLS = [(1, (200, 300), 18.4), (2, (500, 700), 25.2), (3, (800, 600), 34.6)]
UAVS = [(1, (100, 100), 200), (2, (300, 500), 500), (3, (100, 600), 1000),
        (4, (600, 200), 1250), (5, (900, 200), 3000), (6, (800, 800), 3500)]
TARGET_SINGLETON_GAMMA = 95.7
FINAL = Partition.from_lists([[1, 3], [2], [4], [5], [6]])
FINAL_ALLOC = {Coalition.of(1, 3): 1, Coalition.of(4): 2, Coalition.of(6): 3}
FIRST_STAGE = {Coalition.of(4): 1, Coalition.of(3): 2, Coalition.of(6): 3}


def build(draw: dict):
    doc = {
        "grid": [1000, 1000],
        "cells": [{"id": cid, "position": list(pos), "price_per_importance": 3.0,
                   "importance_override": sigma, "worker_count": int(draw["workers"][k])}
                  for k, (cid, pos, sigma) in enumerate(CELLS)],
        "uavs": [{"id": uid, "depot": list(pos), "energy_capacity": float(e),
                  "cooperation_cost": 2.0, "energy_price": 0.03,
                  **{key: float(v[k]) for key, v in draw["uav"].items()}}
                 for k, (uid, pos, e) in enumerate(UAVS)],
        "radio": {"worker_update_size_mb": draw["size"], "cell_aggregate_size_mb": 5 * draw["size"],
                  "global_model_size_mb": 15 * draw["size"]},
        "game": {"required_iterations": 20},
    }
    return scenario_from_dict(doc)


# Per-UAV sampling ranges inside the published ones. UAV 1 is drawn from the
# energy-efficient corner and UAV 2 from the inefficient one, so that UAV 1
# can only help as a partner and UAV 2 helps nobody.
FULL = {"bandwidth": (200e3, 400e3), "tx_power": (0.5, 5.0), "rx_power": (0.5, 1.0),
        "channel_gain_db": (5.0, 25.0), "cpu_cycles_per_aggregation": (1e9, 3e9)}
BIASED = {
    1: {"bandwidth": (350e3, 400e3), "tx_power": (0.5, 1.0), "rx_power": (0.5, 0.6)},
    2: {"bandwidth": (200e3, 250e3), "tx_power": (4.0, 5.0), "rx_power": (0.9, 1.0)},
}
ROUNDING = {"bandwidth": -3, "tx_power": 2, "rx_power": 2, "channel_gain_db": 1,
            "cpu_cycles_per_aggregation": -7}


def sample(rng: np.random.Generator) -> dict:
    uav = {key: np.empty(6) for key in FULL}
    for k, (uid, _, _) in enumerate(UAVS):
        for key, (lo, hi) in FULL.items():
            lo, hi = BIASED.get(uid, {}).get(key, (lo, hi))
            uav[key][k] = np.round(rng.uniform(lo, hi), ROUNDING[key])
    return {
        "size": float(np.round(rng.uniform(0.2, 3.0), 2)),
        "workers": rng.integers(1, 7, size=3),
        "uav": uav,
    }


def gamma_partition(scn):
    part, out = merge_and_split(None, scn)
    return part, out.total_profit


def check(scn, full: bool) -> tuple[float, dict] | None:
    """Return (score, info) if every structural target holds, else None."""
    cells = {c.id: c for c in scn.cells}
    for uid in (1, 2):
        if any(feasible(Coalition.of(uid), c, scn) for c in scn.cells):
            return None
    for uid in (3, 4, 5, 6):
        if not all(feasible(Coalition.of(uid), c, scn) for c in scn.cells):
            return None
    k0 = scn.with_uavs(cooperation_cost=0.0)
    if any(feasible(Coalition.of(1, 2), c, k0) for c in k0.cells):
        return None
    first = allocate(Partition.singletons(scn.uav_ids), scn)
    if first.as_mapping() != FIRST_STAGE:
        return None
    g_single = first.total_profit
    if abs(g_single - TARGET_SINGLETON_GAMMA) > 1.5:
        return None
    # {1,3} must be the best coalition for Cell 1
    try:
        p13 = coalition_profit(Coalition.of(1, 3), cells[1], scn)[2]
    except ValueError:
        return None
    for other in ((3,), (2, 3), (1, 2, 3)):
        c = Coalition(other)
        if feasible(c, cells[1], scn) and coalition_profit(c, cells[1], scn)[2] >= p13:
            return None
    part, g = gamma_partition(scn)
    if part != FINAL:
        return None
    out = allocate(part, scn)
    if out.as_mapping() != FINAL_ALLOC:
        return None
    if not 97.5 <= g <= 99.5:
        return None
    info = {"singleton_gamma": g_single, "final_gamma": g}
    if not full:
        return abs(g_single - TARGET_SINGLETON_GAMMA), info
    # cooperation-cost sweep
    prev = float("inf")
    for k in range(7):
        sk = scn.with_uavs(cooperation_cost=float(k))
        pk, gk = gamma_partition(sk)
        if gk > prev + 1e-9:
            return None
        prev = gk
        singles = all(len(c) == 1 for c in pk)
        if k >= 4 and not singles:
            return None
        if k == 3 and singles:
            return None
    # iteration sweep
    prev = float("inf")
    for mu in range(20, 101, 10):
        sm = scn.with_game(required_iterations=mu)
        pm, om = merge_and_split(None, sm)
        if om.total_profit > prev + 1e-9 or max(len(c) for c in pm) > 3:
            return None
        prev = om.total_profit
        if mu == 100 and om.allocation:
            return None
    rep = exhaustive_best_partition(scn, algorithm_partition=part)
    if rep.best_total_profit > g + 1e-9 or not rep.stability_certified:
        return None
    if exhaustive_best_assignment(part, scn)[1] > g + 1e-9:
        return None
    if certify_stability(Partition.grand(scn.uav_ids), scn):
        return None
    return abs(g_single - TARGET_SINGLETON_GAMMA), info


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--write", action="store_true", help="overwrite the bundled baseline")
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    best = None
    for i in range(args.samples):
        draw = sample(rng)
        scn = build(draw)
        res = check(scn, full=False)
        if res is None or (best is not None and res[0] >= best[0]):
            continue
        res = check(scn, full=True)
        if res is None:
            continue
        best = (res[0], scn, res[1])
        print(f"sample {i}: {res[1]}", file=sys.stderr)
        if res[0] < 0.05:
            break
    if best is None:
        print("no candidate satisfied every target", file=sys.stderr)
        return 1
    text = dump_scenario(best[1])
    if args.write:
        path = Path(__file__).resolve().parents[1] / "src/uavcoal/data/paper_baseline.yaml"
        header = "# Baseline scenario; radio draws from scripts/calibrate_baseline.py\n"
        path.write_text(header + text)
        print(f"wrote {path}", file=sys.stderr)
    else:
        print(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
