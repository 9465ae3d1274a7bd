"""Seeded random scenarios for property tests."""
from __future__ import annotations

import numpy as np

from uavcoal.scenario import PaymentRule, ScenarioConfig, scenario_from_dict


def random_scenario(seed: int, n_uavs: int, n_cells: int = 3,
                    rule: PaymentRule = PaymentRule.BID_PRICE,
                    energy=(300.0, 3500.0), coop=(0.0, 3.0)) -> ScenarioConfig:
    rng = np.random.default_rng(seed)
    cells = [{"id": i + 1, "position": rng.uniform(0, 1000, 2).round(1).tolist(),
              "price_per_importance": 3.0,
              "importance_override": round(float(rng.uniform(10, 40)), 2),
              "worker_count": int(rng.integers(1, 4))} for i in range(n_cells)]
    uavs = [{"id": m + 1, "depot": rng.uniform(0, 1000, 2).round(1).tolist(),
             "energy_capacity": round(float(rng.uniform(*energy)), 1),
             "cooperation_cost": round(float(rng.uniform(*coop)), 2),
             "bandwidth": round(float(rng.uniform(200e3, 400e3)), -3),
             "tx_power": round(float(rng.uniform(0.5, 5)), 2),
             "rx_power": round(float(rng.uniform(0.5, 1)), 2),
             "channel_gain_db": round(float(rng.uniform(5, 25)), 1),
             "cpu_cycles_per_aggregation": round(float(rng.uniform(1e9, 3e9)), -7)}
            for m in range(n_uavs)]
    doc = {"grid": [1000, 1000], "cells": cells, "uavs": uavs,
           "radio": {"worker_update_size_mb": 0.38, "cell_aggregate_size_mb": 1.9,
                     "global_model_size_mb": 5.7},
           "game": {"payment_rule": PaymentRule(rule).value, "rng_seed": seed}}
    return scenario_from_dict(doc)


# (criterion, passed, detail) lines gathered by the acceptance suite
ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []
