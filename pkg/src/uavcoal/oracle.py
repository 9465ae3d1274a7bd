"""Brute-force checks for small instances: globally best partition, best
injective assignment, and an independent merge/split stability test.

Stability is re-derived here from its definition with a separate set
partition generator, so a bug in the coalition module cannot hide itself.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .auction import allocate, coalition_profit, feasible
from .coalition import Coalition, Partition, bell_number, enumerate_partitions, merge_and_split
from .scenario import ScenarioConfig

PARTITION_CAP = 10
ASSIGNMENT_CAP = 8
TOL = 1e-9


@dataclass(frozen=True)
class OracleReport:
    best_partition: Partition
    best_total_profit: float
    algorithm_total_profit: float
    optimality_gap: float
    stability_certified: bool
    partitions_evaluated: int

    def as_dict(self) -> dict:
        return {
            "best_partition": str(self.best_partition),
            "best_total_profit": self.best_total_profit,
            "algorithm_total_profit": self.algorithm_total_profit,
            "optimality_gap": self.optimality_gap,
            "stability_certified": self.stability_certified,
            "partitions_evaluated": self.partitions_evaluated,
        }


def exhaustive_best_partition(scenario: ScenarioConfig,
                              algorithm_partition: Partition | None = None) -> OracleReport:
    """Evaluate ``allocate`` on every partition and compare with merge-and-split.

    The gap is relative to the best profit (0 when the best profit is 0).
    Ties keep the first partition in enumeration order.
    """
    ids = scenario.uav_ids
    if len(ids) > PARTITION_CAP:
        raise ValueError(f"{len(ids)} UAVs exceeds the oracle cap of {PARTITION_CAP}")
    best, best_gamma, count = None, float("-inf"), 0
    for p in enumerate_partitions(ids, cap=PARTITION_CAP):
        gamma = allocate(p, scenario).total_profit
        count += 1
        if gamma > best_gamma + TOL:
            best, best_gamma = p, gamma
    if algorithm_partition is None:
        algorithm_partition, outcome = merge_and_split(None, scenario)
    else:
        outcome = allocate(algorithm_partition, scenario)
    algo = outcome.total_profit
    gap = (best_gamma - algo) / best_gamma if best_gamma > TOL else 0.0
    return OracleReport(
        best_partition=best,
        best_total_profit=best_gamma,
        algorithm_total_profit=algo,
        optimality_gap=max(gap, 0.0),
        stability_certified=certify_stability(algorithm_partition, scenario),
        partitions_evaluated=count,
    )


def exhaustive_best_assignment(partition: Partition, scenario: ScenarioConfig
                               ) -> tuple[dict[Coalition, int], float]:
    """Best injective coalition-to-cell assignment over positive-profit pairs.

    Pair profits are the standalone ``coalition_profit`` values.
    """
    coalitions = list(partition.coalitions)
    cells = sorted(scenario.cells, key=lambda c: c.id)
    if len(coalitions) > ASSIGNMENT_CAP or len(cells) > ASSIGNMENT_CAP:
        raise ValueError(f"assignment search is capped at {ASSIGNMENT_CAP}x{ASSIGNMENT_CAP}")
    profit = {}
    for s in coalitions:
        for c in cells:
            if feasible(s, c, scenario):
                x = coalition_profit(s, c, scenario)[2]
                if x > 0:
                    profit[(s, c.id)] = x

    best: tuple[dict, float] = ({}, 0.0)

    def search(k, used, chosen, total):
        nonlocal best
        if total > best[1] + TOL:
            best = (dict(chosen), total)
        if k == len(coalitions):
            return
        s = coalitions[k]
        search(k + 1, used, chosen, total)
        for c in cells:
            x = profit.get((s, c.id))
            if x is not None and c.id not in used:
                chosen[s] = c.id
                used.add(c.id)
                search(k + 1, used, chosen, total + x)
                used.discard(c.id)
                del chosen[s]

    search(0, set(), {}, 0.0)
    return best


def _restricted_growth(items: list[int]):
    """Set partitions of ``items`` via restricted growth strings."""
    n = len(items)
    if n == 0:
        yield []
        return
    a = [0] * n

    def rec(i, top):
        if i == n:
            blocks = [[] for _ in range(top + 1)]
            for item, b in zip(items, a):
                blocks[b].append(item)
            yield blocks
            return
        for b in range(top + 2):
            a[i] = b
            yield from rec(i + 1, max(top, b))

    a[0] = 0
    yield from rec(1, 0)


def certify_stability(partition: Partition, scenario: ScenarioConfig) -> bool:
    """True iff no pairwise merge and no split of any coalition raises total profit."""
    groups = [list(c.members) for c in partition.coalitions]

    def gamma(gs):
        return allocate(Partition(tuple(Coalition(tuple(g)) for g in gs)), scenario).total_profit

    base = gamma(groups)
    for i, j in combinations(range(len(groups)), 2):
        rest = [g for k, g in enumerate(groups) if k not in (i, j)]
        if gamma(rest + [groups[i] + groups[j]]) > base + TOL:
            return False
    for i, g in enumerate(groups):
        rest = groups[:i] + groups[i + 1:]
        for blocks in _restricted_growth(g):
            if len(blocks) > 1 and gamma(rest + blocks) > base + TOL:
                return False
    return True


def expected_partition_count(scenario: ScenarioConfig) -> int:
    return bell_number(len(scenario.uav_ids))
