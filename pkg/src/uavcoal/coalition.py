"""UAV coalitions and partitions, Bell counting, nearest-first iteration
scheduling and the merge-and-split search."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Iterator

from .radio_energy import service_profile
from .scenario import CellSpec, ScenarioConfig, served_worker_count

ENUMERATION_CAP = 10
# strict-improvement guard for profit comparisons
GAMMA_TOL = 1e-9


@dataclass(frozen=True, order=True)
class Coalition:
    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(sorted(self.members))
        if not members:
            raise ValueError("a coalition needs at least one UAV")
        if len(set(members)) != len(members):
            raise ValueError(f"duplicate UAV ids in coalition {members}")
        object.__setattr__(self, "members", members)

    @classmethod
    def of(cls, *ids: int) -> Coalition:
        return cls(tuple(ids))

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, uav_id):
        return uav_id in self.members

    def __or__(self, other: Coalition) -> Coalition:
        return Coalition(self.members + other.members)

    def __str__(self):
        return "{" + ",".join(map(str, self.members)) + "}"


@dataclass(frozen=True)
class Partition:
    coalitions: tuple[Coalition, ...]

    def __post_init__(self):
        cs = tuple(sorted(self.coalitions))
        seen: set[int] = set()
        for c in cs:
            if seen & set(c.members):
                raise ValueError(f"coalitions overlap in {cs}")
            seen.update(c.members)
        object.__setattr__(self, "coalitions", cs)

    @classmethod
    def from_lists(cls, groups: Iterable[Iterable[int]]) -> Partition:
        return cls(tuple(Coalition(tuple(g)) for g in groups))

    @classmethod
    def singletons(cls, ids: Iterable[int]) -> Partition:
        return cls(tuple(Coalition((i,)) for i in ids))

    @classmethod
    def grand(cls, ids: Iterable[int]) -> Partition:
        return cls((Coalition(tuple(ids)),))

    @property
    def uav_ids(self) -> tuple[int, ...]:
        return tuple(sorted(i for c in self.coalitions for i in c))

    def covers(self, ids: Iterable[int]) -> bool:
        return self.uav_ids == tuple(sorted(ids))

    def merged(self, a: Coalition, b: Coalition) -> Partition:
        rest = tuple(c for c in self.coalitions if c != a and c != b)
        return Partition(rest + (a | b,))

    def split(self, target: Coalition, parts: Iterable[Coalition]) -> Partition:
        rest = tuple(c for c in self.coalitions if c != target)
        return Partition(rest + tuple(parts))

    def __iter__(self):
        return iter(self.coalitions)

    def __len__(self):
        return len(self.coalitions)

    def __str__(self):
        return "{" + ",".join(str(c) for c in self.coalitions) + "}"


_COALITION_RE = re.compile(r"\{([0-9,\s]*)\}")


def parse_coalition(text: str) -> Coalition:
    m = _COALITION_RE.fullmatch(text.strip())
    if not m:
        raise ValueError(f"not a coalition: {text!r}")
    return Coalition(tuple(int(x) for x in m.group(1).split(",") if x.strip()))


def parse_partition(text: str) -> Partition:
    """Inverse of ``str(Partition)``, e.g. ``"{{1,3},{2}}"``."""
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise ValueError(f"not a partition: {text!r}")
    inner = text[1:-1]
    groups = _COALITION_RE.findall(inner)
    if _COALITION_RE.sub("", inner).replace(",", "").strip():
        raise ValueError(f"not a partition: {text!r}")
    return Partition(tuple(parse_coalition("{" + g + "}") for g in groups))


# --- counting and enumeration ---------------------------------------------

_INT64_MAX = 2**63 - 1


def bell_number(u: int) -> int:
    """Number of set partitions of ``u`` players via the binomial recurrence."""
    if u < 0:
        raise ValueError("u must be >= 0")
    bell = [1]
    for n in range(1, u + 1):
        bell.append(sum(math.comb(n - 1, j) * bell[j] for j in range(n)))
        if bell[-1] > _INT64_MAX:
            raise OverflowError(f"Bell number D_{n} exceeds the 64-bit range")
    return bell[u]


def _set_partitions(items: tuple[int, ...]) -> Iterator[list[list[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for sub in _set_partitions(rest):
        yield [[first]] + sub
        for k in range(len(sub)):
            yield sub[:k] + [[first] + sub[k]] + sub[k + 1:]


def enumerate_partitions(uav_ids: Iterable[int], cap: int = ENUMERATION_CAP) -> Iterator[Partition]:
    """Every partition of ``uav_ids`` exactly once, all-singletons first."""
    ids = tuple(sorted(set(uav_ids)))
    if len(ids) > cap:
        raise ValueError(f"{len(ids)} UAVs exceeds the enumeration cap of {cap}")
    for groups in _set_partitions(ids):
        yield Partition.from_lists(groups)


def proper_splits(coalition: Coalition) -> Iterator[tuple[Coalition, ...]]:
    """Ways to split a coalition into two or more parts."""
    for p in enumerate_partitions(coalition.members, cap=max(ENUMERATION_CAP, len(coalition))):
        if len(p) > 1:
            yield p.coalitions


# --- scheduling ------------------------------------------------------------


@dataclass(frozen=True)
class IterationSchedule:
    cell_id: int
    assignments: tuple[tuple[int, int], ...]

    @property
    def total(self) -> int:
        return sum(n for _, n in self.assignments)

    def iterations_of(self, uav_id: int) -> int:
        return dict(self.assignments).get(uav_id, 0)


def schedule_iterations(coalition: Coalition, cell: CellSpec,
                        scenario: ScenarioConfig) -> IterationSchedule:
    """Nearest UAV first; each takes what it can of the remaining iterations."""
    env = scenario.radio
    workers = served_worker_count(cell, scenario.game.importance_threshold)
    multi = len(coalition) >= 2
    order = []
    for uid in coalition:
        prof = service_profile(scenario.uav(uid), cell, env, workers)
        cap = prof.capacity_in_coalition if multi else prof.capacity_alone
        order.append((prof.travel_time, uid, cap))
    order.sort()
    remaining = scenario.game.required_iterations
    assignments = []
    for _, uid, cap in order:
        if remaining <= 0:
            break
        take = min(cap, remaining)
        if take > 0:
            assignments.append((uid, take))
            remaining -= take
    return IterationSchedule(cell.id, tuple(assignments))


# --- merge and split -------------------------------------------------------


@dataclass(frozen=True)
class MoveEvent:
    kind: str  # "initial", "merge" or "split"
    before: Partition
    after: Partition
    gamma_before: float
    gamma_after: float
    outcome: object = field(compare=False, repr=False)

    @property
    def delta(self) -> float:
        return self.gamma_after - self.gamma_before


def _merge_candidates(partition: Partition):
    cs = sorted(partition.coalitions, key=lambda c: c.members[0])
    return combinations(cs, 2)


def merge_and_split(initial: Partition | None, scenario: ScenarioConfig,
                    hook: Callable[[MoveEvent], None] | None = None,
                    evaluate: Callable | None = None):
    """Alternate merge and split passes until neither commits a move.

    Candidates are scanned in a fixed order and the first strict increase in
    total profit is committed, after which the pass restarts on the new
    partition. Returns ``(final_partition, outcome)``.
    """
    if evaluate is None:
        from .auction import allocate as evaluate
    current = initial if initial is not None else Partition.singletons(scenario.uav_ids)
    if not current.covers(scenario.uav_ids):
        raise ValueError(f"partition {current} does not cover UAVs {scenario.uav_ids}")
    outcome = evaluate(current, scenario)
    if hook:
        hook(MoveEvent("initial", current, current, 0.0, outcome.total_profit, outcome))

    def commit(kind, candidate, cand_outcome):
        nonlocal current, outcome
        if hook:
            hook(MoveEvent(kind, current, candidate, outcome.total_profit,
                           cand_outcome.total_profit, cand_outcome))
        current, outcome = candidate, cand_outcome

    while True:
        changed = False
        # merge phase
        improved = True
        while improved:
            improved = False
            for a, b in _merge_candidates(current):
                candidate = current.merged(a, b)
                res = evaluate(candidate, scenario)
                if res.total_profit > outcome.total_profit + GAMMA_TOL:
                    commit("merge", candidate, res)
                    improved = changed = True
                    break
        # split phase
        improved = True
        while improved:
            improved = False
            for c in current.coalitions:
                if len(c) < 2:
                    continue
                for parts in proper_splits(c):
                    candidate = current.split(c, parts)
                    res = evaluate(candidate, scenario)
                    if res.total_profit > outcome.total_profit + GAMMA_TOL:
                        commit("split", candidate, res)
                        improved = changed = True
                        break
                if improved:
                    break
        if not changed:
            return current, outcome


def is_merge_split_stable(partition: Partition, scenario: ScenarioConfig,
                          evaluate: Callable | None = None) -> bool:
    if evaluate is None:
        from .auction import allocate as evaluate
    gamma = evaluate(partition, scenario).total_profit
    for a, b in _merge_candidates(partition):
        if evaluate(partition.merged(a, b), scenario).total_profit > gamma + GAMMA_TOL:
            return False
    for c in partition.coalitions:
        for parts in proper_splits(c) if len(c) > 1 else ():
            if evaluate(partition.split(c, parts), scenario).total_profit > gamma + GAMMA_TOL:
                return False
    return True
