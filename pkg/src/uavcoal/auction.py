"""Cell valuations, sealed bids, payments, coalition costs and profits, and
the greedy allocation of coalitions to cells."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .coalition import Coalition, IterationSchedule, Partition, schedule_iterations
from .radio_energy import service_profile
from .scenario import CellSpec, PaymentRule, ScenarioConfig, cell_importance, served_worker_count


class InfeasiblePairError(ValueError):
    """The coalition cannot complete the required iterations for the cell."""


@dataclass(frozen=True)
class Bid:
    cell_id: int
    coalition: Coalition
    value: float


@dataclass(frozen=True)
class AllocatedPair:
    coalition: Coalition
    cell_id: int
    schedule: IterationSchedule
    bid: float
    valuation: float
    payment: float
    cost: float

    @property
    def profit(self) -> float:
        return self.payment - self.cost


@dataclass
class AuctionOutcome:
    allocation: list[AllocatedPair]
    unallocated_coalitions: list[Coalition]
    unserved_cells: list[int]
    rounds: int = 0
    payments: dict[Coalition, float] = field(init=False)
    coalition_costs: dict[Coalition, float] = field(init=False)
    coalition_profits: dict[Coalition, float] = field(init=False)
    total_profit: float = field(init=False)

    def __post_init__(self):
        self.payments = {p.coalition: p.payment for p in self.allocation}
        self.coalition_costs = {p.coalition: p.cost for p in self.allocation}
        self.coalition_profits = {p.coalition: p.profit for p in self.allocation}
        self.total_profit = sum((p.profit for p in self.allocation), 0.0)

    def cell_of(self, coalition: Coalition) -> int | None:
        for p in self.allocation:
            if p.coalition == coalition:
                return p.cell_id
        return None

    def pair_for_cell(self, cell_id: int) -> AllocatedPair | None:
        for p in self.allocation:
            if p.cell_id == cell_id:
                return p
        return None

    def as_mapping(self) -> dict[Coalition, int]:
        return {p.coalition: p.cell_id for p in self.allocation}

    def __str__(self):
        return ";".join(f"{p.coalition}->{p.cell_id}" for p in self.allocation)


def format_allocation(mapping: Mapping[Coalition, int]) -> str:
    return ";".join(f"{c}->{cell}" for c, cell in sorted(mapping.items()))


def parse_allocation(text: str) -> dict[Coalition, int]:
    from .coalition import parse_coalition

    out = {}
    for item in filter(None, (s.strip() for s in text.split(";"))):
        coal, _, cell = item.partition("->")
        out[parse_coalition(coal)] = int(cell)
    return out


# --- valuations and feasibility -------------------------------------------


def max_travel_time(coalition: Coalition, cell: CellSpec, scenario: ScenarioConfig) -> float:
    workers = served_worker_count(cell, scenario.game.importance_threshold)
    t = max(service_profile(scenario.uav(m), cell, scenario.radio, workers).travel_time
            for m in coalition)
    return max(t, scenario.game.min_travel_time)


def valuation(cell: CellSpec, coalition: Coalition, scenario: ScenarioConfig) -> float:
    """Importance term plus a latency term driven by the farthest member."""
    g = scenario.game
    importance = cell_importance(cell, g.importance_threshold)
    return (g.weight_importance * cell.price_per_importance * importance
            + g.weight_latency * g.latency_scale / max_travel_time(coalition, cell, scenario))


def coalition_capacity(coalition: Coalition, cell: CellSpec, scenario: ScenarioConfig) -> int:
    workers = served_worker_count(cell, scenario.game.importance_threshold)
    multi = len(coalition) >= 2
    total = 0
    for m in coalition:
        prof = service_profile(scenario.uav(m), cell, scenario.radio, workers)
        total += prof.capacity_in_coalition if multi else prof.capacity_alone
    return total


def feasible(coalition: Coalition, cell: CellSpec, scenario: ScenarioConfig) -> bool:
    return coalition_capacity(coalition, cell, scenario) >= scenario.game.required_iterations


def collect_bids(partition: Partition, scenario: ScenarioConfig) -> list[Bid]:
    """Truthful bids from every cell to every coalition that can serve it."""
    bids = []
    for cell in sorted(scenario.cells, key=lambda c: c.id):
        for coalition in partition.coalitions:
            if feasible(coalition, cell, scenario):
                bids.append(Bid(cell.id, coalition, valuation(cell, coalition, scenario)))
    return bids


# --- payments, costs, profits ---------------------------------------------


def payment(bids_for_coalition: list[Bid], winner: int, rule: PaymentRule) -> float:
    """Price the winning cell pays for a coalition.

    Under SecondPrice a lone bidder is charged its own bid.
    """
    if not bids_for_coalition:
        raise ValueError("no bids for this coalition")
    own = [b.value for b in bids_for_coalition if b.cell_id == winner]
    if not own:
        raise ValueError(f"cell {winner} did not bid for this coalition")
    if PaymentRule(rule) is PaymentRule.BID_PRICE:
        return own[0]
    others = [b.value for b in bids_for_coalition if b.cell_id != winner]
    return max(others) if others else own[0]


def coalition_cost(coalition: Coalition, cell: CellSpec, schedule: IterationSchedule,
                   scenario: ScenarioConfig) -> float:
    """Energy cost of the flights and scheduled iterations plus cooperation cost.

    Every member pays its round trip and, in multi-UAV coalitions, its
    cooperation cost, whether or not it ends up running any iteration.
    """
    workers = served_worker_count(cell, scenario.game.importance_threshold)
    multi = len(coalition) >= 2
    cost = 0.0
    for m in coalition:
        uav = scenario.uav(m)
        prof = service_profile(uav, cell, scenario.radio, workers)
        cost += uav.energy_price * prof.round_trip_energy
        if multi:
            cost += uav.cooperation_cost
        cost += uav.energy_price * schedule.iterations_of(m) * prof.per_iteration
    return cost


def coalition_profit(coalition: Coalition, cell: CellSpec,
                     scenario: ScenarioConfig) -> tuple[float, float, float]:
    """(revenue, cost, profit) of ``coalition`` serving ``cell`` against all cells' bids."""
    if not feasible(coalition, cell, scenario):
        raise InfeasiblePairError(f"coalition {coalition} cannot serve cell {cell.id}")
    bids = [Bid(c.id, coalition, valuation(c, coalition, scenario))
            for c in scenario.cells if feasible(coalition, c, scenario)]
    revenue = payment(bids, cell.id, scenario.game.payment_rule)
    cost = coalition_cost(coalition, cell, schedule_iterations(coalition, cell, scenario), scenario)
    return revenue, cost, revenue - cost


def cell_revenue_rate(cell: CellSpec, completion_time: float, threshold: float = 1.0) -> float:
    """What the model owner pays the cell per second of task time (informational)."""
    if not completion_time > 0:
        raise ValueError("completion_time must be > 0")
    return cell.price_per_importance * cell_importance(cell, threshold) / completion_time


def cell_utility(cell: CellSpec | int, coalition: Coalition, outcome: AuctionOutcome) -> float:
    cell_id = cell if isinstance(cell, int) else cell.id
    pair = outcome.pair_for_cell(cell_id)
    if pair is None or pair.coalition != coalition:
        return 0.0
    return pair.valuation - pair.payment


# --- allocation ------------------------------------------------------------


@dataclass
class _Offer:
    cell_id: int
    payment: float
    cost: float

    @property
    def profit(self):
        return self.payment - self.cost


def allocate(partition: Partition, scenario: ScenarioConfig,
             bids: Mapping[tuple[int, Coalition], float] | None = None) -> AuctionOutcome:
    """Greedy profit-driven allocation of coalitions to cells.

    Each round every unallocated coalition targets the unserved cell where
    its profit is highest and positive. A cell targeted by several
    coalitions takes the one it gains most from (bid minus price; under
    BidPrice that is simply its highest bid, ties to the smaller
    coalition). Rounds repeat until nothing profitable is left.

    Under SecondPrice a coalition is sold only to its highest bidder at the
    highest competing bid, both taken over the full set of cells; a
    coalition with a single bidder has no competing price and is not sold.

    ``bids`` overrides reported bid values for (cell id, coalition) pairs;
    valuations used for the cells' utilities stay truthful.
    """
    rule = PaymentRule(scenario.game.payment_rule)
    cells = {c.id: c for c in scenario.cells}
    coalitions = list(partition.coalitions)

    truth: dict[tuple[int, Coalition], float] = {}
    reported: dict[tuple[int, Coalition], float] = {}
    for cid in sorted(cells):
        for s in coalitions:
            if feasible(s, cells[cid], scenario):
                truth[(cid, s)] = valuation(cells[cid], s, scenario)
                reported[(cid, s)] = truth[(cid, s)]
    if bids:
        for key, value in bids.items():
            if key in reported:
                reported[key] = value

    schedules: dict[tuple[int, Coalition], IterationSchedule] = {}
    costs: dict[tuple[int, Coalition], float] = {}

    def cost_of(cid, s):
        key = (cid, s)
        if key not in costs:
            schedules[key] = schedule_iterations(s, cells[cid], scenario)
            costs[key] = coalition_cost(s, cells[cid], schedules[key], scenario)
        return costs[key]

    # SecondPrice: sole eligible cell and its price for each coalition
    top: dict[Coalition, tuple[int, float]] = {}
    if rule is PaymentRule.SECOND_PRICE:
        for s in coalitions:
            offers = sorted(((v, -cid) for (cid, c), v in reported.items() if c == s), reverse=True)
            if len(offers) >= 2:
                top[s] = (-offers[0][1], offers[1][0])

    def offers_for(s, open_cells):
        if rule is PaymentRule.BID_PRICE:
            for cid in open_cells:
                if (cid, s) in reported:
                    yield _Offer(cid, reported[(cid, s)], cost_of(cid, s))
        elif s in top and top[s][0] in open_cells:
            cid, price = top[s]
            yield _Offer(cid, price, cost_of(cid, s))

    open_cells = sorted(cells)
    waiting = list(coalitions)
    allocation: list[AllocatedPair] = []
    rounds = 0
    while open_cells and waiting:
        targets: dict[int, list[tuple[Coalition, _Offer]]] = {}
        for s in waiting:
            best = None
            for offer in offers_for(s, open_cells):
                if offer.profit > 0 and (best is None or offer.profit > best.profit):
                    best = offer
            if best is not None:
                targets.setdefault(best.cell_id, []).append((s, best))
        if not targets:
            break
        rounds += 1
        for cid in sorted(targets):
            winner, offer = None, None
            for s, o in targets[cid]:  # waiting keeps canonical order, so ties go to the smaller coalition
                key = (reported[(cid, s)] - o.payment, reported[(cid, s)])
                if winner is None or key > best_key:
                    winner, offer, best_key = s, o, key
            allocation.append(AllocatedPair(
                coalition=winner, cell_id=cid, schedule=schedules[(cid, winner)],
                bid=reported[(cid, winner)], valuation=truth[(cid, winner)],
                payment=offer.payment, cost=offer.cost))
            waiting.remove(winner)
            open_cells.remove(cid)

    return AuctionOutcome(allocation=allocation, unallocated_coalitions=waiting,
                          unserved_cells=open_cells, rounds=rounds)
