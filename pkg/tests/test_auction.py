import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import reference_values as ref
from helpers import random_scenario
from uavcoal.auction import (AllocatedPair, AuctionOutcome, Bid, InfeasiblePairError, allocate,
                             cell_revenue_rate, cell_utility, coalition_capacity, coalition_cost,
                             coalition_profit, collect_bids, feasible, format_allocation,
                             parse_allocation, payment, valuation)
from uavcoal.coalition import (Coalition, IterationSchedule, Partition, enumerate_partitions,
                               schedule_iterations)
from uavcoal.radio_energy import flying_energy
from uavcoal.scenario import CellSpec, GameParams, PaymentRule, RadioEnv, ScenarioConfig, Uav

SILENT = RadioEnv(global_model_size_mb=0, cell_aggregate_size_mb=0, worker_update_size_mb=0)
BP, SP = PaymentRule.BID_PRICE, PaymentRule.SECOND_PRICE
C = Coalition.of


def silent_uav(uid, depot, energy=1000.0, **kw):
    return Uav(uid, depot, energy, cpu_coefficient=0.0, **kw)


def scenario(cells, uavs, rule=BP, mu=20):
    return ScenarioConfig((1000.0, 1000.0), tuple(cells), tuple(uavs), SILENT,
                          GameParams(required_iterations=mu, payment_rule=rule))


# --- valuation --------------------------------------------------------------


@pytest.mark.parametrize("uav, cell", [(3, 1), (6, 3)])
def test_valuation_matches_paper(baseline, uav, cell):
    v = valuation(baseline.cell(cell), C(uav), baseline)
    assert v == pytest.approx(ref.PAPER_PREFERENCES[(uav, cell)], abs=0.25)
    assert v == pytest.approx(ref.VALUATIONS[(uav, cell)], rel=1e-12)


def test_valuation_uses_farthest_member(baseline):
    cell = baseline.cell(1)
    assert valuation(cell, C(1, 3), baseline) == valuation(cell, C(3), baseline)


def test_valuation_at_cell_uses_minimum_time():
    cell = CellSpec(1, (100.0, 100.0), 3.0, 10.0)
    scn = scenario([cell], [silent_uav(1, (100.0, 100.0))])
    assert valuation(cell, C(1), scn) == pytest.approx(15.0 + 0.5 * 1000 / 1e-6)


# --- feasibility and bids --------------------------------------------------


def test_feasibility(baseline):
    for cell in baseline.cells:
        assert not feasible(C(1), cell, baseline)
        assert not feasible(C(2), cell, baseline)
    broke = scenario([CellSpec(1, (0.0, 0.0), 3.0, 10.0)], [silent_uav(1, (0.0, 0.0), energy=5.0)])
    assert coalition_capacity(C(1), broke.cells[0], broke) == 0
    assert not feasible(C(1), broke.cells[0], broke.with_game(required_iterations=1))


def test_feasibility_boundary_inclusive(baseline):
    cell = baseline.cell(2)
    cap = coalition_capacity(C(6), cell, baseline)
    assert feasible(C(6), cell, baseline.with_game(required_iterations=cap))
    assert not feasible(C(6), cell, baseline.with_game(required_iterations=cap + 1))


def test_collect_bids_baseline(baseline):
    bids = collect_bids(Partition.singletons(baseline.uav_ids), baseline)
    assert len(bids) == 12
    assert [(b.cell_id, b.coalition) for b in bids] == sorted((b.cell_id, b.coalition) for b in bids)
    for b in bids:
        assert b.value == valuation(baseline.cell(b.cell_id), b.coalition, baseline)
        assert b.value >= 0


def test_collect_bids_none_feasible(baseline):
    assert collect_bids(Partition.singletons(baseline.uav_ids),
                        baseline.with_game(required_iterations=10_000)) == []


# --- payments --------------------------------------------------------------


def bids_of(**values):
    names = {"A": 1, "B": 2, "C": 3}
    return [Bid(names[k], C(1), v) for k, v in values.items()]


def test_payment_rules():
    assert payment(bids_of(A=10, B=7, C=3), 1, SP) == 7
    assert payment(bids_of(A=10), 1, SP) == 10
    assert payment(bids_of(A=10, B=7), 1, BP) == 10
    with pytest.raises(ValueError):
        payment([], 1, SP)
    with pytest.raises(ValueError):
        payment(bids_of(B=7), 1, SP)


# --- cost and profit -------------------------------------------------------


def test_cost_zero_case():
    cell = CellSpec(1, (0.0, 0.0), 3.0, 10.0)
    scn = scenario([cell], [silent_uav(1, (0.0, 0.0))])
    assert coalition_cost(C(1), cell, IterationSchedule(1, ()), scn) == 0.0


def test_cost_worked_example():
    cell = CellSpec(1, (200.0, 300.0), 3.0, 18.4, worker_count=0)
    scn = scenario([cell], [silent_uav(1, (100.0, 600.0), cooperation_cost=0.0)])
    sched = IterationSchedule(1, ((1, 20),))
    assert coalition_cost(C(1), cell, sched, scn) == pytest.approx(ref.COST_EXAMPLE, abs=1e-6)


def test_cost_pair_adds_cooperation(baseline):
    cell = baseline.cell(1)
    sched = schedule_iterations(C(3), cell, baseline)
    alone = coalition_cost(C(3), cell, sched, baseline)
    paired = coalition_cost(C(3, 5), cell, sched, baseline)
    u5 = baseline.uav(5)
    extra = 2 * u5.cooperation_cost + 2 * u5.energy_price * flying_energy(u5, cell, baseline.radio)
    assert paired - alone == pytest.approx(extra)


def test_profit_requires_feasibility(baseline):
    with pytest.raises(InfeasiblePairError):
        coalition_profit(C(1), baseline.cell(1), baseline)


def test_best_coalition_for_cell_one(baseline):
    cell = baseline.cell(1)
    best = coalition_profit(C(1, 3), cell, baseline)[2]
    for other in [C(3), C(2, 3), C(1, 2, 3)]:
        assert coalition_profit(other, cell, baseline)[2] < best


def test_idle_member_lowers_profit(baseline):
    # UAV 3 alone finishes the task at Cell 2; UAV 5 would only fly and cooperate
    cell = baseline.cell(2)
    sched = schedule_iterations(C(3, 5), cell, baseline)
    assert sched.iterations_of(5) == 0
    assert coalition_profit(C(3, 5), cell, baseline)[2] < coalition_profit(C(3), cell, baseline)[2]


def test_revenue_rate():
    cell = CellSpec(1, (0.0, 0.0), 3.0, 18.4)
    assert cell_revenue_rate(cell, 60) == pytest.approx(ref.REVENUE_RATE)
    assert cell_revenue_rate(cell, 120) == pytest.approx(ref.REVENUE_RATE / 2)
    assert cell_revenue_rate(CellSpec(1, (0.0, 0.0), 3.0, 0.0), 60) == 0.0
    with pytest.raises(ValueError):
        cell_revenue_rate(cell, 0)


# --- allocation ------------------------------------------------------------


def test_first_stage_allocation(baseline):
    out = allocate(Partition.singletons(baseline.uav_ids), baseline)
    assert out.as_mapping() == {C(4): 1, C(3): 2, C(6): 3}
    assert sorted(out.unallocated_coalitions) == [C(1), C(2), C(5)]
    assert out.unserved_cells == []


def test_single_pair_allocates_iff_profitable():
    cell = CellSpec(1, (500.0, 500.0), 3.0, 10.0, worker_count=0)
    scn = scenario([cell], [silent_uav(1, (500.0, 400.0))])
    out = allocate(Partition.singletons([1]), scn)
    assert out.as_mapping() == {C(1): 1}
    poor = scenario([CellSpec(1, (500.0, 500.0), 0.0, 0.0, worker_count=0)],
                    [silent_uav(1, (500.0, 0.0), energy_price=0.1)])
    prof = coalition_profit(C(1), poor.cells[0], poor)[2]
    assert prof < 0 and allocate(Partition.singletons([1]), poor).allocation == []


def contested():
    # both UAVs prefer cell 2; cell 2 values the nearer UAV 1 more
    cells = [CellSpec(1, (500.0, 900.0), 3.0, 10.0, worker_count=0),
             CellSpec(2, (500.0, 500.0), 3.0, 30.0, worker_count=0)]
    return scenario(cells, [silent_uav(1, (500.0, 450.0)), silent_uav(2, (500.0, 400.0))])


def test_contested_cell_goes_to_higher_bid():
    scn = contested()
    v = {(c.id, u): valuation(c, C(u), scn) for c in scn.cells for u in (1, 2)}
    assert v[(2, 1)] == pytest.approx(145.0) and v[(2, 2)] == pytest.approx(95.0)
    out = allocate(Partition.singletons([1, 2]), scn)
    assert out.as_mapping() == {C(1): 2, C(2): 1}
    assert out.rounds == 2


def test_cell_utility():
    pair = AllocatedPair(C(1), 1, IterationSchedule(1, ()), bid=10.0, valuation=10.0,
                         payment=7.0, cost=1.0)
    out = AuctionOutcome([pair], [], [2])
    assert cell_utility(1, C(1), out) == 3.0
    assert cell_utility(2, C(1), out) == 0.0


def test_bid_price_utility_zero(baseline):
    out = allocate(Partition.singletons(baseline.uav_ids), baseline)
    for p in out.allocation:
        assert cell_utility(p.cell_id, p.coalition, out) == 0.0


def test_allocation_string_round_trip(baseline):
    out = allocate(Partition.from_lists([[1, 3], [2], [4], [5], [6]]), baseline)
    text = format_allocation(out.as_mapping())
    assert text == "{1,3}->1;{4}->2;{6}->3"
    assert parse_allocation(text) == out.as_mapping()


def test_second_price_lone_bidder_not_sold():
    cell = CellSpec(1, (500.0, 500.0), 3.0, 10.0, worker_count=0)
    scn = scenario([cell], [silent_uav(1, (500.0, 400.0))], rule=SP)
    assert allocate(Partition.singletons([1]), scn).allocation == []


# --- properties ------------------------------------------------------------

seeds = st.integers(0, 100_000)


def random_partition(scn, seed):
    parts = list(enumerate_partitions(scn.uav_ids))
    return parts[np.random.default_rng(seed).integers(len(parts))]


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(1, 5), st.integers(1, 4), st.sampled_from([BP, SP]))
def test_matching_and_rounds(seed, m, n_cells, rule):
    scn = random_scenario(seed, m, n_cells, rule)
    part = random_partition(scn, seed)
    out = allocate(part, scn)
    cells = [p.cell_id for p in out.allocation]
    coals = [p.coalition for p in out.allocation]
    assert len(set(cells)) == len(cells) and len(set(coals)) == len(coals)
    assert out.total_profit == pytest.approx(sum(p.profit for p in out.allocation), abs=1e-9)
    assert all(p.profit > 0 for p in out.allocation)
    assert out.rounds <= min(len(scn.cells), len(part))
    assert set(out.unserved_cells) == set(scn.cell_ids) - set(cells)


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(2, 4), st.sampled_from([BP, SP]), st.floats(0.01, 100))
def test_bid_monotonicity(seed, m, rule, phi):
    scn = random_scenario(seed, m, 3, rule)
    part = random_partition(scn, seed)
    out = allocate(part, scn)
    for p in out.allocation:
        raised = allocate(part, scn, bids={(p.cell_id, p.coalition): p.bid + phi})
        assert raised.cell_of(p.coalition) == p.cell_id


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(2, 4))
def test_second_price_individual_rationality(seed, m):
    scn = random_scenario(seed, m, 3, SP)
    out = allocate(random_partition(scn, seed), scn)
    served = {p.cell_id for p in out.allocation}
    for p in out.allocation:
        assert cell_utility(p.cell_id, p.coalition, out) >= 0
    for cid in set(scn.cell_ids) - served:
        assert all(cell_utility(cid, c, out) == 0 for c in out.payments)


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(2, 4), st.floats(0, 1))
def test_second_price_payment_independence(seed, m, frac):
    scn = random_scenario(seed, m, 3, SP)
    part = random_partition(scn, seed)
    out = allocate(part, scn)
    for p in out.allocation:
        new_bid = p.payment + frac * 2 * (p.bid - p.payment) + 1e-9
        moved = allocate(part, scn, bids={(p.cell_id, p.coalition): new_bid})
        if moved.cell_of(p.coalition) == p.cell_id:
            assert moved.payments[p.coalition] == p.payment
