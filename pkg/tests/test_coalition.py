import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_scenario
from reference_values import BELL
from uavcoal.auction import allocate, coalition_capacity
from uavcoal.coalition import (Coalition, Partition, bell_number, enumerate_partitions,
                               is_merge_split_stable, merge_and_split, parse_coalition,
                               parse_partition, proper_splits, schedule_iterations)
from uavcoal.oracle import certify_stability
from uavcoal.radio_energy import service_profile
from uavcoal.scenario import CellSpec, GameParams, RadioEnv, ScenarioConfig, Uav

SILENT = RadioEnv(global_model_size_mb=0, cell_aggregate_size_mb=0, worker_update_size_mb=0)


def flat_scenario(*uavs, mu=20):
    """One cell at the origin; no flight energy, 10 J per iteration."""
    cell = CellSpec(1, (0.0, 0.0), 3.0, 20.0, worker_count=0)
    return ScenarioConfig((1000.0, 1000.0), (cell,), tuple(uavs), SILENT,
                          GameParams(required_iterations=mu))


def drone(uid, x, energy, **kw):
    kw.setdefault("cooperation_cost", 0.0)
    return Uav(uid, (x, 0.0), energy, flight_power=0.0, cpu_coefficient=0.0, **kw)


def test_coalition_canonical():
    assert Coalition((3, 1)) == Coalition.of(1, 3)
    assert str(Coalition.of(3, 1)) == "{1,3}"
    with pytest.raises(ValueError):
        Coalition(())
    with pytest.raises(ValueError):
        Coalition((1, 1))


def test_partition_invariants():
    p = Partition.from_lists([[3, 1], [2]])
    assert str(p) == "{{1,3},{2}}"
    assert p.covers([1, 2, 3])
    with pytest.raises(ValueError):
        Partition.from_lists([[1, 2], [2]])


@pytest.mark.parametrize("text", ["{{1,3},{2},{4},{5},{6}}", "{{1}}", "{{1,2,3}}"])
def test_partition_parse_round_trip(text):
    assert str(parse_partition(text)) == text


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        parse_partition("{{1,3},x}")
    with pytest.raises(ValueError):
        parse_coalition("1,3")


def test_bell_numbers():
    assert [bell_number(n) for n in range(len(BELL))] == BELL
    assert bell_number(25) == 4638590332229999353
    with pytest.raises(OverflowError):
        bell_number(26)
    with pytest.raises(ValueError):
        bell_number(-1)


def test_enumeration_small_cases():
    assert [str(p) for p in enumerate_partitions([1])] == ["{{1}}"]
    assert [str(p) for p in enumerate_partitions([1, 2])] == ["{{1},{2}}", "{{1,2}}"]


@pytest.mark.parametrize("n", range(0, 9))
def test_enumeration_count_matches_bell(n):
    parts = list(enumerate_partitions(range(1, n + 1)))
    assert len(parts) == bell_number(n)
    assert len(set(parts)) == len(parts)
    assert all(p.covers(range(1, n + 1)) for p in parts)


def test_enumeration_cap():
    with pytest.raises(ValueError, match="cap"):
        next(enumerate_partitions(range(11)))
    assert next(enumerate_partitions(range(1, 7))) == Partition.singletons(range(1, 7))


def test_proper_splits_of_three():
    splits = list(proper_splits(Coalition.of(1, 2, 3)))
    assert len(splits) == bell_number(3) - 1


def test_schedule_singleton_stops_at_mu():
    scn = flat_scenario(drone(1, 10, 250))
    sched = schedule_iterations(Coalition.of(1), scn.cells[0], scn)
    assert sched.assignments == ((1, 20),)


def test_schedule_takeover():
    scn = flat_scenario(drone(1, 10, 120), drone(2, 50, 300))
    sched = schedule_iterations(Coalition.of(1, 2), scn.cells[0], scn)
    assert sched.assignments == ((1, 12), (2, 8))


def test_schedule_farther_uav_idle():
    scn = flat_scenario(drone(1, 10, 250), drone(2, 50, 300))
    sched = schedule_iterations(Coalition.of(1, 2), scn.cells[0], scn)
    assert sched.assignments == ((1, 20),)
    assert sched.iterations_of(2) == 0


def test_schedule_ties_by_id():
    scn = flat_scenario(drone(2, 10, 120), drone(1, 10, 120))
    sched = schedule_iterations(Coalition.of(1, 2), scn.cells[0], scn)
    assert [uid for uid, _ in sched.assignments] == [1, 2]


def test_single_uav_is_fixed_point():
    scn = flat_scenario(drone(1, 10, 250))
    part, _ = merge_and_split(None, scn)
    assert part == Partition.singletons([1])
    assert is_merge_split_stable(part, scn)


def test_large_cooperation_cost_keeps_singletons(baseline):
    costly = baseline.with_uavs(cooperation_cost=50.0)
    part, out = merge_and_split(None, costly)
    assert part == Partition.singletons(costly.uav_ids)
    assert certify_stability(part, costly)
    assert out.total_profit > 0


def test_baseline_final_partition(baseline):
    part, out = merge_and_split(None, baseline)
    assert str(part) == "{{1,3},{2},{4},{5},{6}}"
    assert {str(c): cell for c, cell in out.as_mapping().items()} == {"{1,3}": 1, "{4}": 2, "{6}": 3}
    assert is_merge_split_stable(part, baseline)


def test_grand_coalition_not_stable(baseline):
    assert not is_merge_split_stable(Partition.grand(baseline.uav_ids), baseline)


def test_initial_partition_must_cover(baseline):
    with pytest.raises(ValueError):
        merge_and_split(Partition.singletons([1, 2]), baseline)


def test_trace_starts_with_first_stage(baseline):
    events = []
    merge_and_split(None, baseline, hook=events.append)
    assert events[0].kind == "initial"
    assert {str(c): cell for c, cell in events[0].outcome.as_mapping().items()} == \
        {"{4}": 1, "{3}": 2, "{6}": 3}
    assert [e.kind for e in events[1:]] == ["merge"]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 5))
def test_merge_split_properties(seed, m):
    scn = random_scenario(seed, m)
    events = []
    part, out = merge_and_split(None, scn, hook=events.append)
    gammas = [e.gamma_after for e in events]
    assert all(b > a for a, b in zip(gammas, gammas[1:]))
    assert len(events) - 1 <= bell_number(m)
    assert part.covers(scn.uav_ids)
    assert out.total_profit == pytest.approx(allocate(part, scn).total_profit)
    assert is_merge_split_stable(part, scn)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4), st.integers(1, 80))
def test_schedule_conserves_iterations(seed, m, mu):
    scn = random_scenario(seed, m).with_game(required_iterations=mu)
    coalition = Coalition(tuple(scn.uav_ids))
    for cell in scn.cells:
        sched = schedule_iterations(coalition, cell, scn)
        assert sched.total == min(mu, coalition_capacity(coalition, cell, scn))
        for uid, n in sched.assignments:
            prof = service_profile(scn.uav(uid), cell, scn.radio, cell.worker_count)
            cap = prof.capacity_in_coalition if m > 1 else prof.capacity_alone
            assert 0 < n <= cap
        times = [service_profile(scn.uav(u), cell, scn.radio, cell.worker_count).travel_time
                 for u, _ in sched.assignments]
        assert times == sorted(times)
