"""Physical-layer arithmetic: link rates, per-iteration energies, flight
energy and the per-UAV iteration budget.

Every transmitter occupies a single orthogonal resource block, so the
resource-block sums of the uplink rate expressions reduce to one term.
Channel gains are treated as dB ratios.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from functools import lru_cache

from .scenario import CellSpec, RadioEnv, Uav


class InfeasibleLinkError(ValueError):
    """A link has zero capacity but must carry a nonzero payload."""


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def dbm_per_hz_to_w_per_hz(value: float) -> float:
    return 10.0 ** ((value - 30.0) / 10.0)


def distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def travel_time(uav: Uav, cell: CellSpec) -> float:
    return distance(uav.depot, cell.position) / uav.velocity


def flying_energy(uav: Uav, cell: CellSpec, env: RadioEnv) -> float:
    """One-way depot-to-cell flight energy in joules."""
    weight = 0.5 * env.cell_flight_weight + 0.5 * uav.flight_weight_depot
    return weight * uav.flight_power * travel_time(uav, cell)


def compute_energy(uav: Uav) -> float:
    return uav.cpu_coefficient * uav.cpu_cycles_per_aggregation * uav.cpu_frequency**2


def shannon_rate(bandwidth: float, signal_power: float, gain_db: float,
                 interference: float, noise_psd: float) -> float:
    """Achievable rate in bits/s; ``noise_psd`` is in W/Hz."""
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be > 0, got {bandwidth}")
    snr = signal_power * db_to_linear(gain_db) / (interference + bandwidth * noise_psd)
    return bandwidth * math.log2(1.0 + snr)


def _noise(env: RadioEnv) -> float:
    return dbm_per_hz_to_w_per_hz(env.noise_psd_dbm_per_hz)


def uav_uplink_rate(uav: Uav, env: RadioEnv) -> float:
    """UAV -> model owner."""
    return shannon_rate(uav.bandwidth, uav.tx_power, uav.channel_gain_db,
                        env.uplink_interference, _noise(env))


def owner_downlink_rate(uav: Uav, env: RadioEnv) -> float:
    """Model owner -> UAV broadcast."""
    return shannon_rate(env.owner_bandwidth, env.owner_tx_power, uav.channel_gain_db,
                        0.0, _noise(env))


def worker_uplink_rate(env: RadioEnv) -> float:
    """Worker -> UAV, using the scenario's representative worker radio."""
    return shannon_rate(env.worker_bandwidth, env.worker_tx_power,
                        env.worker_channel_gain_db, env.uplink_interference, _noise(env))


def uav_downlink_rate(uav: Uav, env: RadioEnv) -> float:
    """UAV -> worker."""
    return shannon_rate(uav.bandwidth, uav.tx_power, env.worker_channel_gain_db,
                        0.0, _noise(env))


def transmission_time(payload: float, rate: float) -> float:
    if payload == 0:
        return 0.0
    if not rate > 0:
        raise InfeasibleLinkError(f"cannot send {payload} bits over a zero-rate link")
    return payload / rate


def _energy(power: float, payload: float, rate: float, link: str) -> float:
    if payload == 0 or power == 0:
        return 0.0
    if not rate > 0:
        raise InfeasibleLinkError(f"{link}: zero rate with payload {payload} bits")
    return power * payload / rate


@dataclass(frozen=True)
class PerIterationEnergy:
    receive_from_workers: float
    receive_from_owner: float
    transmit_to_owner: float
    transmit_to_workers: float
    compute: float
    hover: float
    circuit: float

    def total(self) -> float:
        return sum(getattr(self, f.name) for f in fields(self))


def per_iteration_energy(uav: Uav, cell: CellSpec, env: RadioEnv,
                         selected_worker_count: int) -> PerIterationEnergy:
    """Energy one UAV spends on a single FL iteration while serving ``cell``.

    Workers in a cell share one radio profile, so the per-worker sums are
    ``selected_worker_count`` times a single term.
    """
    if selected_worker_count < 0:
        raise ValueError("selected_worker_count must be >= 0")
    n = selected_worker_count
    rx_workers = n * _energy(uav.rx_power, env.worker_update_size,
                             worker_uplink_rate(env), "worker uplink") if n else 0.0
    tx_workers = n * _energy(uav.tx_power, env.global_model_size,
                             uav_downlink_rate(uav, env), "UAV downlink to workers") if n else 0.0
    return PerIterationEnergy(
        receive_from_workers=rx_workers,
        receive_from_owner=_energy(uav.rx_power, env.global_model_size,
                                   owner_downlink_rate(uav, env), "owner downlink"),
        transmit_to_owner=_energy(uav.tx_power, env.cell_aggregate_size,
                                  uav_uplink_rate(uav, env), "UAV uplink to owner"),
        transmit_to_workers=tx_workers,
        compute=compute_energy(uav),
        hover=uav.hover_energy_per_iteration,
        circuit=uav.circuit_energy_per_iteration,
    )


def max_iterations(uav: Uav, cell: CellSpec, env: RadioEnv, worker_count: int,
                   in_multi_uav_coalition: bool) -> int:
    """Iterations the UAV can support after the round trip and cooperation cost."""
    coop = uav.cooperation_cost if in_multi_uav_coalition else 0.0
    budget = uav.energy_capacity - 2.0 * flying_energy(uav, cell, env) - coop
    if budget <= 0:
        return 0
    per_iter = per_iteration_energy(uav, cell, env, worker_count).total()
    if per_iter <= 0:
        raise ValueError(f"UAV {uav.id}: per-iteration energy must be positive")
    # tolerance keeps exact ratios such as 100/10 from flooring to 9
    return math.floor(budget / per_iter + 1e-9)


@dataclass(frozen=True)
class ServiceProfile:
    """Cached energy figures for one (UAV, cell) pairing."""

    round_trip_energy: float
    per_iteration: float
    capacity_alone: int
    capacity_in_coalition: int
    travel_time: float
    iteration_time: float


@lru_cache(maxsize=65536)
def service_profile(uav: Uav, cell: CellSpec, env: RadioEnv, worker_count: int) -> ServiceProfile:
    per_iter = per_iteration_energy(uav, cell, env, worker_count).total()
    return ServiceProfile(
        round_trip_energy=2.0 * flying_energy(uav, cell, env),
        per_iteration=per_iter,
        capacity_alone=max_iterations(uav, cell, env, worker_count, False),
        capacity_in_coalition=max_iterations(uav, cell, env, worker_count, True),
        travel_time=travel_time(uav, cell),
        iteration_time=iteration_time(uav, env, worker_count),
    )


def iteration_time(uav: Uav, env: RadioEnv, worker_count: int) -> float:
    """Wall-clock seconds of one iteration with this UAV as relay.

    Workers upload in parallel on orthogonal blocks, the UAV then
    aggregates, uploads, receives the global model and broadcasts it back.
    Informational only.
    """
    t = compute_time(uav)
    t += transmission_time(env.cell_aggregate_size, uav_uplink_rate(uav, env))
    t += transmission_time(env.global_model_size, owner_downlink_rate(uav, env))
    if worker_count:
        t += transmission_time(env.worker_update_size, worker_uplink_rate(env))
        t += worker_count * transmission_time(env.global_model_size, uav_downlink_rate(uav, env))
    return t


def compute_time(uav: Uav) -> float:
    return uav.cpu_cycles_per_aggregation / uav.cpu_frequency if uav.cpu_frequency > 0 else 0.0
