"""Auction-driven coalition formation of UAVs serving federated-learning cells."""
from .auction import AuctionOutcome, allocate, coalition_profit, feasible, valuation
from .coalition import Coalition, Partition, bell_number, enumerate_partitions, merge_and_split
from .scenario import PaymentRule, ScenarioConfig, load_scenario, paper_baseline

__all__ = [
    "AuctionOutcome", "Coalition", "Partition", "PaymentRule", "ScenarioConfig",
    "allocate", "bell_number", "coalition_profit", "enumerate_partitions", "feasible",
    "load_scenario", "merge_and_split", "paper_baseline", "valuation",
]
__version__ = "0.1.0"
