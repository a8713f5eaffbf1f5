"""Central configuration and defaults for the project."""
from dataclasses import dataclass


@dataclass(frozen=True)
class Config:
    max_terms: int = 100_000  # term explosion guard for products
    max_basis: int = 5000
    float_tolerance: float = 1e-9
    beta_depth: int = 2  # default window B
    degree_factor: int = 2  # default window N = degree_factor * D
    witness_grid: int = 10  # kernel witnesses: {0..witness_grid-1}^n first
    witness_samples: int = 1000
    seed: int = 0
    continuity_steps: int = 16
    workers: int = 1


DEFAULT = Config()
