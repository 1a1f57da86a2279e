"""Safe exploration in finite MDPs with Gaussian process safety models."""

from ._core import (
    ConfigError,
    CraterHillTerrain,
    DomainError,
    Error,
    Kernel,
    ParseError,
    crater_hill,
    explore,
    gp_posterior,
    load_esri_ascii,
    reach_oracle,
    run_experiment,
)

__all__ = [
    "ConfigError",
    "CraterHillTerrain",
    "DomainError",
    "Error",
    "Kernel",
    "ParseError",
    "crater_hill",
    "explore",
    "gp_posterior",
    "load_esri_ascii",
    "reach_oracle",
    "run_experiment",
]
