"""Multi-cell hybrid mmWave link-level simulator.

Monte-Carlo channel estimation under pilot contamination and ZF downlink
rates, cross-validated against their closed-form predictors.
"""

from .config import ScenarioConfig, ConfigError, dbm_to_watts, watts_to_dbm

__all__ = ["ScenarioConfig", "ConfigError", "dbm_to_watts", "watts_to_dbm"]
__version__ = "0.1.0"
