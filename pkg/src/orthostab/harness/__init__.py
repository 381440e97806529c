from .config import ConfigError, ScenarioConfig, default_config, from_dict, load, resolve_seed
from .presets import PRESET_NAMES, PRESETS, get_preset
from .runner import RunReport, run_axioms, run_scenario

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "default_config",
    "from_dict",
    "load",
    "resolve_seed",
    "PRESET_NAMES",
    "PRESETS",
    "get_preset",
    "RunReport",
    "run_axioms",
    "run_scenario",
]
