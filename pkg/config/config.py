"""
Configuration loader for suBART Lab.

This module loads the configuration from built-in defaults, environment
variables (and a .env file), an optional JSON file and explicit overrides,
in that order of increasing precedence.
"""

import json
import os
from typing import Any, Dict, Optional
from pathlib import Path
from dotenv import load_dotenv

from config.config_template import Config, ModelConfig, SimulationConfig, CeaConfig, DatabaseConfig

# Load environment variables from .env file
load_dotenv()

def _env_value(name: str, cast):
    raw = os.getenv(name)
    if raw is None or raw == "":
        return None
    if cast is bool:
        return raw.lower() == "true"
    return cast(raw)

def _environment_overrides() -> Dict[str, Dict[str, Any]]:
    """Collect SUBART_* environment variables into per-section dicts."""
    model_env = {
        "n_trees": _env_value("SUBART_N_TREES", int),
        "kappa": _env_value("SUBART_KAPPA", float),
        "alpha": _env_value("SUBART_ALPHA", float),
        "beta": _env_value("SUBART_BETA", float),
        "nu": _env_value("SUBART_NU", float),
        "alpha_sigma": _env_value("SUBART_ALPHA_SIGMA", float),
        "q_z": _env_value("SUBART_Q_Z", float),
        "n_mcmc": _env_value("SUBART_N_MCMC", int),
        "n_burnin": _env_value("SUBART_N_BURNIN", int),
        "nu_prop": _env_value("SUBART_NU_PROP", float),
        "seed": _env_value("SUBART_SEED", int),
        "n_chains": _env_value("SUBART_N_CHAINS", int),
        "show_progress": _env_value("SUBART_SHOW_PROGRESS", bool),
    }
    simulation_env = {
        "n_jobs": _env_value("SUBART_SIM_N_JOBS", int),
        "replicates": _env_value("SUBART_SIM_REPLICATES", int),
    }
    database_env = {
        "url": _env_value("SUBART_DB_URL", str),
        "echo": _env_value("SUBART_DB_ECHO", bool),
    }
    return {
        "model": {k: v for k, v in model_env.items() if v is not None},
        "simulation": {k: v for k, v in simulation_env.items() if v is not None},
        "cea": {},
        "database": {k: v for k, v in database_env.items() if v is not None},
    }

def _merge(base: Dict[str, Dict[str, Any]], extra: Optional[Dict[str, Any]]) -> Dict[str, Dict[str, Any]]:
    if not extra:
        return base
    if not isinstance(extra, dict):
        raise ValueError("Configuration must be an object of sections")
    merged = {section: dict(values) for section, values in base.items()}
    for section, values in extra.items():
        if section not in merged:
            raise ValueError(f"Unknown configuration section: {section}")
        if not isinstance(values, dict):
            raise ValueError(f"Section {section} must be an object")
        merged[section].update({k: v for k, v in values.items() if v is not None})
    return merged

def load_config(json_path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None) -> Config:
    """
    Load configuration from defaults, environment, a JSON file and overrides.

    Args:
        json_path (Optional[Path]): JSON file with optional "model", "simulation",
            "cea" and "database" sections
        overrides (Optional[Dict[str, Any]]): Section dicts taking precedence over everything else

    Returns:
        Config: Configuration object
    """
    sections = _environment_overrides()

    if json_path is not None:
        with open(json_path, "r", encoding="utf-8") as handle:
            file_values = json.load(handle)
        sections = _merge(sections, file_values)

    sections = _merge(sections, overrides)

    return Config(
        model=ModelConfig(**sections["model"]),
        simulation=SimulationConfig(**sections["simulation"]),
        cea=CeaConfig(**sections["cea"]),
        database=DatabaseConfig(**sections["database"]),
    )

# Global configuration instance
config: Optional[Config] = None

def get_config() -> Config:
    """
    Get the global configuration instance.

    Returns:
        Config: Configuration object
    """
    global config
    if config is None:
        config = load_config()
    return config

def reset_config() -> None:
    """Forget the cached global configuration."""
    global config
    config = None
