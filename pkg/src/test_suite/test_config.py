"""
Tests for configuration loading and validation.
"""

import json

import pytest
from pydantic import ValidationError

from config.config import get_config, load_config, reset_config
from config.config_template import ModelConfig, SimulationConfig
from src.utility_modules.enums import OutcomeMode
from src.utility_modules.error_handling import InvalidParameter, SubartErrorHandler

class TestModelConfig:
    """Test cases for ModelConfig."""

    def test_defaults(self):
        """Test the documented defaults."""
        config = ModelConfig()
        assert config.n_trees == 100
        assert config.kappa == 2.0
        assert config.alpha == 0.95
        assert config.beta == 2.0
        assert config.nu == 2.0
        assert config.alpha_sigma == 0.95
        assert config.q_z == 3.0
        assert config.iterations() == (5000, 1000)

    def test_probit_iteration_defaults(self):
        """Test that probit fits default to longer runs."""
        assert ModelConfig(mode=OutcomeMode.PROBIT).iterations() == (10000, 2000)

    @pytest.mark.parametrize("field, value", [
        ("n_trees", 0),
        ("kappa", 0.0),
        ("alpha", 1.0),
        ("nu", 0.5),
        ("alpha_sigma", 1.0),
        ("interval_level", 0.0),
    ])
    def test_domain_violations(self, field, value):
        """Test that out-of-domain settings are rejected."""
        with pytest.raises(ValidationError):
            ModelConfig(**{field: value})

    def test_burnin_must_be_shorter_than_run(self):
        """Test that burn-in at least as long as the run is rejected."""
        with pytest.raises(ValidationError):
            ModelConfig(n_mcmc=100, n_burnin=100)

    def test_move_probabilities_must_sum_to_one(self):
        """Test move probability validation."""
        with pytest.raises(ValidationError):
            ModelConfig(move_probs={"grow": 0.5, "prune": 0.5, "change": 0.5})

    def test_resolved_nu_prop(self):
        """Test the n-based proposal degrees of freedom."""
        config = ModelConfig()
        assert config.resolved(n=1000, d=2).nu_prop == pytest.approx(100.0)
        assert config.resolved(n=1000, d=3).nu_prop == pytest.approx(500.0)
        # Small n falls back to d + 1
        assert config.resolved(n=10, d=2).nu_prop == pytest.approx(3.0)

    def test_resolved_rejects_small_nu_prop(self):
        """Test that nu_prop must exceed d - 1."""
        with pytest.raises(InvalidParameter):
            ModelConfig(nu_prop=1.0).resolved(n=100, d=3)

class TestSimulationConfig:
    """Test cases for SimulationConfig."""

    def test_rho_domain(self):
        """Test that |rho| must be below 1."""
        with pytest.raises(ValidationError):
            SimulationConfig(rho=1.0)

    def test_replicates_positive(self):
        """Test that at least one replicate is required."""
        with pytest.raises(ValidationError):
            SimulationConfig(replicates=0)

class TestLoadConfig:
    """Test cases for load_config."""

    def test_json_file_and_overrides(self, tmp_path):
        """Test that overrides take precedence over the JSON file."""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"model": {"n_trees": 50, "kappa": 3.0}}))
        config = load_config(path, overrides={"model": {"n_trees": 20, "seed": None}})
        assert config.model.n_trees == 20
        assert config.model.kappa == 3.0
        assert config.model.seed is None

    def test_environment_values(self, monkeypatch):
        """Test SUBART_* environment variables."""
        monkeypatch.setenv("SUBART_N_TREES", "42")
        monkeypatch.setenv("SUBART_DB_URL", "sqlite:///:memory:")
        config = load_config()
        assert config.model.n_trees == 42
        assert config.database.url == "sqlite:///:memory:"

    def test_unknown_section(self):
        """Test that unknown sections are rejected."""
        with pytest.raises(ValueError):
            load_config(overrides={"plotting": {"dpi": 100}})

    def test_top_level_must_be_object(self, tmp_path):
        """Test that a JSON file holding a list is rejected."""
        path = tmp_path / "config.json"
        path.write_text(json.dumps([{"model": {}}]))
        with pytest.raises(ValueError, match="must be an object"):
            load_config(path)

    @pytest.mark.parametrize("section", [None, [1, 2], "fast"])
    def test_section_must_be_object(self, tmp_path, section):
        """Test that a JSON section that is not an object is rejected."""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"model": section}))
        with pytest.raises(ValueError, match="must be an object"):
            load_config(path)

    def test_section_error_exit_code(self, tmp_path):
        """Test that a malformed section maps to the validation exit status."""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"cea": [0.5]}))
        with pytest.raises(ValueError) as excinfo:
            load_config(path)
        assert SubartErrorHandler.exit_code(excinfo.value) == 2

class TestGlobalConfig:
    """Test cases for the cached global configuration."""

    def test_cached(self):
        """Test that get_config returns the same object until reset."""
        assert get_config() is get_config()

    def test_reset_picks_up_environment(self, monkeypatch):
        """Test that a changed environment variable is seen after reset_config."""
        monkeypatch.setenv("SUBART_N_TREES", "17")
        assert get_config().model.n_trees == 17
        monkeypatch.setenv("SUBART_N_TREES", "23")
        assert get_config().model.n_trees == 17
        reset_config()
        assert get_config().model.n_trees == 23
