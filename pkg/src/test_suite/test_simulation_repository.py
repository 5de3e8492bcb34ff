"""
Tests for the SimulationRepository class.

This module provides tests for the SimulationRepository class.
"""

import pandas as pd
import pytest

from src.database_management.repositories.simulation_repository import RESULT_COLUMNS
from src.utility_modules.enums import ErrorType, ErrorSeverity
from src.utility_modules.error_handling import ConstantOutcome, NotPositiveDefinite

class TestSimulationRepository:
    """Test cases for SimulationRepository."""

    def test_create_run(self, simulation_repository):
        """Test creating a simulation run."""
        # Create run
        run = simulation_repository.create_run({
            "scenario": "friedman2",
            "base_seed": 11,
            "replicates": 3,
            "variants": ["subart"],
            "config": {"model": {"n_trees": 20}},
        })

        # Verify run was created
        assert run.id is not None
        assert run.scenario == "friedman2"
        assert run.status == "running"
        assert run.base_seed == 11
        assert run.variants == ["subart"]
        assert run.config["model"]["n_trees"] == 20
        assert run.start_time is not None

    def test_get_run(self, simulation_repository, sample_run):
        """Test getting a run by ID."""
        run = simulation_repository.get_run(sample_run.id)

        assert run is not None
        assert run.id == sample_run.id
        assert run.scenario == "friedman1"

    def test_get_run_not_found(self, simulation_repository):
        """Test getting a run by ID that doesn't exist."""
        assert simulation_repository.get_run(999) is None

    def test_list_runs(self, simulation_repository, sample_run):
        """Test listing runs, most recent first."""
        # Create a second run
        second = simulation_repository.create_run({"scenario": "ttcm_like", "replicates": 1})

        runs = simulation_repository.list_runs()

        assert [run.id for run in runs] == [second.id, sample_run.id]
        assert len(simulation_repository.list_runs(limit=1)) == 1

    def test_finish_run(self, simulation_repository, sample_run):
        """Test marking a run as completed."""
        run = simulation_repository.finish_run(sample_run.id, completed=3, failed=1)

        assert run.status == "completed"
        assert run.replicates_completed == 3
        assert run.replicates_failed == 1
        assert run.end_time is not None

    def test_finish_run_not_found(self, simulation_repository):
        """Test finishing a run that doesn't exist."""
        assert simulation_repository.finish_run(999, completed=0, failed=0) is None

    def test_fail_run(self, simulation_repository, sample_run):
        """Test marking a run as failed."""
        run = simulation_repository.fail_run(sample_run.id, "Scenario validation failed")

        assert run.status == "failed"
        assert run.error_message == "Scenario validation failed"

    def test_add_results(self, simulation_repository, sample_run):
        """Test storing result rows and reading them back."""
        rows = [
            {"replicate": 0, "variant": "subart", "kind": "prediction", "name": "rmse", "outcome": "y1", "value": 1.2},
            {
                "replicate": 0,
                "variant": "subart",
                "kind": "estimand",
                "name": "rho_y1_y2",
                "outcome": None,
                "value": 0.7,
                "truth": 0.75,
                "lower": 0.6,
                "upper": 0.8,
            },
        ]

        # Store rows
        count = simulation_repository.add_results(sample_run.id, rows)
        frame = simulation_repository.results_frame(sample_run.id)

        # Verify rows were stored
        assert count == 2
        assert list(frame.columns) == RESULT_COLUMNS
        assert frame["name"].tolist() == ["rmse", "rho_y1_y2"]
        assert frame.loc[1, "truth"] == pytest.approx(0.75)
        assert pd.isna(frame.loc[0, "truth"])

    def test_results_frame_empty(self, simulation_repository, sample_run):
        """Test the results of a run without rows."""
        frame = simulation_repository.results_frame(sample_run.id)

        assert frame.empty
        assert list(frame.columns) == RESULT_COLUMNS

    def test_log_error(self, simulation_repository, sample_run):
        """Test logging a numerical failure."""
        try:
            raise NotPositiveDefinite("Covariance draw is not positive definite")
        except NotPositiveDefinite as e:
            entry = simulation_repository.log_error(sample_run.id, e, replicate=1, variant="subart")

        assert entry.id is not None
        assert entry.error_type == ErrorType.NUMERICAL
        assert entry.severity == ErrorSeverity.HIGH
        assert entry.exception_class == "NotPositiveDefinite"
        assert "NotPositiveDefinite" in entry.stack_trace

    def test_get_errors_by_run(self, simulation_repository, sample_run):
        """Test getting the errors of a run in insertion order."""
        simulation_repository.log_error(sample_run.id, ConstantOutcome("Outcome y2 is constant"), replicate=0)
        simulation_repository.log_error(sample_run.id, RuntimeError("worker exited"), replicate=1)

        errors = simulation_repository.get_errors_by_run(sample_run.id)

        assert len(errors) == 2
        assert errors[0].error_type == ErrorType.VALIDATION
        assert errors[0].severity == ErrorSeverity.LOW
        assert errors[1].error_type == ErrorType.UNKNOWN
        assert errors[1].variant is None
