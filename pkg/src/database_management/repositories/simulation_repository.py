"""
Simulation repository module.

This module provides functions to interact with the simulation_runs,
replicate_results and error_logs tables in the database.
"""

import traceback
from datetime import datetime, timezone
from typing import Any, Dict, Iterable, List, Optional

import pandas as pd
from sqlalchemy import desc
from sqlalchemy.orm import Session

from src.database_management.models import SimulationRun, ReplicateResult, ErrorLog
from src.utility_modules.error_handling import SubartErrorHandler

RESULT_COLUMNS = ["replicate", "variant", "kind", "name", "outcome", "value", "truth", "lower", "upper"]

class SimulationRepository:
    """Repository for simulation run operations."""

    def __init__(self, db: Session):
        """
        Initialize the repository with a database session.

        Args:
            db (Session): SQLAlchemy database session
        """
        self.db = db

    def create_run(self, run_data: Dict[str, Any]) -> SimulationRun:
        """
        Create a new simulation run in the database.

        Args:
            run_data (Dict[str, Any]): Run data (scenario, base_seed, replicates, variants, config)

        Returns:
            SimulationRun: Created run
        """
        run = SimulationRun(
            scenario=run_data["scenario"],
            status=run_data.get("status", "running"),
            base_seed=run_data.get("base_seed"),
            replicates=run_data.get("replicates", 0),
            variants=run_data.get("variants"),
            config=run_data.get("config"),
            start_time=datetime.now(timezone.utc),
        )
        self.db.add(run)
        self.db.commit()
        self.db.refresh(run)
        return run

    def get_run(self, run_id: int) -> Optional[SimulationRun]:
        """
        Get a simulation run by ID.

        Args:
            run_id (int): Run ID

        Returns:
            Optional[SimulationRun]: Run if found, None otherwise
        """
        return self.db.query(SimulationRun).filter(SimulationRun.id == run_id).first()

    def list_runs(self, limit: int = 20, offset: int = 0) -> List[SimulationRun]:
        """Most recent runs first."""
        return self.db.query(SimulationRun).order_by(
            desc(SimulationRun.created_at), desc(SimulationRun.id)
        ).limit(limit).offset(offset).all()

    def finish_run(self, run_id: int, completed: int, failed: int) -> Optional[SimulationRun]:
        """
        Mark a run as completed.

        Args:
            run_id (int): Run ID
            completed (int): Replicate-variant fits that finished
            failed (int): Replicate-variant fits that raised

        Returns:
            Optional[SimulationRun]: Updated run if found, None otherwise
        """
        run = self.get_run(run_id)
        if not run:
            return None
        run.status = "completed"
        run.replicates_completed = completed
        run.replicates_failed = failed
        run.end_time = datetime.now(timezone.utc)
        self.db.commit()
        self.db.refresh(run)
        return run

    def fail_run(self, run_id: int, error_message: str) -> Optional[SimulationRun]:
        run = self.get_run(run_id)
        if not run:
            return None
        run.status = "failed"
        run.error_message = error_message
        run.end_time = datetime.now(timezone.utc)
        self.db.commit()
        self.db.refresh(run)
        return run

    def add_results(self, run_id: int, rows: Iterable[Dict[str, Any]]) -> int:
        """
        Store scored rows of a run.

        Args:
            run_id (int): Run ID
            rows (Iterable[Dict[str, Any]]): Rows keyed by the ReplicateResult columns

        Returns:
            int: Number of rows stored
        """
        results = [
            ReplicateResult(run_id=run_id, **{key: row.get(key) for key in RESULT_COLUMNS})
            for row in rows
        ]
        self.db.add_all(results)
        self.db.commit()
        return len(results)

    def log_error(
        self,
        run_id: int,
        error: Exception,
        replicate: Optional[int] = None,
        variant: Optional[str] = None,
    ) -> ErrorLog:
        """
        Record a failed replicate.

        Args:
            run_id (int): Run ID
            error (Exception): The raised error
            replicate (Optional[int]): Replicate index
            variant (Optional[str]): Model variant

        Returns:
            ErrorLog: Created error row
        """
        error_type = SubartErrorHandler.determine_error_type(error)
        entry = ErrorLog(
            run_id=run_id,
            replicate=replicate,
            variant=variant,
            error_type=error_type,
            severity=SubartErrorHandler.determine_severity(error_type),
            error_message=str(error),
            exception_class=type(error).__name__,
            stack_trace="".join(traceback.format_exception(type(error), error, error.__traceback__)),
        )
        self.db.add(entry)
        self.db.commit()
        self.db.refresh(entry)
        return entry

    def get_errors_by_run(self, run_id: int) -> List[ErrorLog]:
        return self.db.query(ErrorLog).filter(ErrorLog.run_id == run_id).order_by(ErrorLog.id).all()

    def results_frame(self, run_id: int) -> pd.DataFrame:
        """
        All stored results of a run as a data frame.

        Args:
            run_id (int): Run ID

        Returns:
            pd.DataFrame: One row per stored result, columns as RESULT_COLUMNS
        """
        rows = self.db.query(ReplicateResult).filter(
            ReplicateResult.run_id == run_id
        ).order_by(ReplicateResult.id).all()
        return pd.DataFrame(
            [{key: getattr(row, key) for key in RESULT_COLUMNS} for row in rows],
            columns=RESULT_COLUMNS,
        )
