"""
Simulation service module.

This module runs the replicate harness and writes its result tables.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from sqlalchemy.orm import Session

from config.config_template import Config
from src.database_management.repositories.simulation_repository import SimulationRepository
from src.simgen.harness import ReplicateRunResult, replicate_runner
from src.utility_modules.error_handling import SubartErrorHandler
from src.utility_modules.io_utils import write_csv_atomic, write_json_atomic

# Configure logging
logger = logging.getLogger(__name__)

RESULTS_FILE = "replicate_results.csv"
AGGREGATE_FILE = "aggregate.csv"
FAILURES_FILE = "failures.json"
DATASET_DIR = "datasets"

class SimulationService:
    """Service for simulation experiments."""

    def __init__(self, config: Config, db: Optional[Session] = None):
        """
        Initialize the service.

        Args:
            config (Config): Configuration object
            db (Optional[Session]): Results database session; runs are not stored when omitted
        """
        self.config = config
        self.db = db
        self.repository = SimulationRepository(db) if db is not None else None

    def run(
        self,
        outdir: Path,
        base_seed: int,
        spec_overrides: Optional[Dict[str, Any]] = None,
    ) -> List[str]:
        """
        Run every replicate and write per-replicate rows, the aggregate table and failures.

        Args:
            outdir (Path): Output directory
            base_seed (int): Experiment seed
            spec_overrides (Optional[Dict[str, Any]]): Extra scenario fields

        Returns:
            List[str]: Artifact names written to outdir
        """
        outdir = Path(outdir)
        result: ReplicateRunResult = replicate_runner(
            self.config.simulation,
            self.config.model,
            base_seed,
            repository=self.repository,
            dataset_dir=outdir / DATASET_DIR,
            spec_overrides=spec_overrides,
        )
        write_csv_atomic(outdir / RESULTS_FILE, result.results)
        write_csv_atomic(outdir / AGGREGATE_FILE, result.aggregate)
        artifacts = [RESULTS_FILE, AGGREGATE_FILE]
        artifacts += [str(path.relative_to(outdir)) for path in result.dataset_paths]

        if result.failures:
            write_json_atomic(outdir / FAILURES_FILE, [
                {
                    "replicate": failure["replicate"],
                    "variant": failure["variant"],
                    **SubartErrorHandler.error_payload(failure["error"]),
                }
                for failure in result.failures
            ])
            artifacts.append(FAILURES_FILE)
            logger.warning(f"{len(result.failures)} replicate fits failed; see {FAILURES_FILE}")
        if result.run_id is not None:
            logger.info(f"Stored simulation run {result.run_id}")
        return artifacts
