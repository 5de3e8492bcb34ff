#!/usr/bin/env python3
"""
Main entry point for suBART Lab.

This module provides the command-line interface: fit, predict, cea,
simulate, calibrate, diagnose and database commands.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from config.config import load_config
from config.config_template import Config
from src.database_management.connection import get_session_factory, init_db
from src.database_management.repositories import SimulationRepository
from src.service_layer import CeaService, FitService, SimulationService
from src.utility_modules.enums import ModelVariant, OutcomeMode, ScenarioId
from src.utility_modules.error_handling import SubartErrorHandler
from src.utility_modules.io_utils import RunManifest, file_digest, utc_now, write_json_atomic, write_manifest

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

ERROR_FILE = "error.json"

def _add_model_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--outdir", type=Path, required=True, help="Output directory")
    parser.add_argument("--config", type=Path, help="JSON configuration file")
    parser.add_argument("--seed", type=int, help="RNG seed")
    parser.add_argument("--chains", type=int, help="Independent chains, run in parallel and concatenated")
    parser.add_argument("--n-trees", type=int, help="Trees per outcome")
    parser.add_argument("--n-mcmc", type=int, help="Total MCMC iterations")
    parser.add_argument("--n-burnin", type=int, help="Burn-in iterations")
    parser.add_argument("--independent", action="store_true", default=None, help="Force a diagonal error covariance")
    parser.add_argument("--progress", action="store_true", default=None, help="Show a progress bar")

def _add_data_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", type=Path, required=True, help="Training CSV with a header row")
    parser.add_argument("--outcomes", nargs="+", required=True, help="Outcome columns")
    parser.add_argument("--categorical", nargs="*", default=[], help="Categorical covariate columns")
    parser.add_argument("--mode", choices=[m.value for m in OutcomeMode], help="Outcome mode (inferred if omitted)")

def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command-line arguments."""
    parser = argparse.ArgumentParser(description="suBART Lab")

    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    # Fit command
    fit_parser = subparsers.add_parser("fit", help="Fit suBART and write the chain")
    _add_model_arguments(fit_parser)
    _add_data_arguments(fit_parser)

    # Predict command
    predict_parser = subparsers.add_parser("predict", help="Predict new rows from a stored chain")
    _add_model_arguments(predict_parser)
    predict_parser.add_argument("--chain", type=Path, required=True, help="Chain file written by fit")
    predict_parser.add_argument("--data", type=Path, required=True, help="CSV with the training covariate columns")
    predict_parser.add_argument("--level", type=float, help="Predictive interval level")

    # CEA command
    cea_parser = subparsers.add_parser("cea", help="Cost-effectiveness analysis")
    _add_model_arguments(cea_parser)
    cea_parser.add_argument("--data", type=Path, required=True, help="CSV with covariates, treatment, cost and effect")
    cea_parser.add_argument("--cost-col", type=str, help="Cost outcome column")
    cea_parser.add_argument("--effect-col", type=str, help="Effect outcome column")
    cea_parser.add_argument("--treatment-col", type=str, help="Treatment indicator column")
    cea_parser.add_argument("--categorical", nargs="*", default=[], help="Categorical covariate columns")
    cea_parser.add_argument("--lambda", dest="lambdas", type=float, nargs="+", help="Willingness-to-pay values to report")
    cea_parser.add_argument("--ps", choices=["on", "off"], help="Append estimated propensity scores")

    # Simulate command
    simulate_parser = subparsers.add_parser("simulate", help="Run the replicate harness")
    _add_model_arguments(simulate_parser)
    simulate_parser.add_argument("--scenario", choices=[s.value for s in ScenarioId], help="Data-generating scenario")
    simulate_parser.add_argument("--n", type=int, help="Training rows per replicate")
    simulate_parser.add_argument("--n-test", type=int, help="Test rows per replicate")
    simulate_parser.add_argument("--d", type=int, help="Outcome count")
    simulate_parser.add_argument("--rho", type=float, help="Cost-effect noise correlation (ttcm_like)")
    simulate_parser.add_argument("--replicates", type=int, help="Number of replicates")
    simulate_parser.add_argument("--variants", type=str, help="Comma-separated variants, e.g. ps-subart,subart,ind-bart")
    simulate_parser.add_argument("--n-jobs", type=int, help="Parallel workers for replicates")
    simulate_parser.add_argument("--write-datasets", action="store_true", default=None, help="Write generated datasets")
    simulate_parser.add_argument("--db-url", type=str, help="Results database URL")
    simulate_parser.add_argument("--no-db", action="store_true", help="Do not store the run in the results database")

    # Calibrate command
    calibrate_parser = subparsers.add_parser("calibrate", help="Write the prior calibration report")
    _add_model_arguments(calibrate_parser)
    _add_data_arguments(calibrate_parser)

    # Diagnose command
    diagnose_parser = subparsers.add_parser("diagnose", help="Traces and acceptance rates of a stored chain")
    _add_model_arguments(diagnose_parser)
    diagnose_parser.add_argument("--chain", type=Path, required=True, help="Chain file written by fit")

    # DB command
    db_parser = subparsers.add_parser("db", help="Results database operations")
    db_parser.add_argument("--db-url", type=str, help="Results database URL")
    db_subparsers = db_parser.add_subparsers(dest="db_command", help="Database command to run")
    init_parser = db_subparsers.add_parser("init", help="Create the results tables")
    init_parser.add_argument("--drop-all", action="store_true", help="Drop existing tables first")
    runs_parser = db_subparsers.add_parser("runs", help="List stored simulation runs")
    runs_parser.add_argument("--limit", type=int, default=20, help="Maximum number of runs to list")

    return parser.parse_args(argv)

def build_overrides(args: argparse.Namespace) -> Dict[str, Dict[str, Any]]:
    """Configuration sections set by command-line flags (None values are ignored)."""
    def get(name: str) -> Any:
        return getattr(args, name, None)

    overrides = {
        "model": {
            "seed": get("seed"),
            "n_chains": get("chains"),
            "n_trees": get("n_trees"),
            "n_mcmc": get("n_mcmc"),
            "n_burnin": get("n_burnin"),
            "independence_flag": get("independent"),
            "show_progress": get("progress"),
            "interval_level": get("level"),
        },
        "cea": {
            "cost_col": get("cost_col"),
            "effect_col": get("effect_col"),
            "treatment_col": get("treatment_col"),
            "report_lambdas": get("lambdas"),
            "use_propensity": None if get("ps") is None else get("ps") == "on",
        },
        "simulation": {
            "scenario": get("scenario"),
            "n_train": get("n"),
            "n_test": get("n_test"),
            "d": get("d"),
            "rho": get("rho"),
            "replicates": get("replicates"),
            "variants": [ModelVariant(v.strip()) for v in get("variants").split(",")] if get("variants") else None,
            "n_jobs": get("n_jobs"),
            "write_datasets": get("write_datasets"),
        },
        "database": {"url": get("db_url")},
    }
    return overrides

def ensure_seed(config: Config) -> Config:
    """Draw and record a seed when none was configured, so every run can be repeated."""
    if config.model.seed is not None:
        return config
    seed = int(np.random.SeedSequence().entropy % (2 ** 31))
    logger.info(f"No seed given; using {seed}")
    return config.model_copy(update={"model": config.model.model_copy(update={"seed": seed})})

def _input_paths(args: argparse.Namespace) -> List[Path]:
    paths = [getattr(args, name, None) for name in ("config", "data", "chain")]
    return [Path(p) for p in paths if p is not None]

def cmd_fit(args: argparse.Namespace, config: Config) -> List[str]:
    service = FitService(config)
    dataset = service.load_dataset(args.data, args.outcomes, args.categorical, mode=OutcomeMode(args.mode) if args.mode else None)
    return service.fit(dataset, args.outdir, n_chains=config.model.n_chains)

def cmd_predict(args: argparse.Namespace, config: Config) -> List[str]:
    return FitService(config).predict(args.chain, args.data, args.outdir)

def cmd_cea(args: argparse.Namespace, config: Config) -> List[str]:
    return CeaService(config).run(args.data, args.outdir, categorical_cols=args.categorical)

def cmd_simulate(args: argparse.Namespace, config: Config) -> List[str]:
    if args.no_db:
        return SimulationService(config).run(args.outdir, config.model.seed)
    init_db(config.database.url)
    db = get_session_factory(config.database.url)()
    try:
        return SimulationService(config, db).run(args.outdir, config.model.seed)
    finally:
        db.close()

def cmd_calibrate(args: argparse.Namespace, config: Config) -> List[str]:
    service = FitService(config)
    dataset = service.load_dataset(args.data, args.outcomes, args.categorical, mode=OutcomeMode(args.mode) if args.mode else None)
    return service.calibrate(dataset, args.outdir)

def cmd_diagnose(args: argparse.Namespace, config: Config) -> List[str]:
    return FitService(config).diagnose(args.chain, args.outdir)

COMMANDS: Dict[str, Callable[[argparse.Namespace, Config], List[str]]] = {
    "fit": cmd_fit,
    "predict": cmd_predict,
    "cea": cmd_cea,
    "simulate": cmd_simulate,
    "calibrate": cmd_calibrate,
    "diagnose": cmd_diagnose,
}

def run_command(args: argparse.Namespace) -> int:
    """
    Run one output-producing command and write its manifest.

    The manifest is written on success and on every failure that reaches
    this point; failures also write error.json and print it to stderr.

    Returns:
        int: 0 on success, 2 for invalid input, 3 for numerical failure, 1 otherwise
    """
    outdir = Path(args.outdir)
    manifest = RunManifest(command=args.command, started_at=utc_now())
    exit_code = 0
    try:
        config = ensure_seed(load_config(args.config, build_overrides(args)))
        manifest.config = config.model_dump(mode="json")
        manifest.seed = config.model.seed
        manifest.input_digests = {str(p): file_digest(p) for p in _input_paths(args) if p.is_file()}
        manifest.artifacts = COMMANDS[args.command](args, config)
        manifest.status = "ok"
    except Exception as e:
        exit_code = SubartErrorHandler.exit_code(e)
        payload = SubartErrorHandler.error_payload(e)
        logger.error(f"{args.command} failed ({payload['error_type']}): {e}")
        manifest.status = "failed"
        manifest.error = payload
        write_json_atomic(outdir / ERROR_FILE, payload)
        manifest.artifacts = [ERROR_FILE]
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    finally:
        manifest.finished_at = utc_now()
        write_manifest(outdir, manifest)
    return exit_code

def handle_db_command(args: argparse.Namespace) -> int:
    """Handle database commands."""
    if not args.db_command:
        logger.error("No database command specified")
        return 2

    config = load_config(overrides={"database": {"url": args.db_url}})
    url = config.database.url
    if args.db_command == "init":
        logger.info(f"Initializing database at {url}")
        init_db(url, drop_all=args.drop_all)
        logger.info("Database initialized")
        return 0

    # Create a database session
    init_db(url)
    db = get_session_factory(url)()
    try:
        runs = SimulationRepository(db).list_runs(limit=args.limit)
        logger.info(f"Found {len(runs)} simulation runs:")
        for run in runs:
            logger.info(
                f"ID: {run.id}, Scenario: {run.scenario}, Status: {run.status}, "
                f"Replicates: {run.replicates}, Completed: {run.replicates_completed}, Failed: {run.replicates_failed}"
            )
    finally:
        db.close()
    return 0

def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    args = parse_args(argv)

    if args.command in COMMANDS:
        return run_command(args)
    elif args.command == "db":
        return handle_db_command(args)
    logger.error("No command specified")
    return 2

if __name__ == "__main__":
    sys.exit(main())
