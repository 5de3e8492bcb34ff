"""
Tests for the services and the command-line interface.
"""

import json

import pandas as pd
import pytest

from config.config_template import Config, ModelConfig, SimulationConfig
from main import build_overrides, main, parse_args
from src.core_model.dataset import dataset_to_frame
from src.database_management.repositories.simulation_repository import SimulationRepository
from src.service_layer.cea_service import model_variant
from src.service_layer.simulation_service import AGGREGATE_FILE, RESULTS_FILE, SimulationService
from src.utility_modules.enums import ModelVariant

FAST_FLAGS = ["--seed", "1", "--n-trees", "5", "--n-mcmc", "30", "--n-burnin", "10"]

def _manifest(outdir):
    return json.loads((outdir / "manifest.json").read_text())

@pytest.fixture
def training_csv(tmp_path, continuous_dataset):
    """Fixture for the continuous dataset written as CSV."""
    path = tmp_path / "train.csv"
    dataset_to_frame(continuous_dataset).to_csv(path, index=False)
    return path

@pytest.fixture
def fitted_dir(tmp_path, training_csv):
    """Fixture for the output directory of a finished fit."""
    outdir = tmp_path / "fit"
    code = main([
        "fit", "--outdir", str(outdir), "--data", str(training_csv),
        "--outcomes", "y1", "y2", "--categorical", "group", *FAST_FLAGS,
    ])
    assert code == 0
    return outdir

class TestArguments:
    """Test cases for argument parsing."""

    def test_overrides(self):
        """Test that flags map onto configuration sections and unset flags stay None."""
        args = parse_args(["simulate", "--outdir", "out", "--variants", "ps-subart,subart", "--n", "50", "--seed", "4"])
        overrides = build_overrides(args)
        assert overrides["simulation"]["variants"] == [ModelVariant.PS_SUBART, ModelVariant.SUBART]
        assert overrides["simulation"]["n_train"] == 50
        assert overrides["model"]["seed"] == 4
        assert overrides["model"]["n_trees"] is None
        assert overrides["cea"]["use_propensity"] is None

    def test_ps_flag(self):
        """Test the propensity on/off flag."""
        args = parse_args(["cea", "--outdir", "out", "--data", "d.csv", "--ps", "off"])
        assert build_overrides(args)["cea"]["use_propensity"] is False

    def test_no_command(self):
        """Test that a missing command exits with status 2."""
        assert main([]) == 2

    def test_model_variant(self):
        """Test the variant label of a CEA run."""
        assert model_variant(True, False) == ModelVariant.PS_SUBART
        assert model_variant(False, True) == ModelVariant.IND_BART

class TestFitCommands:
    """Test cases for fit, predict, diagnose and calibrate."""

    def test_fit(self, fitted_dir):
        """Test the fit artifacts and manifest."""
        manifest = _manifest(fitted_dir)
        assert manifest["status"] == "ok"
        assert manifest["seed"] == 1
        assert manifest["command"] == "fit"
        for name in ("chain.npz", "calibration.json", "diagnostics.json", "trace.csv", "parameters.csv"):
            assert (fitted_dir / name).exists()
            assert name in manifest["artifact_digests"]
        assert any(path.endswith("train.csv") for path in manifest["input_digests"])
        diagnostics = json.loads((fitted_dir / "diagnostics.json").read_text())
        assert diagnostics["mode"] == "continuous"
        assert "px_mh" not in diagnostics

    def test_predict(self, tmp_path, fitted_dir, continuous_dataset):
        """Test prediction of new rows from the stored chain."""
        newdata = tmp_path / "new.csv"
        dataset_to_frame(continuous_dataset).head(5).to_csv(newdata, index=False)
        outdir = tmp_path / "predict"
        code = main([
            "predict", "--outdir", str(outdir), "--chain", str(fitted_dir / "chain.npz"),
            "--data", str(newdata), "--level", "0.9",
        ])
        assert code == 0
        predictions = pd.read_csv(outdir / "predictions.csv")
        assert len(predictions) == 10
        assert list(predictions.columns) == ["row", "outcome", "mean", "lo", "hi"]
        assert (predictions["lo"] <= predictions["hi"]).all()

    def test_predict_unknown_level(self, tmp_path, fitted_dir):
        """Test that an unseen categorical label fails with exit status 2."""
        newdata = tmp_path / "new.csv"
        pd.DataFrame({"x1": [0.5], "x2": [0.5], "group": ["z"]}).to_csv(newdata, index=False)
        outdir = tmp_path / "predict"
        code = main(["predict", "--outdir", str(outdir), "--chain", str(fitted_dir / "chain.npz"), "--data", str(newdata)])
        assert code == 2
        assert json.loads((outdir / "error.json").read_text())["error"] == "UnknownCategoryLevel"

    def test_diagnose(self, tmp_path, fitted_dir):
        """Test diagnostics from a stored chain."""
        outdir = tmp_path / "diagnose"
        assert main(["diagnose", "--outdir", str(outdir), "--chain", str(fitted_dir / "chain.npz")]) == 0
        trace = pd.read_csv(outdir / "trace.csv")
        assert len(trace) == 30

    def test_calibrate(self, tmp_path, training_csv):
        """Test the calibration report without sampling."""
        outdir = tmp_path / "calibrate"
        code = main([
            "calibrate", "--outdir", str(outdir), "--data", str(training_csv),
            "--outcomes", "y1", "y2", "--categorical", "group",
        ])
        assert code == 0
        report = json.loads((outdir / "calibration.json").read_text())
        assert [entry["outcome"] for entry in report["outcomes"]] == ["y1", "y2"]
        # A seed is drawn and recorded when none is given
        assert _manifest(outdir)["seed"] is not None

    def test_malformed_csv(self, tmp_path):
        """Test that a ragged CSV fails with status 2 and still writes the manifest."""
        bad = tmp_path / "bad.csv"
        bad.write_text("x,y\n1,2\n3,4,5,6\n")
        outdir = tmp_path / "out"
        code = main(["fit", "--outdir", str(outdir), "--data", str(bad), "--outcomes", "y", *FAST_FLAGS])
        assert code == 2
        error = json.loads((outdir / "error.json").read_text())
        assert error["error_type"] == "schema"
        manifest = _manifest(outdir)
        assert manifest["status"] == "failed"
        assert manifest["artifacts"] == ["error.json"]

    def test_invalid_config_value(self, tmp_path, training_csv):
        """Test that an out-of-domain setting fails with status 2."""
        outdir = tmp_path / "out"
        code = main([
            "fit", "--outdir", str(outdir), "--data", str(training_csv), "--outcomes", "y1",
            "--n-mcmc", "10", "--n-burnin", "10",
        ])
        assert code == 2
        assert _manifest(outdir)["error"]["error_type"] == "validation"

class TestCeaCommand:
    """Test cases for the cea command."""

    def test_cea_bundle(self, tmp_path, treatment_dataset):
        """Test the cost-effectiveness result bundle."""
        data = tmp_path / "cea.csv"
        dataset_to_frame(treatment_dataset).to_csv(data, index=False)
        outdir = tmp_path / "cea"
        code = main(["cea", "--outdir", str(outdir), "--data", str(data), "--lambda", "20000", "--ps", "off", *FAST_FLAGS])
        assert code == 0
        summary = json.loads((outdir / "summary.json").read_text())
        assert summary["variant"] == "subart"
        assert summary["design_columns"] == ["age", "severity", "treatment"]
        assert summary["propensity_column"] is None
        assert "inb_20000" in summary
        ceac = pd.read_csv(outdir / "ceac.csv")
        assert set(ceac["variant"]) == {"subart", "subart-independent"}
        assert ceac["probability"].between(0.0, 1.0).all()
        assert len(pd.read_csv(outdir / "cate_inb_20000.csv")) == treatment_dataset.n
        assert (outdir / "cep_draws.csv").exists()

    def test_same_cost_and_effect(self, tmp_path, treatment_dataset):
        """Test that identical cost and effect columns are rejected."""
        data = tmp_path / "cea.csv"
        dataset_to_frame(treatment_dataset).to_csv(data, index=False)
        code = main([
            "cea", "--outdir", str(tmp_path / "cea"), "--data", str(data),
            "--cost-col", "cost", "--effect-col", "cost", *FAST_FLAGS,
        ])
        assert code == 2

class TestSimulateCommand:
    """Test cases for simulate and the results database."""

    def test_simulate_without_db(self, tmp_path):
        """Test a one-replicate run written to disk only."""
        outdir = tmp_path / "sim"
        code = main([
            "simulate", "--outdir", str(outdir), "--no-db", "--scenario", "friedman1",
            "--n", "20", "--n-test", "5", "--replicates", "1", "--variants", "subart", "--write-datasets", *FAST_FLAGS,
        ])
        assert code == 0
        results = pd.read_csv(outdir / RESULTS_FILE)
        assert set(results["kind"]) == {"prediction", "estimand"}
        assert (outdir / AGGREGATE_FILE).exists()
        assert "datasets/friedman1_rep0000_train.csv" in _manifest(outdir)["artifacts"]

    def test_service_stores_run(self, tmp_path, db_session):
        """Test that the simulation service stores its run."""
        config = Config(
            model=ModelConfig(n_trees=5, n_mcmc=30, n_burnin=10, seed=0),
            simulation=SimulationConfig(n_train=20, n_test=5, replicates=1),
        )
        artifacts = SimulationService(config, db_session).run(tmp_path, base_seed=3)
        assert artifacts == [RESULTS_FILE, AGGREGATE_FILE]
        runs = SimulationRepository(db_session).list_runs()
        assert len(runs) == 1
        assert runs[0].status == "completed"
        assert runs[0].base_seed == 3

    def test_db_commands(self, tmp_path):
        """Test db init and listing runs."""
        url = f"sqlite:///{tmp_path / 'runs.db'}"
        assert main(["db", "--db-url", url, "init"]) == 0
        assert (tmp_path / "runs.db").exists()
        assert main(["db", "--db-url", url, "runs", "--limit", "5"]) == 0
        assert main(["db", "--db-url", url]) == 2
