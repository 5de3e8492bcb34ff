"""
Test fixtures for suBART Lab.

This module provides test fixtures for the test suite.
"""

import numpy as np
import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker
from sqlalchemy.pool import StaticPool

from config.config import reset_config
from config.config_template import ModelConfig
from src.core_model.dataset import Dataset, validate_dataset
from src.database_management.models import Base
from src.database_management.repositories.simulation_repository import SimulationRepository
from src.utility_modules.enums import CovariateKind, OutcomeMode

# Create an in-memory SQLite database for testing
SQLALCHEMY_DATABASE_URL = "sqlite:///:memory:"
engine = create_engine(
    SQLALCHEMY_DATABASE_URL,
    connect_args={"check_same_thread": False},
    poolclass=StaticPool,
)
TestingSessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

@pytest.fixture(autouse=True)
def fresh_config():
    """Fixture that clears the cached global configuration around every test."""
    reset_config()
    yield
    reset_config()

@pytest.fixture(scope="function")
def db_session():
    """Fixture for database session."""
    # Create the tables
    Base.metadata.create_all(bind=engine)

    connection = engine.connect()
    transaction = connection.begin()
    session = TestingSessionLocal(bind=connection)

    yield session

    session.close()
    transaction.rollback()
    connection.close()

    # Drop the tables
    Base.metadata.drop_all(bind=engine)

@pytest.fixture
def simulation_repository(db_session):
    """Fixture for simulation repository."""
    return SimulationRepository(db_session)

@pytest.fixture
def sample_run(simulation_repository):
    """Fixture for a stored simulation run."""
    return simulation_repository.create_run({
        "scenario": "friedman1",
        "base_seed": 7,
        "replicates": 2,
        "variants": ["subart", "ind-bart"],
        "config": {"model": {"n_trees": 10}},
    })

@pytest.fixture
def rng():
    """Fixture for a seeded random generator."""
    return np.random.default_rng(20240601)

@pytest.fixture
def fast_config():
    """Fixture for a short sampler run."""
    return ModelConfig(n_trees=10, n_mcmc=60, n_burnin=20, seed=1)

@pytest.fixture
def continuous_dataset():
    """Fixture for a small two-outcome continuous dataset with one categorical covariate."""
    gen = np.random.default_rng(11)
    n = 60
    x1 = gen.uniform(0.0, 1.0, n)
    x2 = gen.uniform(0.0, 1.0, n)
    group = gen.integers(0, 3, n).astype(float)
    errors = gen.multivariate_normal([0.0, 0.0], [[0.25, 0.15], [0.15, 0.25]], size=n)
    outcomes = np.column_stack([
        2.0 * x1 + group + errors[:, 0],
        -x2 + 0.5 * group + errors[:, 1],
    ])
    return validate_dataset(Dataset(
        covariates=np.column_stack([x1, x2, group]),
        outcomes=outcomes,
        covariate_kinds=(CovariateKind.CONTINUOUS, CovariateKind.CONTINUOUS, CovariateKind.CATEGORICAL),
        covariate_names=("x1", "x2", "group"),
        outcome_names=("y1", "y2"),
        level_labels=(None, None, ("a", "b", "c")),
    ))

@pytest.fixture
def probit_dataset():
    """Fixture for a small two-outcome binary dataset."""
    gen = np.random.default_rng(12)
    n = 60
    x = gen.uniform(0.0, 1.0, (n, 3))
    latent = np.column_stack([
        2.0 * x[:, 0] - 1.0,
        1.0 - 2.0 * x[:, 1],
    ]) + gen.multivariate_normal([0.0, 0.0], [[1.0, 0.5], [0.5, 1.0]], size=n)
    return validate_dataset(Dataset(
        covariates=x,
        outcomes=(latent > 0).astype(float),
        covariate_kinds=(CovariateKind.CONTINUOUS,) * 3,
        mode=OutcomeMode.PROBIT,
    ))

@pytest.fixture
def treatment_dataset():
    """Fixture for a small cost and effect dataset with a treatment column."""
    gen = np.random.default_rng(13)
    n = 60
    x = gen.uniform(-1.0, 1.0, (n, 2))
    treatment = np.tile([0.0, 1.0], n // 2)
    cost = 1000.0 + 200.0 * x[:, 0] + 300.0 * treatment + gen.normal(0.0, 50.0, n)
    effect = 0.5 + 0.1 * x[:, 1] + 0.05 * treatment + gen.normal(0.0, 0.02, n)
    return validate_dataset(Dataset(
        covariates=x,
        outcomes=np.column_stack([cost, effect]),
        covariate_kinds=(CovariateKind.CONTINUOUS,) * 2,
        covariate_names=("age", "severity"),
        outcome_names=("cost", "effect"),
        treatment=treatment,
    ))
