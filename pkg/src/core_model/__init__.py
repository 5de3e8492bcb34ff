"""
Shared data model: datasets, outcome scaling and posterior chains.
"""

from config.config_template import ModelConfig
from src.core_model.dataset import Dataset, validate_dataset, load_dataset_csv, dataset_to_frame, infer_mode
from src.core_model.scaling import OutcomeScaler, fit_scaler, identity_scaler
from src.core_model.chain import PosteriorChain

__all__ = [
    'ModelConfig',
    'Dataset',
    'validate_dataset',
    'load_dataset_csv',
    'dataset_to_frame',
    'infer_mode',
    'OutcomeScaler',
    'fit_scaler',
    'identity_scaler',
    'PosteriorChain',
]
