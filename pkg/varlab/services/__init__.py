from .experiment_service import ExperimentConfig, ExperimentService, SweepResult, run_experiment
from .experiments import EXPERIMENTS

__all__ = ["EXPERIMENTS", "ExperimentConfig", "ExperimentService", "SweepResult", "run_experiment"]
