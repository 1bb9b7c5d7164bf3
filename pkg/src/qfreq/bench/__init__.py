from .experiment import ExperimentConfig, parse_config, run_experiment, trial_seed
from .generators import GENERATORS, advertised_moment, generate_instance
from .theory import CATALOGUE, evaluate, theory_table

__all__ = [
    "CATALOGUE",
    "ExperimentConfig",
    "GENERATORS",
    "advertised_moment",
    "evaluate",
    "generate_instance",
    "parse_config",
    "run_experiment",
    "theory_table",
    "trial_seed",
]
