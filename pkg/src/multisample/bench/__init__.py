from .data import ALGORITHMS, ExperimentConfig, Trial, generate_trial, skewed
from .experiment import TrialResult, run_experiment, run_trial, summarize, win_fraction
from .metrics import accuracy_best_assignment, sign_test_pvalue
