"""Experiment orchestration: configs, runners, tomography and reports."""
from .config import ConfigError, ExperimentConfig, TeleportSettings, load_config
from .experiments import (
    run_classify_noise,
    run_entropy_experiment,
    run_experiment,
    run_oracle,
    run_resolved_experiment,
    run_teleport_experiment,
)
from .report import Report, emit_report, from_json, read_report, to_csv, to_json
from .tomography import (
    TomographyResult,
    corrected_fidelity,
    exact_teleport_fidelity,
    teleport_branches,
    tomography,
)
