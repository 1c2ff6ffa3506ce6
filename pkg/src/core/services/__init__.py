"""Run orchestration, experiments, snapshot files and the run history."""
