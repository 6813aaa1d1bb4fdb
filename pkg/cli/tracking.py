"""
tracking.py

Optional MLflow tracking of CLI commands (config section `tracking`).

With tracking disabled every call is a no-op, so commands use the same
code path either way.
"""

import logging
from contextlib import contextmanager
from typing import Optional

import mlflow


logger = logging.getLogger(__name__)


class RunTracker:
    def __init__(self, enabled: bool):
        self.enabled = enabled

    def log_params(self, params: dict) -> None:
        if not self.enabled:
            return
        for key, value in params.items():
            mlflow.log_param(key, value)

    def log_metrics(self, metrics: dict, step: Optional[int] = None) -> None:
        if not self.enabled:
            return
        for key, value in metrics.items():
            if value is None or value != value:
                continue
            mlflow.log_metric(key, float(value), step=step)

    def log_outputs(self, out_dir) -> None:
        if self.enabled:
            mlflow.log_artifacts(str(out_dir))


@contextmanager
def tracked_run(tracking_config: dict, run_name: str, params: dict):
    """Yield a RunTracker; opens an MLflow run when tracking is enabled."""
    if not tracking_config.get("enabled", False):
        yield RunTracker(enabled=False)
        return

    mlflow.set_experiment(tracking_config["experiment_name"])
    with mlflow.start_run(run_name=run_name):
        logger.info("MLflow run started: %s", run_name)
        tracker = RunTracker(enabled=True)
        tracker.log_params(params)
        yield tracker
