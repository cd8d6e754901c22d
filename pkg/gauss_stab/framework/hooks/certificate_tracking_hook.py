import time
from logging import getLogger
from threading import Lock
from typing import Any, Dict, Optional

from kedro.framework.hooks import hook_impl
from kedro.io import DataCatalog
from kedro.pipeline import Pipeline
from kedro.pipeline.node import Node
from mlflow.entities import Metric, Param, RunStatus
from mlflow.tracking import MlflowClient
from mlflow.utils.mlflow_tags import MLFLOW_PARENT_RUN_ID, MLFLOW_RUN_NAME
from mlflow.utils.validation import MAX_PARAM_VAL_LENGTH

from gauss_stab.config.gauss_stab_config import TrackingConfig
from gauss_stab.framework.hooks.utils import scalar_metrics, scenario_params
from gauss_stab.pipeline.nodes import ScenarioResult

LOGGER = getLogger(__name__)

# posterior tables and profiles stay in the CSV tables; per-order entries are keyed by n
METRIC_SECTIONS = ("prior", "l2", "l1", "operators", "hermite")


class CertificateTrackingHook:
    """Log every collected scenario result as a nested mlflow run.

    Scenario results arrive from worker threads under ``ThreadRunner``, so
    runs are created through an explicit ``MlflowClient`` rather than the
    process-global active run stack.
    """

    def __init__(self, tracking: TrackingConfig):
        self.tracking = tracking
        self._client: Optional[MlflowClient] = None
        self._experiment_id: Optional[str] = None
        self._parent_run_id: Optional[str] = None
        self._lock = Lock()

    @hook_impl
    def before_pipeline_run(
        self, run_params: Dict[str, Any], pipeline: Pipeline, catalog: DataCatalog
    ) -> None:
        self._client = MlflowClient(tracking_uri=self.tracking.mlflow_tracking_uri)
        experiment = self._client.get_experiment_by_name(self.tracking.experiment_name)
        if experiment is None:
            self._experiment_id = self._client.create_experiment(
                self.tracking.experiment_name
            )
        else:
            if experiment.lifecycle_stage == "deleted":
                self._client.restore_experiment(experiment.experiment_id)
            self._experiment_id = experiment.experiment_id
        parent = self._client.create_run(
            self._experiment_id,
            tags={MLFLOW_RUN_NAME: run_params["pipeline_name"]},
        )
        self._parent_run_id = parent.info.run_id
        for key in ("jobs", "seed"):
            if key in run_params:
                self._client.log_param(self._parent_run_id, key, run_params[key])
        LOGGER.info(
            f"Tracking scenario results in mlflow run '{self._parent_run_id}' "
            f"of experiment '{self.tracking.experiment_name}'"
        )

    @hook_impl
    def after_node_run(
        self, node: Node, catalog: DataCatalog, outputs: Dict[str, Any]
    ) -> None:
        """Scenario results are the only outputs that get logged."""
        for value in outputs.values():
            if isinstance(value, ScenarioResult):
                with self._lock:
                    self._log_result(value)

    def _log_result(self, result: ScenarioResult) -> None:
        run = self._client.create_run(
            self._experiment_id,
            tags={MLFLOW_PARENT_RUN_ID: self._parent_run_id, MLFLOW_RUN_NAME: result.name},
        )
        run_id = run.info.run_id
        params = scenario_params(result.scenario)
        timestamp = int(time.time() * 1000)
        sections = result.dict(include=set(METRIC_SECTIONS))
        metrics = scalar_metrics({k: v for k, v in sections.items() if v is not None})
        metrics["passed"] = float(result.passed)
        self._client.log_batch(
            run_id,
            metrics=[Metric(key, value, timestamp, 0) for key, value in sorted(metrics.items())],
            params=[
                Param(key, self._param_value(key, value))
                for key, value in sorted(params.items())
            ],
        )
        for failure in result.failures:
            self._client.set_tag(run_id, f"failure.{failure.stage}", failure.error)
        status = RunStatus.FINISHED if result.passed else RunStatus.FAILED
        self._client.set_terminated(run_id, RunStatus.to_string(status))

    def _param_value(self, name: str, value: Any) -> str:
        str_value = str(value)
        if len(str_value) > MAX_PARAM_VAL_LENGTH:
            LOGGER.warning(
                f"Parameter '{name}' (value length {len(str_value)}) is truncated to its {MAX_PARAM_VAL_LENGTH} first characters."
            )
            return str_value[:MAX_PARAM_VAL_LENGTH]
        return str_value

    @hook_impl
    def after_pipeline_run(
        self,
        run_params: Dict[str, Any],
        run_result: Dict[str, Any],
        pipeline: Pipeline,
        catalog: DataCatalog,
    ) -> None:
        passed = all(result.passed for result in run_result.values())
        self._client.log_metric(self._parent_run_id, "passed", float(passed))
        self._client.set_terminated(self._parent_run_id)

    @hook_impl
    def on_pipeline_error(
        self,
        error: Exception,
        run_params: Dict[str, Any],
        pipeline: Pipeline,
        catalog: DataCatalog,
    ):
        if self._client is not None and self._parent_run_id is not None:
            self._client.set_terminated(
                self._parent_run_id, RunStatus.to_string(RunStatus.FAILED)
            )
