from .nodes import (
    HermiteDiagnostics,
    OperatorDiagnostics,
    PhiDiagnostic,
    PosteriorTable,
    PriorSummary,
    ScenarioResult,
    StageFailure,
)
from .scenario_pipeline import build_catalog, run_scenarios, scenario_pipeline
