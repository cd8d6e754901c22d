from logging import getLogger
from typing import Iterable, List

from kedro.framework.hooks import _create_hook_manager
from kedro.io import DataCatalog, MemoryDataSet
from kedro.pipeline import Pipeline, node
from kedro.pipeline.modular_pipeline import pipeline
from kedro.runner import AbstractRunner, SequentialRunner, ThreadRunner

from gauss_stab.config.gauss_stab_config import ScenarioConfig
from gauss_stab.numerics.bumps import DEFAULT_SEED
from gauss_stab.pipeline.nodes import (
    ScenarioResult,
    certify_l1,
    certify_l2,
    collect_result,
    diagnose_hermite,
    diagnose_operators,
    prepare_field,
    prepare_prior,
)

LOGGER = getLogger(__name__)

SEED_PARAMETER = "params:seed"
PIPELINE_NAME = "gauss_stab"


def scenario_pipeline(scenario: ScenarioConfig) -> Pipeline:
    """The certificate pipeline of one scenario instance, namespaced by its name.

    Only the stages listed in ``scenario.certificates`` are added;
    ``collect_result`` always runs and receives whatever they produce.
    """
    nodes = [
        node(prepare_prior, inputs="scenario", outputs="prior", name="prepare_prior"),
        node(
            prepare_field,
            inputs=["prior", "scenario"],
            outputs="field",
            name="prepare_field",
        ),
    ]
    collected = {"scenario": "scenario", "prior": "prior", "field": "field"}
    if "l2" in scenario.certificates:
        nodes.append(
            node(
                certify_l2,
                inputs=["prior", "field", "scenario"],
                outputs="l2_certificate",
                name="certify_l2",
            )
        )
        collected["l2"] = "l2_certificate"
    if "l1" in scenario.certificates:
        nodes.append(
            node(
                certify_l1,
                inputs=["prior", "field", "scenario"],
                outputs="l1_certificate",
                name="certify_l1",
            )
        )
        collected["l1"] = "l1_certificate"
    if "operators" in scenario.certificates:
        nodes.append(
            node(
                diagnose_operators,
                inputs=["prior", "field", "scenario", SEED_PARAMETER],
                outputs="operator_diagnostics",
                name="diagnose_operators",
            )
        )
        collected["operators"] = "operator_diagnostics"
    if "hermite_diag" in scenario.certificates:
        nodes.append(
            node(
                diagnose_hermite,
                inputs=["prior", "scenario"],
                outputs="hermite_diagnostics",
                name="diagnose_hermite",
            )
        )
        collected["hermite"] = "hermite_diagnostics"
    nodes.append(
        node(collect_result, inputs=collected, outputs="result", name="collect_result")
    )
    return pipeline(Pipeline(nodes), namespace=scenario.name)


def build_catalog(instances: Iterable[ScenarioConfig], full: Pipeline, seed: int) -> DataCatalog:
    # every dataset is registered with copy_mode="assign": priors and fields
    # hold locks and large arrays that must not be copied between nodes
    catalog = DataCatalog()
    catalog.add(SEED_PARAMETER, MemoryDataSet(data=seed, copy_mode="assign"))
    for scenario in instances:
        catalog.add(
            f"{scenario.name}.scenario", MemoryDataSet(data=scenario, copy_mode="assign")
        )
    for name in sorted(full.all_outputs()):
        catalog.add(name, MemoryDataSet(copy_mode="assign"))
    return catalog


def _make_runner(jobs: int) -> AbstractRunner:
    if jobs < 1:
        raise ValueError(f"jobs must be at least 1, got {jobs}")
    return SequentialRunner() if jobs == 1 else ThreadRunner(max_workers=jobs)


def run_scenarios(
    instances: List[ScenarioConfig],
    jobs: int = 1,
    seed: int = DEFAULT_SEED,
    hooks: Iterable = (),
) -> List[ScenarioResult]:
    """Run every scenario instance in one kedro pipeline and return their
    results sorted by name."""
    names = sorted(scenario.name for scenario in instances)
    if len(set(names)) != len(names):
        raise ValueError(f"scenario names must be unique, got {names}")
    full = Pipeline([])
    for scenario in instances:
        full += scenario_pipeline(scenario)
    catalog = build_catalog(instances, full, seed)

    hook_manager = _create_hook_manager()
    for hook in hooks:
        hook_manager.register(hook)
    run_params = {
        "pipeline_name": PIPELINE_NAME,
        "scenarios": names,
        "jobs": jobs,
        "seed": seed,
    }
    LOGGER.info(f"Running {len(names)} scenario(s) with {jobs} job(s)")
    hook_manager.hook.before_pipeline_run(
        run_params=run_params, pipeline=full, catalog=catalog
    )
    try:
        _make_runner(jobs).run(full, catalog, hook_manager)
    except Exception as error:
        hook_manager.hook.on_pipeline_error(
            error=error, run_params=run_params, pipeline=full, catalog=catalog
        )
        raise
    results = [catalog.load(f"{name}.result") for name in names]
    hook_manager.hook.after_pipeline_run(
        run_params=run_params,
        run_result={result.name: result for result in results},
        pipeline=full,
        catalog=catalog,
    )
    return results
