"""Flattening of scenario configs and results into mlflow params and metrics."""
from typing import Any, Dict, Iterator, Tuple

from gauss_stab.config.gauss_stab_config import ScenarioConfig


def _is_order_table(value: Any) -> bool:
    """Per-order entries (``l1.per_n``, ``operators.phi``) carry their order ``n``."""
    return (
        isinstance(value, list)
        and len(value) > 0
        and all(isinstance(entry, dict) and "n" in entry for entry in value)
    )


def _leaves(value: Any, prefix: str = "") -> Iterator[Tuple[str, Any]]:
    if isinstance(value, dict):
        for key, item in value.items():
            yield from _leaves(item, f"{prefix}.{key}" if prefix else str(key))
    elif _is_order_table(value):
        for entry in value:
            fields = {key: item for key, item in entry.items() if key != "n"}
            yield from _leaves(fields, f"{prefix}.n{entry['n']}")
    else:
        yield prefix, value


def scenario_params(scenario: ScenarioConfig) -> Dict[str, Any]:
    """``prior.kind``, ``grids.x.n``, ... of a scenario; the sweep is already expanded."""
    return dict(_leaves(scenario.dict(exclude={"sweep"})))


def scalar_metrics(sections: Dict[str, Any]) -> Dict[str, float]:
    """Finite numbers and flags of the result sections, flags as 0/1.

    Tabulated curves (``psi``, ``profile_h``, ...) are left to the CSV tables.
    """
    metrics = {}
    for key, value in _leaves(sections):
        if isinstance(value, bool):
            metrics[key] = float(value)
        elif isinstance(value, (int, float)) and abs(value) < float("inf"):
            metrics[key] = float(value)
    return metrics
