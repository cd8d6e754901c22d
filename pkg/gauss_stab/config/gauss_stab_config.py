import os
from logging import getLogger
from pathlib import Path, PurePath
from typing import Any, Dict, List, Optional, Union
from urllib.parse import urlparse

import yaml
from pydantic import (
    BaseModel,
    Field,
    StrictBool,
    ValidationError,
    conint,
    conlist,
    constr,
    validator,
)
from typing_extensions import Literal

from gauss_stab.exceptions import GaussStabError
from gauss_stab.numerics.bumps import DEFAULT_SEED, resolve_seed
from gauss_stab.numerics.grid import Grid
from gauss_stab.priors.prior_spec import PriorSpec

LOGGER = getLogger(__name__)

SWEEP_SEPARATOR = "__"

Certificate = Literal["l2", "l1", "operators", "hermite_diag"]


class GaussStabConfigError(GaussStabError):
    """The scenario file cannot be read or does not validate."""


class GridsConfig(BaseModel):
    x: Grid = Grid(lo=-16.0, hi=16.0, n=8193)
    y: Grid = Grid(lo=-8.0, hi=8.0, n=1025)
    t: Grid = Grid(lo=-12.0, hi=12.0, n=2049)
    omega: Grid = Grid(lo=-4.0, hi=4.0, n=801)

    class Config:
        extra = "forbid"
        frozen = True

    @validator("x")
    def _origin_is_a_node(cls, value):
        # the convolution form evaluates its kernel jump at x = 0
        offset = value.offset
        if not 0 <= offset <= value.n - 1 or abs(offset - round(offset)) > 1e-9:
            raise ValueError(
                f"the x grid must have 0 as a node, got lo={value.lo}, hi={value.hi}, n={value.n}"
            )
        return value


class SweepConfig(BaseModel):
    # dotted path into the scenario, e.g. "prior.bump_height"
    parameter: constr(min_length=1)
    values: conlist(Any, min_items=1)

    class Config:
        extra = "forbid"


class ScenarioConfig(BaseModel):
    name: constr(regex=r"^[A-Za-z0-9_-]+$")
    prior: PriorSpec
    grids: GridsConfig = GridsConfig()
    certificates: conlist(Certificate, min_items=1) = ["l2", "l1"]
    n_max: conint(ge=1, le=64) = 10
    sweep: Optional[SweepConfig] = None

    class Config:
        extra = "forbid"

    @validator("certificates")
    def _unique_certificates(cls, value):
        duplicates = sorted({c for c in value if value.count(c) > 1})
        if duplicates:
            raise ValueError(f"certificates listed twice: {duplicates}")
        return value


class RunConfig(BaseModel):
    jobs: conint(ge=1) = Field(default_factory=lambda: os.cpu_count() or 1)
    seed: int = DEFAULT_SEED

    class Config:
        extra = "forbid"

    @property
    def effective_seed(self) -> int:
        return resolve_seed(self.seed)


class TrackingConfig(BaseModel):
    enabled: StrictBool = False
    mlflow_tracking_uri: Optional[str] = None
    experiment_name: str = "gauss_stab"

    class Config:
        extra = "forbid"


class GaussStabConfig(BaseModel):
    format_version: Literal[1]
    run: RunConfig = RunConfig()
    tracking: TrackingConfig = TrackingConfig()
    scenarios: conlist(ScenarioConfig, min_items=1)

    class Config:
        # force triggering type control when setting value instead of init
        validate_assignment = True
        # raise an error if an unknown key is passed to the constructor
        extra = "forbid"

    @validator("scenarios")
    def _unique_names(cls, value):
        names = [scenario.name for scenario in value]
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise ValueError(f"scenario names must be unique, got duplicates {duplicates}")
        return value

    def instances(self, only: Optional[List[str]] = None) -> List[ScenarioConfig]:
        """Scenarios with every sweep expanded, optionally filtered by base name."""
        if only:
            unknown = sorted(set(only) - {s.name for s in self.scenarios})
            if unknown:
                raise GaussStabConfigError(f"Unknown scenario(s) requested: {unknown}")
        selected = [s for s in self.scenarios if not only or s.name in only]
        instances = [item for s in selected for item in expand_sweeps(s)]
        names = [s.name for s in instances]
        clashes = sorted({name for name in names if names.count(name) > 1})
        if clashes:
            raise GaussStabConfigError(
                f"Sweep instances clash with other scenario names: {clashes}"
            )
        return instances


def _set_dotted(data: Dict, path: str, value: Any, scenario: str):
    keys = path.split(".")
    target = data
    for key in keys[:-1]:
        target = target.get(key) if isinstance(target, dict) else None
        if target is None:
            break
    if not isinstance(target, dict) or keys[-1] not in target:
        raise GaussStabConfigError(
            f"sweep parameter '{path}' does not name a field of scenario '{scenario}'"
        )
    target[keys[-1]] = value


def expand_sweeps(scenario: ScenarioConfig) -> List[ScenarioConfig]:
    """One scenario per sweep value, named ``<name>__<index>``."""
    if scenario.sweep is None:
        return [scenario]
    instances = []
    for index, value in enumerate(scenario.sweep.values):
        data = scenario.dict(exclude={"sweep"})
        _set_dotted(data, scenario.sweep.parameter, value, scenario.name)
        data["name"] = f"{scenario.name}{SWEEP_SEPARATOR}{index}"
        try:
            instances.append(ScenarioConfig.parse_obj(data))
        except ValidationError as error:
            raise GaussStabConfigError(
                f"Sweep value {value!r} for '{scenario.sweep.parameter}' in scenario "
                f"'{scenario.name}' is invalid:\n{error}"
            ) from error
    return instances


def _resolve_tabulated_paths(raw: Dict, root: Path):
    for scenario in raw.get("scenarios") or []:
        prior = scenario.get("prior") if isinstance(scenario, dict) else None
        if isinstance(prior, dict) and prior.get("kind") == "tabulated":
            path = prior.get("path")
            if isinstance(path, str) and not Path(path).is_absolute():
                prior["path"] = (root / path).as_posix()


def get_gauss_stab_config(path: Union[str, Path]) -> GaussStabConfig:
    """Read, validate and resolve a scenario file.

    Relative tabulated prior paths and tracking uris are taken from the
    directory of the file.
    """
    path = Path(path)
    try:
        with open(path, mode="r", encoding="utf-8") as file_handler:
            raw = yaml.safe_load(file_handler)
    except OSError as error:
        raise GaussStabConfigError(f"Cannot read configuration '{path}': {error}") from error
    except yaml.YAMLError as error:
        raise GaussStabConfigError(f"Cannot parse configuration '{path}': {error}") from error

    if not isinstance(raw, dict):
        raise GaussStabConfigError(
            f"Configuration '{path}' must be a mapping with a 'format_version' key"
        )
    root = path.parent.resolve()
    _resolve_tabulated_paths(raw, root)
    try:
        config = GaussStabConfig.parse_obj(raw)
    except ValidationError as error:
        raise GaussStabConfigError(f"Invalid configuration '{path}':\n{error}") from error

    if config.tracking.mlflow_tracking_uri is None:
        uri = os.environ.get("MLFLOW_TRACKING_URI", "mlruns")
    else:
        uri = config.tracking.mlflow_tracking_uri
    config.tracking.mlflow_tracking_uri = _validate_uri(project_path=root, uri=uri)
    # expanding early reports broken sweeps at load time
    config.instances()
    return config


def _validate_uri(project_path: Union[str, Path], uri: str) -> str:
    """Format the uri provided to match mlflow expectations.

    Arguments:
        uri {str} -- A valid filepath for mlflow uri

    Returns:
        str -- A valid mlflow_tracking_uri
    """

    if uri == "databricks":
        # reserved mlflow keyword, not a path
        return uri

    pathlib_uri = PurePath(uri)

    if pathlib_uri.is_absolute():
        valid_uri = pathlib_uri.as_uri()
    else:
        parsed = urlparse(uri)
        if parsed.scheme == "":
            valid_uri = (Path(project_path) / uri).as_uri()
            LOGGER.info(
                f"The 'mlflow_tracking_uri' key is relative ('{uri}'). It is converted to a valid uri: '{valid_uri}'"
            )
        else:
            valid_uri = uri

    return valid_uri
