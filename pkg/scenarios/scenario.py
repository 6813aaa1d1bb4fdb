"""
scenario.py

Experiment definitions and their YAML file format.

A scenario binds potentials, discretization, gPC order, the methods to
run and, optionally, published error values to compare against. Files
have the sections grid / potentials / time / gpc / methods / expect;
any unknown section or key is a ScenarioError.
"""

from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, get_args, get_type_hints

import yaml

from lattice.errors import BdsgError, ScenarioError
from lattice.grid import Grid, grid_from_divisor
from lattice.potentials import LATTICE_POTENTIALS, RANDOM_POTENTIALS
from pipelines.bdsg_pipeline import SPLITTINGS, RunSpec


METHODS = ("bdsg", "ts-mc", "ts-sc")
SWEEP_AXES = ("dt", "dx", "gpc", "mc-k", "sc-n")


@dataclass(frozen=True)
class GridSection:
    epsilon: float
    dx_divisor: int
    bands: Optional[int] = None


@dataclass(frozen=True)
class PotentialSection:
    lattice: str
    random: str
    sigma: float = 0.0


@dataclass(frozen=True)
class TimeSection:
    final_time: float
    dt: float
    snapshot_every: int = 0
    splitting: str = "strang"


@dataclass(frozen=True)
class GpcSection:
    order: int
    quadrature_nodes: Optional[int] = None


@dataclass(frozen=True)
class MethodSection:
    run: tuple = ("bdsg",)
    mc_samples: int = 1000
    mc_seed: int = 1234
    sc_nodes: int = 5
    ts_dt: Optional[float] = None
    ts_dx_divisor: Optional[int] = None


@dataclass(frozen=True)
class Expectation:
    """Published values; `levels` are the sweep levels along `axis`."""

    source: str = ""
    axis: Optional[str] = None
    levels: tuple = ()
    mean: Optional[tuple] = None
    density: Optional[tuple] = None
    bdsg_mean: Optional[float] = None
    bdsg_density: Optional[float] = None
    ts_mean: Optional[float] = None
    ts_density: Optional[float] = None


_SECTIONS = {
    "grid": GridSection,
    "potentials": PotentialSection,
    "time": TimeSection,
    "gpc": GpcSection,
    "methods": MethodSection,
    "expect": Expectation,
}

_TOP_LEVEL = ("name", "description", "heavy")


@dataclass(frozen=True)
class Scenario:
    name: str
    grid: GridSection
    potentials: PotentialSection
    time: TimeSection
    gpc: GpcSection
    methods: MethodSection = field(default_factory=MethodSection)
    expect: Expectation = field(default_factory=Expectation)
    description: str = ""
    heavy: bool = False

    @property
    def epsilon(self) -> float:
        return self.grid.epsilon

    def make_grid(self, dx_divisor: Optional[int] = None) -> Grid:
        return grid_from_divisor(self.grid.epsilon, dx_divisor or self.grid.dx_divisor)

    def ts_grid(self) -> Grid:
        return self.make_grid(self.methods.ts_dx_divisor)

    @property
    def ts_dt(self) -> float:
        return self.methods.ts_dt or self.time.dt

    def run_spec(
        self,
        dt: Optional[float] = None,
        dx_divisor: Optional[int] = None,
        Q: Optional[int] = None,
        sigma: Optional[float] = None,
    ) -> RunSpec:
        """BD-SG RunSpec, optionally with one sweep level substituted."""
        return RunSpec(
            grid=self.make_grid(dx_divisor),
            lattice=self.potentials.lattice,
            random=self.potentials.random,
            final_time=self.time.final_time,
            dt=dt or self.time.dt,
            Q=self.gpc.order if Q is None else int(Q),
            M=self.grid.bands,
            sigma=self.potentials.sigma if sigma is None else float(sigma),
            splitting=self.time.splitting,
            quadrature_nodes=self.gpc.quadrature_nodes,
            snapshot_every=self.time.snapshot_every,
        )

    def with_sigma(self, sigma: float) -> "Scenario":
        return replace(self, potentials=replace(self.potentials, sigma=float(sigma)))


# --------------------------------------------------
# dict <-> Scenario
# --------------------------------------------------
def _check_type(where: str, key: str, value, expected):
    if value is None:
        return value
    if expected is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if expected is tuple:
        if not isinstance(value, (list, tuple)):
            raise ScenarioError(f"{where}.{key}: expected a list, got {type(value).__name__}")
        return tuple(value)
    if expected is bool and not isinstance(value, bool):
        raise ScenarioError(f"{where}.{key}: expected true/false, got {value!r}")
    if expected is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ScenarioError(f"{where}.{key}: expected an integer, got {value!r}")
    if expected in (float, str) and not isinstance(value, expected):
        raise ScenarioError(f"{where}.{key}: expected {expected.__name__}, got {value!r}")
    return value


def _field_type(cls, name: str) -> type:
    hint = get_type_hints(cls)[name]
    args = [a for a in get_args(hint) if a is not type(None)]
    return args[0] if args else hint


def _section_from_dict(name: str, cls, data) -> object:
    if not isinstance(data, dict):
        raise ScenarioError(f"section {name!r} must be a mapping")

    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ScenarioError(f"section {name!r}: unknown keys {unknown}")

    values = {}
    for key, value in data.items():
        values[key] = _check_type(name, key, value, _field_type(cls, key))

    try:
        return cls(**values)
    except TypeError as exc:
        raise ScenarioError(f"section {name!r}: {exc}") from exc


def _validate(scenario: Scenario) -> None:
    if scenario.potentials.lattice not in LATTICE_POTENTIALS:
        raise ScenarioError(f"unknown lattice potential {scenario.potentials.lattice!r}")
    if scenario.potentials.random not in RANDOM_POTENTIALS:
        raise ScenarioError(f"unknown random potential {scenario.potentials.random!r}")
    if scenario.time.splitting not in SPLITTINGS:
        raise ScenarioError(f"unknown splitting {scenario.time.splitting!r}")

    unknown = [m for m in scenario.methods.run if m not in METHODS]
    if unknown:
        raise ScenarioError(f"unknown methods {unknown}; expected a subset of {list(METHODS)}")

    axis = scenario.expect.axis
    if axis is not None and axis not in SWEEP_AXES:
        raise ScenarioError(f"unknown sweep axis {axis!r}")

    levels = scenario.expect.levels
    for key in ("mean", "density"):
        published = getattr(scenario.expect, key)
        if published is not None and len(published) != len(levels):
            raise ScenarioError(f"expect.{key} has {len(published)} values for {len(levels)} levels")

    try:
        scenario.run_spec()
    except BdsgError as exc:
        raise ScenarioError(f"scenario {scenario.name!r}: {exc}") from exc


def scenario_from_dict(data: dict) -> Scenario:
    """Build and validate a Scenario from a parsed YAML document."""
    if not isinstance(data, dict):
        raise ScenarioError("scenario document must be a mapping")

    unknown = sorted(set(data) - set(_SECTIONS) - set(_TOP_LEVEL))
    if unknown:
        raise ScenarioError(f"unknown sections {unknown}")

    missing = [s for s in ("name", "grid", "potentials", "time", "gpc") if s not in data]
    if missing:
        raise ScenarioError(f"missing sections {missing}")

    kwargs = {
        "name": _check_type("scenario", "name", data["name"], str),
        "description": _check_type("scenario", "description", data.get("description", ""), str),
        "heavy": _check_type("scenario", "heavy", data.get("heavy", False), bool),
    }
    for name, cls in _SECTIONS.items():
        if name in data:
            kwargs[name] = _section_from_dict(name, cls, data[name])

    scenario = Scenario(**kwargs)
    _validate(scenario)
    return scenario


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    return value


def scenario_to_dict(scenario: Scenario) -> dict:
    data = _plain(asdict(scenario))
    ordered = {key: data[key] for key in _TOP_LEVEL}
    ordered.update({name: data[name] for name in _SECTIONS})
    return ordered


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: not valid YAML ({exc})") from exc
    return scenario_from_dict(data)


def dump_scenario(scenario: Scenario, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        yaml.safe_dump(scenario_to_dict(scenario), f, sort_keys=False)
    return path
