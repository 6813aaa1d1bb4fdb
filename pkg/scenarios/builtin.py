"""
builtin.py

The canonical experiments shipped with the repository, one YAML file per
scenario under scenarios/configs/.

Scenarios with eps <= 1/512 are marked heavy: they run on demand only.
"""

from pathlib import Path

from lattice.errors import ScenarioError
from scenarios.scenario import Scenario, load_scenario


CONFIG_DIR = Path(__file__).with_name("configs")
BUILTIN_PREFIX = "builtin:"


def builtin_paths() -> list[Path]:
    return sorted(CONFIG_DIR.glob("*.yaml"))


def builtin_scenarios(include_heavy: bool = True) -> list[Scenario]:
    scenarios = [load_scenario(path) for path in builtin_paths()]
    if not include_heavy:
        scenarios = [s for s in scenarios if not s.heavy]
    return scenarios


def get_builtin(name: str) -> Scenario:
    path = CONFIG_DIR / f"{name}.yaml"
    if not path.exists():
        known = [p.stem for p in builtin_paths()]
        raise ScenarioError(f"no builtin scenario {name!r}; available: {known}")
    return load_scenario(path)


def resolve_scenario(ref: str) -> Scenario:
    """A file path, or builtin:<name>."""
    if ref.startswith(BUILTIN_PREFIX):
        return get_builtin(ref[len(BUILTIN_PREFIX):])
    return load_scenario(ref)
