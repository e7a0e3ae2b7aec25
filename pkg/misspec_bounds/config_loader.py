import logging
import os
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence

import yaml

from misspec_bounds.equivalent_model import G_ALIASES, G_FUNCTIONS
from misspec_bounds.errors import UsageError
from misspec_bounds.models.experiment_config import SCENARIOS, ExperimentConfig

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent / "data"
SEED_ENV = "MISSPEC_SEED"

_TUPLE_FIELDS = {"N_sweep": int, "rho": float, "g_functions": str, "theta0_sweep": float}
_SCALAR_TYPES = {f.name: type(f.default) for f in fields(ExperimentConfig) if f.name != "scenario"}


def parse_override(item: str) -> tuple:
    """
    Splits "--key=value" and parses value as YAML, so numbers and lists are typed.
    """
    if not item.startswith("--") or "=" not in item:
        raise UsageError(f"Overrides must look like --key=value, got '{item}'.")
    key, raw = item[2:].split("=", 1)
    try:
        value = yaml.safe_load(raw) if raw else ""
    except yaml.YAMLError as e:
        raise UsageError(f"Cannot parse value of --{key}: {e}") from e
    return key.replace("-", "_"), value


def _coerce(key: str, value: Any) -> Any:
    try:
        if key in _TUPLE_FIELDS:
            items = value if isinstance(value, (list, tuple)) else [value]
            return tuple(_TUPLE_FIELDS[key](v) for v in items)
        kind = _SCALAR_TYPES[key]
        if kind is complex:
            return complex(str(value).replace(" ", "")) if isinstance(value, str) else complex(value)
        if kind is bool:
            if isinstance(value, str):
                return value.strip().lower() in ("1", "true", "yes", "on")
            return bool(value)
        if kind is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(f"{value} is not an integer")
            return int(value)
        return kind(value)
    except (TypeError, ValueError) as e:
        raise UsageError(f"Bad value for '{key}': {value!r} ({e}).") from e


def validate(config: ExperimentConfig) -> ExperimentConfig:
    """
    Raises:
        UsageError: On the first violated constraint.
    """
    problems = []
    for name in ("sigma2", "epsilon", "sigma1_sq", "sigma2_sq"):
        if not getattr(config, name) > 0:
            problems.append(f"{name} must be positive")
    if any(not 0 <= r < 1 for r in config.rho) or not 0 <= config.jacobian_rho < 1:
        problems.append("rho values must lie in [0, 1)")
    if config.n_trials < 100:
        problems.append("n_trials must be at least 100")
    if config.M < 2:
        problems.append("M must be at least 2")
    if config.N < 1 or any(n < 1 for n in config.N_sweep):
        problems.append("N must be at least 1")
    if config.mc_samples < 2 or config.jacobian_mc_samples < 2:
        problems.append("mc_samples must be at least 2")
    if config.workers < 1 or config.batch_size < 1:
        problems.append("workers and batch_size must be positive")
    if not config.z_threshold > 0:
        problems.append("z_threshold must be positive")
    if config.n_random_problems < 1 or config.n_probe < 1:
        problems.append("n_random_problems and n_probe must be positive")
    if not abs(config.phi) < 3.141592653589793 / 2:
        problems.append("phi must lie in (-pi/2, pi/2)")
    unknown = [g for g in config.g_functions if g not in G_FUNCTIONS and g not in G_ALIASES]
    if unknown:
        problems.append(f"unknown g-functions {unknown}")
    if problems:
        raise UsageError("Invalid configuration: " + "; ".join(problems) + ".")
    return config


class ConfigLoader:
    """
    Builds an ExperimentConfig from shipped defaults, a config file,
    command-line overrides and the MISSPEC_SEED environment variable, in
    increasing order of precedence.
    """

    def __init__(self, data_dir: Path = DATA_DIR):
        self.data_dir = Path(data_dir)
        self.defaults: Dict[str, Dict[str, Any]] = {}

    def initiate(self) -> None:
        """Loads data/<scenario>.yaml for every scenario."""
        for scenario in SCENARIOS:
            path = self.data_dir / f"{scenario}.yaml"
            self.defaults[scenario] = self.read_file(path) if path.exists() else {}

    @staticmethod
    def read_file(path) -> Dict[str, Any]:
        """
        Reads a flat key-value YAML file.

        Raises:
            UsageError: If the file is missing, malformed or nested.
        """
        try:
            with open(path, "r", encoding="utf-8") as f:
                content = yaml.safe_load(f)
        except OSError as e:
            raise UsageError(f"Cannot read config file {path}: {e}") from e
        except yaml.YAMLError as e:
            raise UsageError(f"Malformed config file {path}: {e}") from e
        if content is None:
            return {}
        if not isinstance(content, dict) or any(isinstance(v, dict) for v in content.values()):
            raise UsageError(f"Config file {path} must be a flat key-value mapping.")
        return content

    def run(
        self,
        scenario: str,
        config_file: Optional[str] = None,
        overrides: Sequence[str] = (),
        environ: Optional[Mapping[str, str]] = None,
    ) -> ExperimentConfig:
        if scenario not in SCENARIOS:
            raise UsageError(f"Unknown scenario '{scenario}'. Known: {', '.join(SCENARIOS)}.")
        values: Dict[str, Any] = dict(self.defaults.get(scenario, {}))
        if config_file is not None:
            values.update(self.read_file(config_file))
        values.update(dict(parse_override(item) for item in overrides))
        environ = os.environ if environ is None else environ
        if environ.get(SEED_ENV):
            values["seed"] = environ[SEED_ENV]
            logger.info("Seed taken from %s", SEED_ENV)
        values.pop("scenario", None)
        unknown = sorted(set(values) - set(_SCALAR_TYPES))
        if unknown:
            raise UsageError(f"Unknown configuration keys: {', '.join(unknown)}.")
        typed = {key: _coerce(key, value) for key, value in values.items()}
        return validate(ExperimentConfig(scenario=scenario, **typed))
