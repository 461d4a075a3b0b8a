import configparser
import logging
import os
from dataclasses import dataclass, field
from functools import lru_cache

from dotenv import load_dotenv

CONFIG_FILE = "config.ini"
CONFIG_ENV_VAR = "MAXLAB_CONFIG"

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MeasureSettings:
    quad_tol: float = 1e-8
    mc_batches: int = 32
    mc_samples: int = 100_000


@dataclass(frozen=True)
class MaximalSettings:
    ladder_ratio: float = 2.0 ** 0.25
    stride: int = 1


@dataclass(frozen=True)
class CounterexampleSettings:
    dirac_eps: float = 0.01
    level_constant: float = 0.25


@dataclass(frozen=True)
class OracleSettings:
    c0: float = 1.0 / 64.0
    containment_samples: int = 100_000
    instances: int = 100
    residual_tol: float = 1e-10
    envelope_spread: float = 1e3


@dataclass(frozen=True)
class Thresholds:
    cube_growth: float = 1.4
    ball_growth: float = 1.1
    diamond_growth: float = 1.1
    lp_growth: float = 1.10
    centered_growth: float = 1.2
    noncentered_growth: float = 1.4
    slicing_delta: float = 0.2
    envelope_spread: float = 50.0


@dataclass(frozen=True)
class OutputSettings:
    database: bool = False
    database_path: str = "maxlab_results.db"
    summary: bool = False
    summary_path: str = "summary.txt"


@dataclass(frozen=True)
class Settings:
    measure: MeasureSettings = field(default_factory=MeasureSettings)
    maximal: MaximalSettings = field(default_factory=MaximalSettings)
    counterexamples: CounterexampleSettings = field(default_factory=CounterexampleSettings)
    oracle: OracleSettings = field(default_factory=OracleSettings)
    thresholds: Thresholds = field(default_factory=Thresholds)
    outputs: OutputSettings = field(default_factory=OutputSettings)
    seed: int = 20240601
    threads: int = 1


def _section(config, name, cls):
    """Build a settings dataclass from one ini section, falling back to the defaults."""
    defaults = cls()
    values = {}
    for key, default in vars(defaults).items():
        if isinstance(default, bool):
            values[key] = config.getboolean(name, key, fallback=default)
        elif isinstance(default, int):
            values[key] = config.getint(name, key, fallback=default)
        elif isinstance(default, float):
            values[key] = config.getfloat(name, key, fallback=default)
        else:
            values[key] = config.get(name, key, fallback=default)
    return cls(**values)


def load_settings(path: str = None) -> Settings:
    """
    Read the tunable constants.

    The lookup order is the explicit path, then $MAXLAB_CONFIG (a .env file
    is honoured), then config.ini in the working directory. Missing files
    and missing keys fall back to the built-in defaults.

    config.ini example:
        [outputs]
        database=true
        summary=false
    """
    load_dotenv()
    path = path or os.environ.get(CONFIG_ENV_VAR) or CONFIG_FILE

    config = configparser.ConfigParser()
    read = config.read(path)
    if not read:
        logger.debug("No config file at %s, using defaults", path)

    return Settings(
        measure=_section(config, "measure", MeasureSettings),
        maximal=_section(config, "maximal", MaximalSettings),
        counterexamples=_section(config, "counterexamples", CounterexampleSettings),
        oracle=_section(config, "oracle", OracleSettings),
        thresholds=_section(config, "thresholds", Thresholds),
        outputs=_section(config, "outputs", OutputSettings),
        seed=config.getint("run", "seed", fallback=Settings.seed),
        threads=config.getint("run", "threads", fallback=Settings.threads),
    )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return load_settings()
