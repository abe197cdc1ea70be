#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Configuration management for setreg

``EstimatorParams`` carries every discretization knob of the estimators.  ``RunConfig``
is the flat, JSON-serializable run description used by the command line; the
``ConfigManager`` loads it from a file and turns it into estimator parameters.
"""

import json
from dataclasses import dataclass, asdict, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from .exceptions import ConfigurationError, PreconditionError
from .geometry import GridSpec
from ..utils.logger import get_logger


@dataclass(frozen=True)
class EstimatorParams:
    """Discretization parameters shared by all estimators"""
    # ρ schedule: rho_max, rho_max·factor, … down to rho_min
    rho_max: float = 0.5
    rho_factor: float = 0.5
    rho_min: float = 1e-3

    # perturbation tuples and ball sampling
    perturbation_samples: int = 8
    perturbation_fractions: Tuple[float, ...] = (1.0, 0.25, 0.02)
    directions: int = 16
    radial_levels: int = 4
    jitter_samples: int = 8
    ball_samples: GridSpec = GridSpec(1.0, 11, 10)

    # inner searches; grid radii are multiples of ρ
    oracle_grid: GridSpec = GridSpec(4.0, 21, 8)
    bisection_tol: float = 1e-6
    theta_cap: float = 4.0
    refine_starts: int = 3
    step_fraction: float = 1e-3

    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not self.rho_min > 0:
            raise ConfigurationError("rho_min must be > 0")
        if not self.rho_max >= self.rho_min:
            raise ConfigurationError("rho_max must be >= rho_min")
        if not 0 < self.rho_factor < 1:
            raise ConfigurationError("rho_factor must lie in (0, 1)")
        if not 0 < self.bisection_tol < self.rho_min:
            raise ConfigurationError("bisection_tol must lie in (0, rho_min)")
        if self.directions < 2 or self.radial_levels < 1:
            raise ConfigurationError("directions >= 2 and radial_levels >= 1 required")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")

    def rho_schedule(self) -> List[float]:
        """Strictly decreasing geometric sequence from rho_max down to rho_min"""
        schedule = []
        rho = self.rho_max
        while rho >= self.rho_min * (1 - 1e-12):
            schedule.append(rho)
            rho *= self.rho_factor
        return schedule

    def with_overrides(self, **changes) -> "EstimatorParams":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rho_max": self.rho_max,
            "rho_factor": self.rho_factor,
            "rho_min": self.rho_min,
            "perturbation_samples": self.perturbation_samples,
            "perturbation_fractions": list(self.perturbation_fractions),
            "directions": self.directions,
            "radial_levels": self.radial_levels,
            "jitter_samples": self.jitter_samples,
            "ball_samples": asdict(self.ball_samples),
            "oracle_grid": asdict(self.oracle_grid),
            "bisection_tol": self.bisection_tol,
            "theta_cap": self.theta_cap,
            "seed": self.seed,
        }


@dataclass
class RunConfig:
    """Configuration data of one command-line run"""
    # schedule
    rho_max: float = 0.5
    rho_min: float = 1e-3
    rho_factor: float = 0.5

    # sampling
    grid: int = 11
    directions: int = 16
    perturbation_samples: int = 8
    seed: int = 0

    # dual certificates and classification
    delta: float = 0.3
    alpha: float = 0.5
    threshold: float = 0.05

    # execution
    workers: int = 1

    # output
    output_dir: str = "results"
    format: str = "json"

    # logging
    log_level: str = "INFO"
    log_file: str = ""


class ConfigManager:
    """JSON-backed run configuration"""

    DEFAULT_CONFIG_FILE = "setreg.json"
    FORMATS = ("json", "csv")

    def __init__(self, config_file: Optional[str] = None):
        self.logger = get_logger(__name__)
        self.config_file = Path(config_file or self.DEFAULT_CONFIG_FILE)
        self._explicit = config_file is not None
        self._config = RunConfig()
        self._load_config()

    def _load_config(self) -> None:
        """Load configuration from file"""
        if not self.config_file.exists():
            if self._explicit:
                raise ConfigurationError(f"配置文件不存在: {self.config_file}")
            self.logger.debug("配置文件不存在，使用默认设置")
            return

        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise ConfigurationError(f"加载配置文件失败: {e}") from e

        if not isinstance(data, dict):
            raise ConfigurationError("配置文件必须是 JSON 对象")

        known = {f.name for f in fields(RunConfig)}
        for key, value in data.items():
            if key in known:
                setattr(self._config, key, value)
            else:
                self.logger.warning(f"忽略未知配置项: {key}")
        self.validate()
        self.logger.info(f"配置文件加载成功: {self.config_file}")

    def save(self) -> bool:
        """Save configuration to file"""
        try:
            with open(self.config_file, 'w', encoding='utf-8') as f:
                json.dump(asdict(self._config), f, indent=2, ensure_ascii=False)
            self.logger.info("配置文件保存成功")
            return True
        except OSError as e:
            self.logger.error(f"保存配置文件失败: {e}")
            return False

    def validate(self) -> None:
        cfg = self._config
        if cfg.format not in self.FORMATS:
            raise ConfigurationError(f"format must be one of {self.FORMATS}")
        if cfg.grid < 3:
            raise ConfigurationError("grid must be >= 3")
        if not (cfg.delta > 0 and cfg.alpha > 0 and cfg.threshold > 0):
            raise ConfigurationError("delta, alpha and threshold must be > 0")
        self.estimator_params()

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value"""
        return getattr(self._config, key, default)

    def set(self, key: str, value: Any) -> bool:
        """Set configuration value in memory"""
        if hasattr(self._config, key):
            setattr(self._config, key, value)
            return True
        return False

    def update(self, updates: Dict[str, Any]) -> None:
        """Apply overrides, skipping None values (unset command-line flags)"""
        for key, value in updates.items():
            if value is not None and hasattr(self._config, key):
                setattr(self._config, key, value)
        self.validate()

    def get_all(self) -> Dict[str, Any]:
        """Get all configuration values"""
        return asdict(self._config)

    @property
    def run(self) -> RunConfig:
        return self._config

    def estimator_params(self) -> EstimatorParams:
        cfg = self._config
        try:
            return EstimatorParams(
                rho_max=float(cfg.rho_max),
                rho_min=float(cfg.rho_min),
                rho_factor=float(cfg.rho_factor),
                directions=int(cfg.directions),
                perturbation_samples=int(cfg.perturbation_samples),
                ball_samples=GridSpec(1.0, int(cfg.grid), 10),
                seed=int(cfg.seed),
                workers=int(cfg.workers),
            )
        except (TypeError, ValueError, PreconditionError) as e:
            raise ConfigurationError(f"invalid estimator parameters: {e}") from e

    def get_output_dir(self) -> Path:
        return Path(self._config.output_dir)

    def ensure_directories(self) -> None:
        """Ensure the output directory exists"""
        try:
            self.get_output_dir().mkdir(parents=True, exist_ok=True)
        except OSError as e:
            self.logger.warning(f"创建目录失败: {e}")

    def __str__(self) -> str:
        return f"ConfigManager(file={self.config_file})"
