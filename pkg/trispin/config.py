"""Run configuration: validated parameters, optionally loaded from a config file"""
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Literal, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, field_validator

logger = logging.getLogger(__name__)

CONFIG_KEYS = ("a", "b", "c", "theta", "grid", "q", "samples", "seed", "output", "workers", "shards")


class RunConfig(BaseModel):
    """Parameters shared by all commands; each command reads the ones it needs"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    command: str = Field(..., description="Command name echoed in the report")
    a: float = Field(default=1.0, description="Hamiltonian parameter a")
    b: float = Field(default=2.0, description="Hamiltonian parameter b")
    c: float = Field(default=7.0, description="Hamiltonian parameter c")
    theta: Optional[float] = Field(default=None, description="Preparation angle, strictly inside (0, pi/2)")
    grid: Optional[int] = Field(default=None, description="Number of interior theta grid points")
    q: float = Field(default=0.5, description="Per-party overlap mass of the toy model, in (0, 1]")
    samples: int = Field(default=100_000, description="Monte Carlo draws per preparation")
    seed: int = Field(default=0, description="Root seed of every random stream")
    output: Literal["json", "csv"] = Field(default="json", description="Report format")
    workers: int = Field(default=1, description="Worker threads for grid scans and sampling")
    shards: int = Field(default=1, description="Independent random substreams per preparation")

    @field_validator("a", "b", "c")
    @classmethod
    def check_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("Hamiltonian parameters must be finite")
        return v

    @field_validator("theta")
    @classmethod
    def check_theta(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not 0.0 < v < math.pi / 2:
            raise ValueError("theta must lie strictly inside (0, pi/2)")
        return v

    @field_validator("q")
    @classmethod
    def check_q(cls, v: float) -> float:
        if not 0.0 < v <= 1.0:
            raise ValueError("q must lie in (0, 1]")
        return v

    @field_validator("grid", "samples", "workers", "shards")
    @classmethod
    def check_positive(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 1:
            raise ValueError("must be at least 1")
        return v

    @field_validator("seed")
    @classmethod
    def check_seed(cls, v: int) -> int:
        if v < 0:
            raise ValueError("seed must be non-negative")
        return v


def load_config_file(path: str) -> Dict[str, Any]:
    """
    Read a flat key=value file (python-dotenv syntax) or, for *.json, a JSON
    object. Values from key=value files stay strings; pydantic coerces them.
    """
    file = Path(path)
    if not file.is_file():
        raise ValueError(f"config file not found: {path}")
    if file.suffix.lower() == ".json":
        try:
            data = json.loads(file.read_text())
        except json.JSONDecodeError as e:
            raise ValueError(f"config file {path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ValueError(f"config file {path} must hold a JSON object")
    else:
        data = {k: v for k, v in dotenv_values(file).items() if v is not None}
    unknown = sorted(set(data) - set(CONFIG_KEYS))
    if unknown:
        raise ValueError(f"unknown config keys in {path}: {', '.join(unknown)}")
    logger.info(f"Loaded {len(data)} settings from {path}")
    return data


def resolve_config(command: str, config_path: Optional[str], overrides: Dict[str, Any]) -> RunConfig:
    """File values first, then every flag that was actually given"""
    values: Dict[str, Any] = load_config_file(config_path) if config_path else {}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(command=command, **values)
