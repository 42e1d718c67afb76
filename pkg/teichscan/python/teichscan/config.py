"""
Defaults table and run configuration.

Every tunable number used by the library lives in ``Defaults``; the command line
builds a ``RunConfig`` per invocation and validates it before anything runs.

"""
from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, Field, ValidationError, model_validator

from .errors import ConfigError

logger = logging.getLogger(__name__)

BUDGET_ENV = "TEICHSCAN_BUDGET"

COMMANDS = ("build", "validate", "decompose", "estimate", "scan", "quasiconvexity", "example", "suite")


class Defaults(BaseModel):
    """
    The documented defaults table.

    """

    model_config = {"frozen": True}

    # Thick-thin threshold on the modulus sum and its floor
    m0: float = 5.0
    m0_floor: float = 3.0

    # Scan grid
    t_step: float = 0.1

    # Budgets
    tighten_budget: int = 10_000
    develop_budget: int = 1_000_000

    # Cylinder search radius is margin * sqrt(area / x*), see decomposition.search_radius
    search_margin: float = 1.5

    # Expanding annuli are searched up to this many sqrt(area) away from the cylinder
    expanding_radius_cap: float = 64.0

    # Classifier dead zone and twist convention
    balanced_tolerance: float = 0.05
    twist_mode: Literal["max", "sum"] = "max"

    # Tolerances
    angle_tol: float = 1e-9
    closure_tol: float = 1e-12

    # Suite caps
    cap_ext_length: float = 16.0
    cap_subsurface: float = 4.0
    cap_monotone: float = 16.0
    cap_arcs: float = 16.0
    cap_k: float = 50.0
    cap_lower: float = 8.0
    cap_maskit: float = 8.0

    @classmethod
    def from_env(cls, **overrides) -> "Defaults":
        """
        Returns the defaults with TEICHSCAN_BUDGET applied to the develop budget.

        """
        raw = os.environ.get(BUDGET_ENV)
        if raw is not None and "develop_budget" not in overrides:
            try:
                overrides["develop_budget"] = int(raw)
            except ValueError as error:
                raise ConfigError(f"{BUDGET_ENV} must be an integer, got {raw!r}") from error
            logger.debug("Develop budget overridden from environment: %s", raw)

        try:
            return cls(**overrides)
        except ValidationError as error:
            raise ConfigError(str(error)) from error


DEFAULTS = Defaults()


class SurfaceSource(BaseModel):
    """
    Where a surface comes from: one of the builders or a JSON file.

    """

    kind: Literal["torus", "slit-tori", "square-tiled", "file"]
    width: Optional[float] = None
    height: Optional[float] = None
    a: Optional[float] = None
    horiz: Optional[list[int]] = None
    vert: Optional[list[int]] = None
    path: Optional[Path] = None

    @model_validator(mode="after")
    def check_parameters(self):
        required = {
            "torus": ("width", "height"),
            "slit-tori": ("a",),
            "square-tiled": ("horiz", "vert"),
            "file": ("path",),
        }[self.kind]

        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"surface source {self.kind!r} needs {', '.join(missing)}")

        return self


class Grid(BaseModel):
    t_min: float = -2.0
    t_max: float = 2.0
    t_step: float = Field(default=DEFAULTS.t_step)

    @model_validator(mode="after")
    def check_grid(self):
        if not self.t_min <= self.t_max:
            raise ValueError(f"grid needs t_min <= t_max, got {self.t_min} > {self.t_max}")
        if not self.t_step > 0:
            raise ValueError(f"grid needs t_step > 0, got {self.t_step}")

        return self


class RunConfig(BaseModel):
    """
    One validated command line invocation.
    NOTE: Exactly one surface source is allowed, and it is required by every command but suite.

    """

    command: Literal[COMMANDS]
    surface: Optional[SurfaceSource] = None
    curve: Optional[str] = None
    grid: Grid = Field(default_factory=Grid)
    m0: float = DEFAULTS.m0
    kind: Literal["ext", "hyp"] = "ext"
    seed: int = 0
    size: int = 20
    output_format: Literal["json", "csv", "svg"] = "json"
    output: Optional[Path] = None
    jobs: Optional[int] = None
    twist_mode: Literal["max", "sum"] = DEFAULTS.twist_mode

    @model_validator(mode="after")
    def check_run(self):
        if not self.m0 > DEFAULTS.m0_floor:
            raise ValueError(f"m0 must exceed {DEFAULTS.m0_floor}, got {self.m0}")

        if self.command != "suite" and self.surface is None:
            raise ValueError(f"command {self.command!r} needs a surface source")

        if self.jobs is not None and self.jobs < 1:
            raise ValueError(f"jobs must be positive, got {self.jobs}")

        if self.size < 1:
            raise ValueError(f"ensemble size must be positive, got {self.size}")

        return self

    @classmethod
    def parse(cls, **fields) -> "RunConfig":
        """
        Builds a RunConfig, turning pydantic failures into ConfigError.

        """
        try:
            return cls(**fields)
        except ValidationError as error:
            raise ConfigError(str(error)) from error
