"""Experiment configuration: JSON schema and loading."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError

EXPERIMENTS = ("evolve", "theta-sweep", "reinit", "homogenize", "distance", "continuity", "cell")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ProblemCfg(_Strict):
    name: str
    params: dict = Field(default_factory=dict)


class GridCfg(_Strict):
    lo: Union[float, list[float]]
    hi: Union[float, list[float]]
    n: Union[int, list[int]]
    ghost: Literal["linear", "constant"] = "linear"


class H1Cfg(_Strict):
    velocity: str = "constant"
    params: dict = Field(default_factory=dict)


class CorrectorCfg(_Strict):
    eps0: Optional[float] = Field(default=None, gt=0)
    h_variant: Literal["signed", "plus"] = "signed"
    beta_kind: Literal["smooth-sign", "smooth-sign-squared"] = "smooth-sign"


class ScheduleCfg(_Strict):
    k1: int = Field(gt=0)
    k2: int = Field(gt=0)
    dt_split: float = Field(gt=0)


class OutputsCfg(_Strict):
    dir: str = "runs/out"
    trajectories: bool = True


class ContinuityCfg(_Strict):
    points: list[list[float]]
    eps_ball: Optional[float] = Field(default=None, gt=0)
    delta: Optional[float] = Field(default=None, gt=0)
    zero_tol: float = Field(default=1e-12, ge=0)
    settle: float = Field(default=0.0, ge=0, lt=1)


class ReinitCfg(_Strict):
    tol: float = Field(default=1e-6, gt=0)
    max_steps: int = Field(default=100_000, gt=0)
    band: float = Field(default=0.5, gt=0)


class CellCfg(_Strict):
    a: float
    b: float
    theta: float = Field(gt=0)
    v0: float = 0.0
    samples: int = Field(default=11, ge=2)


class RunConfig(_Strict):
    experiment: Literal[EXPERIMENTS]
    problem: Optional[ProblemCfg] = None
    grid: Optional[GridCfg] = None
    h1: H1Cfg = Field(default_factory=H1Cfg)
    corrector: CorrectorCfg = Field(default_factory=CorrectorCfg)
    theta: Union[None, float, list[float]] = None
    schedule: Optional[ScheduleCfg] = None
    eps: Optional[list[float]] = None
    T: Optional[float] = Field(default=None, gt=0)
    cfl: float = Field(default=0.5, gt=0, le=1)
    integrator: Literal["euler", "rk2"] = "rk2"
    snap_every: int = Field(default=0, ge=0)
    snap_times: list[float] = Field(default_factory=list)
    region_radius: Optional[float] = Field(default=None, gt=0)
    zero_tol: float = Field(default=1e-12, ge=0)
    outputs: OutputsCfg = Field(default_factory=OutputsCfg)
    continuity: Optional[ContinuityCfg] = None
    reinit: ReinitCfg = Field(default_factory=ReinitCfg)
    cell: Optional[CellCfg] = None

    @model_validator(mode="after")
    def _needs(self):
        e = self.experiment
        if e == "cell":
            if self.cell is None:
                raise ValueError("experiment 'cell' needs a 'cell' section")
            return self
        for key in ("problem", "grid"):
            if getattr(self, key) is None:
                raise ValueError(f"experiment {e!r} needs '{key}'")
        if e != "reinit" and self.T is None:
            raise ValueError(f"experiment {e!r} needs 'T'")
        if e == "theta-sweep" and not isinstance(self.theta, list):
            raise ValueError("theta-sweep needs 'theta' as a list")
        if e == "homogenize":
            if self.eps is None or self.theta is None or isinstance(self.theta, list):
                raise ValueError("homogenize needs 'eps' (list) and a scalar 'theta'")
        if e == "continuity" and self.continuity is None:
            raise ValueError("experiment 'continuity' needs a 'continuity' section")
        if self.schedule is not None and self.theta is not None:
            raise ValueError("give either 'schedule' or 'theta', not both")
        return self


def format_validation_error(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        path = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{path}: {err['msg']}")
    return "; ".join(lines)


def parse_config(data) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(format_validation_error(exc)) from exc


def load_config(path) -> RunConfig:
    """Read and validate a JSON run descriptor.  OSError propagates."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"<json>: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_config(data)
