"""JSON run configuration shared by the CLI commands."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .bpes import BpesConfig
from .dynamics import SweepSpec
from .errors import ValidationError
from .model import ModelParams, State

OUTPUT_ENV = "TBPLANKTON_OUTPUT_DIR"
METHODS = ("reference", "bpes")
# sections that reports add next to a config; accepted and ignored on load
REPORT_SECTIONS = frozenset({"equilibria", "result"})

BASELINE = ModelParams(alpha=1.9, lam=0.057, beta=1.3, gamma=0.5, mu=0.0)
BASELINE_INITIAL = State(0.9, 0.5)


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "output"))


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "output"
    points: int = 2001

    def to_dict(self) -> dict:
        return {"directory": self.directory, "points": self.points}


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = BASELINE
    initial: State = BASELINE_INITIAL
    method: str = "reference"
    t_end: float = 500.0
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    bpes: BpesConfig | None = None
    sweep: SweepSpec | None = None
    output: OutputSpec = field(default_factory=OutputSpec)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.t_end > 0:
            raise ValidationError("t_end must be positive")
        if not (0 < self.rel_tol < 1 and 0 < self.abs_tol < 1):
            raise ValidationError("tolerances must lie in (0, 1)")
        if self.output.points < 2:
            raise ValidationError("output.points must be >= 2")

    def to_dict(self) -> dict:
        out = {"model": self.model.to_dict(),
               "initial": {"x": self.initial.x, "y": self.initial.y},
               "method": self.method, "t_end": self.t_end,
               "rel_tol": self.rel_tol, "abs_tol": self.abs_tol,
               "output": self.output.to_dict()}
        if self.bpes is not None:
            out["bpes"] = self.bpes.to_dict()
        if self.sweep is not None:
            out["sweep"] = self.sweep.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {"model", "initial", "method", "t_end", "rel_tol", "abs_tol",
                 "bpes", "sweep", "output"}
        unknown = set(data) - known - REPORT_SECTIONS
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        if "model" in data:
            kwargs["model"] = ModelParams.from_dict(data["model"])
        if "initial" in data:
            try:
                kwargs["initial"] = State(float(data["initial"]["x"]), float(data["initial"]["y"]))
            except (KeyError, TypeError, ValueError):
                raise ValidationError("initial must be {\"x\": ..., \"y\": ...}") from None
        for key in ("method",):
            if key in data:
                kwargs[key] = data[key]
        for key in ("t_end", "rel_tol", "abs_tol"):
            if key in data:
                kwargs[key] = float(data[key])
        if data.get("bpes") is not None:
            kwargs["bpes"] = BpesConfig.from_dict(data["bpes"])
        if data.get("sweep") is not None:
            kwargs["sweep"] = SweepSpec.from_dict(data["sweep"])
        if "output" in data:
            try:
                kwargs["output"] = OutputSpec(**data["output"])
            except TypeError as exc:
                raise ValidationError(f"malformed output section: {exc}") from None
        return cls(**kwargs)


def load_config(path: str | Path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ValidationError("config root must be a JSON object")
    return RunConfig.from_dict(data)


def dumps(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"
