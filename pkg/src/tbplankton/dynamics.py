"""Regime classification, parameter sweeps and plot-data emission.

The classifier maps a trajectory onto the five outcome categories used in
parameter sweep tables. Its thresholds are knobs on
:class:`ClassifierConfig`; the defaults are the ones the acceptance suite
is pinned to.
"""
from __future__ import annotations

import enum
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import InconclusiveError, PlanktonError, ValidationError
from .integrate import Terminal, Trajectory, integrate
from .model import Equilibrium, EquilibriumKind, ModelParams, State, equilibria, rhs_xy
from .stability import classify_interior

SWEEPABLE = ("alpha", "lambda", "beta", "gamma")


class RegimeKind(str, enum.Enum):
    STABLE_FOCUS = "StableFocus"
    STABLE_LIMIT_CYCLE = "StableLimitCycle"
    EXTINCTION = "Extinction"
    INTEGRATION_ERROR = "IntegrationError"
    ARGUMENT_DOMAIN_ERROR = "ArgumentDomainError"


@dataclass(frozen=True)
class RegimeLabel:
    kind: RegimeKind
    evidence: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ClassifierConfig:
    extinction_threshold: float = 1e-6
    extinction_window: float = 0.25
    focus_distance: float = 1e-3
    focus_window: float = 0.10
    amplitude_window: float = 0.25
    cycle_band: tuple[float, float] = (0.99, 1.01)
    cycle_min_peaks: int = 5
    cycle_min_amplitude: float = 1e-3
    # peak-to-peak swings below this are integration noise, not oscillation
    amplitude_floor: float = 1e-8
    decay_slack: float = 1e-3
    resample_points: int = 20_001
    min_horizon: float = 20.0


@dataclass(frozen=True)
class Peaks:
    max_t: np.ndarray
    max_x: np.ndarray
    min_t: np.ndarray
    min_x: np.ndarray


def _parabolic(t: np.ndarray, v: np.ndarray, i: int) -> tuple[float, float]:
    """Vertex of the parabola through samples i-1, i, i+1 (uniform spacing)."""
    i = min(max(i, 1), len(v) - 2)
    a, b, c = v[i - 1], v[i], v[i + 1]
    denom = a - 2 * b + c
    if denom == 0:
        return float(t[i]), float(b)
    shift = 0.5 * (a - c) / denom
    shift = max(-1.0, min(1.0, shift))
    dt = t[1] - t[0]
    return float(t[i] + shift * dt), float(b - 0.25 * (a - c) * shift)


def find_peaks(t: np.ndarray, x: np.ndarray, dxdt: np.ndarray) -> Peaks:
    """Extrema of x from sign changes of dx/dt, refined parabolically."""
    pos = dxdt > 0
    maxima = np.nonzero(pos[:-1] & ~pos[1:])[0]
    minima = np.nonzero(~pos[:-1] & pos[1:])[0]

    def refine(idx):
        out = []
        for i in idx:
            j = i if abs(dxdt[i]) < abs(dxdt[i + 1]) else i + 1
            out.append(_parabolic(t, x, j))
        arr = np.array(out, dtype=float).reshape(-1, 2)
        return arr[:, 0], arr[:, 1]

    mt, mx = refine(maxima)
    nt, nx = refine(minima)
    return Peaks(mt, mx, nt, nx)


def _window(traj: Trajectory, fraction: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    t1 = traj.times[-1]
    t0 = max(traj.times[0], t1 - fraction * traj.duration)
    t = np.linspace(t0, t1, n)
    return t, traj.sample(t)


def _amplitudes(peaks: Peaks, floor: float) -> np.ndarray:
    """Peak-to-peak swing from each maximum to the minimum that follows it."""
    amps = []
    for tm, xm in zip(peaks.max_t, peaks.max_x):
        later = np.nonzero(peaks.min_t > tm)[0]
        if len(later):
            amps.append(xm - peaks.min_x[later[0]])
    amps = np.array(amps)
    return amps[amps > floor]


def _round(v: float) -> float:
    return float(f"{v:.12g}")


def classify(traj: Trajectory, p: ModelParams, eq: list[Equilibrium] | None = None,
             config: ClassifierConfig | None = None) -> RegimeLabel:
    cfg = config or ClassifierConfig()
    eq = equilibria(p) if eq is None else eq
    evidence: dict = {"terminal": traj.terminal.value}
    if traj.events:
        evidence["events"] = [[_round(t), k] for t, k in traj.events]

    if traj.terminal is Terminal.SOLVER_FAILURE:
        evidence["rule"] = "solver-failure"
        return RegimeLabel(RegimeKind.INTEGRATION_ERROR, evidence)
    if traj.terminal is Terminal.DOMAIN_VIOLATION:
        evidence["rule"] = "domain-violation"
        return RegimeLabel(RegimeKind.ARGUMENT_DOMAIN_ERROR, evidence)
    if traj.terminal is Terminal.EXTINCT:
        evidence["rule"] = "extinct-terminal"
        evidence["min_y"] = _round(float(traj.y.min()))
        return RegimeLabel(RegimeKind.EXTINCTION, evidence)
    if traj.duration < cfg.min_horizon:
        raise InconclusiveError(
            f"horizon {traj.duration:g} shorter than {cfg.min_horizon:g}; integrate longer")

    t_ext, s_ext = _window(traj, cfg.extinction_window, cfg.resample_points)
    min_y = float(s_ext[:, 1].min())
    evidence["min_y"] = _round(min_y)
    evidence["min_x"] = _round(float(s_ext[:, 0].min()))
    if min_y < cfg.extinction_threshold:
        evidence["rule"] = "extinction-threshold"
        return RegimeLabel(RegimeKind.EXTINCTION, evidence)

    t_amp, s_amp = _window(traj, cfg.amplitude_window, cfg.resample_points)
    dxdt = np.array([rhs_xy(p, xi, yi)[0] for xi, yi in s_amp])
    peaks = find_peaks(t_amp, s_amp[:, 0], dxdt)
    amps = _amplitudes(peaks, cfg.amplitude_floor)
    swing = float(s_amp[:, 0].max() - s_amp[:, 0].min())
    evidence["x_swing"] = _round(swing)
    evidence["n_maxima"] = int(len(peaks.max_x))
    evidence["peaks"] = [[_round(a), _round(b)] for a, b in
                         zip(peaks.max_t[-6:], peaks.max_x[-6:])]
    decays = bool(np.all(amps[1:] <= amps[:-1] * (1 + cfg.decay_slack) + cfg.amplitude_floor))
    evidence["amplitude_decays"] = decays
    if len(amps) >= 2:
        evidence["amplitude_trend"] = _round(float(amps[-1] / amps[0]))

    interior = [e for e in eq if e.kind is EquilibriumKind.INTERIOR]
    if interior:
        t_foc, s_foc = _window(traj, cfg.focus_window, max(2, cfg.resample_points // 2))
        final = traj.final
        target = min(interior, key=lambda e: math.hypot(e.state.x - final.x, e.state.y - final.y))
        dist = np.hypot(s_foc[:, 0] - target.state.x, s_foc[:, 1] - target.state.y)
        evidence["final_distance"] = _round(float(dist.max()))
        evidence["target"] = [_round(target.state.x), _round(target.state.y)]
        verdict, _ = classify_interior(p, target)
        evidence["local_verdict"] = verdict.kind.value
        if dist.max() < cfg.focus_distance and decays:
            evidence["rule"] = "converged-to-interior"
            return _with_consistency(RegimeLabel(RegimeKind.STABLE_FOCUS, evidence))

    lo, hi = cfg.cycle_band
    if len(peaks.max_x) >= cfg.cycle_min_peaks and swing > cfg.cycle_min_amplitude:
        last = peaks.max_x[-cfg.cycle_min_peaks:]
        ratios = last[1:] / last[:-1]
        evidence["peak_ratios"] = [_round(r) for r in ratios]
        if np.all((ratios >= lo) & (ratios <= hi)):
            evidence["rule"] = "periodic-maxima"
            return _with_consistency(RegimeLabel(RegimeKind.STABLE_LIMIT_CYCLE, evidence))

    trend = evidence.get("amplitude_trend")
    if trend is not None and trend < lo:
        evidence["rule"] = "fallback-contracting"
        return _with_consistency(RegimeLabel(RegimeKind.STABLE_FOCUS, evidence))
    if trend is None and swing <= cfg.cycle_min_amplitude:
        evidence["rule"] = "fallback-quiescent"
        return _with_consistency(RegimeLabel(RegimeKind.STABLE_FOCUS, evidence))
    evidence["rule"] = "fallback-neutral"
    return _with_consistency(RegimeLabel(RegimeKind.STABLE_LIMIT_CYCLE, evidence))


def _with_consistency(label: RegimeLabel) -> RegimeLabel:
    """Note whether the local verdict at E* agrees with the observed regime."""
    verdict = label.evidence.get("local_verdict")
    if verdict is not None:
        stable = verdict in ("StableNode", "StableFocus")
        label.evidence["consistent_with_local"] = (
            stable == (label.kind is RegimeKind.STABLE_FOCUS))
    return label


def simulate_and_classify(p: ModelParams, s0: State, t_end: float = 500.0,
                          rel_tol: float = 1e-9, abs_tol: float = 1e-12,
                          config: ClassifierConfig | None = None) -> tuple[Trajectory, RegimeLabel]:
    traj = integrate(p, s0, t_end, rel_tol=rel_tol, abs_tol=abs_tol)
    return traj, classify(traj, p, config=config)


# -- sweeps ---------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    base: ModelParams
    initial: State
    varying: str
    grid: tuple[float, ...]
    t_end: float = 500.0
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)

    def __post_init__(self):
        if self.varying not in SWEEPABLE:
            raise ValidationError(f"cannot sweep {self.varying!r}; choose from {SWEEPABLE}")
        grid = tuple(float(v) for v in self.grid)
        if not grid:
            raise ValidationError("sweep grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValidationError("sweep grid must be strictly ascending")
        object.__setattr__(self, "grid", grid)

    def params_at(self, value: float) -> ModelParams:
        return self.base.replace(**{self.varying: value})

    def to_dict(self) -> dict:
        return {"base": self.base.to_dict(), "initial": {"x": self.initial.x, "y": self.initial.y},
                "varying": self.varying, "grid": list(self.grid), "t_end": self.t_end,
                "rel_tol": self.rel_tol, "abs_tol": self.abs_tol,
                "classifier": {k: (list(v) if isinstance(v, tuple) else v)
                               for k, v in asdict(self.classifier).items()}}

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        classifier = dict(data.get("classifier", {}))
        if "cycle_band" in classifier:
            classifier["cycle_band"] = tuple(classifier["cycle_band"])
        try:
            return cls(base=ModelParams.from_dict(data["base"]),
                       initial=State(float(data["initial"]["x"]), float(data["initial"]["y"])),
                       varying=data["varying"], grid=tuple(data["grid"]),
                       t_end=float(data.get("t_end", 500.0)),
                       rel_tol=float(data.get("rel_tol", 1e-9)),
                       abs_tol=float(data.get("abs_tol", 1e-12)),
                       classifier=ClassifierConfig(**classifier))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed sweep spec: {exc}") from None


@dataclass(frozen=True)
class SweepRow:
    value: float
    label: str
    final: State
    evidence: dict


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: tuple[SweepRow, ...]

    def runs(self) -> list[tuple[str, float, float, int]]:
        """Contiguous same-label intervals: (label, first value, last value, count)."""
        out: list[list] = []
        for row in self.rows:
            if out and out[-1][0] == row.label:
                out[-1][2] = row.value
                out[-1][3] += 1
            else:
                out.append([row.label, row.value, row.value, 1])
        return [tuple(r) for r in out]


def _sweep_point(spec: SweepSpec, value: float) -> SweepRow:
    p = spec.params_at(value)
    traj = integrate(p, spec.initial, spec.t_end, rel_tol=spec.rel_tol, abs_tol=spec.abs_tol)
    try:
        label = classify(traj, p, config=spec.classifier)
    except PlanktonError as exc:
        return SweepRow(value, "Inconclusive", traj.final, {"error": str(exc)})
    return SweepRow(value, label.kind.value, traj.final, label.evidence)


def sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Integrate and classify every grid value; rows keep grid order."""
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, [spec] * len(spec.grid), spec.grid))
    else:
        rows = [_sweep_point(spec, v) for v in spec.grid]
    return SweepResult(spec, tuple(rows))


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def sweep_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    buf.write("parameter,value,label,final_x,final_y,evidence_json\n")
    for row in result.rows:
        evidence = json.dumps(row.evidence, sort_keys=True, separators=(",", ":"))
        evidence = '"' + evidence.replace('"', '""') + '"'
        buf.write(f"{result.spec.varying},{_fmt(row.value)},{row.label},"
                  f"{_fmt(row.final.x)},{_fmt(row.final.y)},{evidence}\n")
    return buf.getvalue()


# -- plot data ------------------------------------------------------------

@dataclass(frozen=True)
class PhasePortrait:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def time_series_csv(self) -> str:
        return "t,x,y\n" + "".join(f"{_fmt(a)},{_fmt(b)},{_fmt(c)}\n"
                                   for a, b, c in zip(self.t, self.x, self.y))

    def orbit_csv(self) -> str:
        return "x,y\n" + "".join(f"{_fmt(b)},{_fmt(c)}\n" for b, c in zip(self.x, self.y))


def phase_portrait_data(traj: Trajectory, points: int = 2001) -> PhasePortrait:
    """Resample the dense output on a uniform grid for time-series and orbit plots."""
    t = np.linspace(traj.times[0], traj.times[-1], points) if traj.duration > 0 \
        else np.full(points, traj.times[0])
    s = traj.sample(t)
    return PhasePortrait(t, s[:, 0], s[:, 1])


def trajectory_csv(traj: Trajectory) -> str:
    """Accepted integrator steps, header ``t,x,y``."""
    return "t,x,y\n" + "".join(f"{_fmt(t)},{_fmt(x)},{_fmt(y)}\n"
                               for t, (x, y) in zip(traj.times, traj.states))


def shoelace_area(x: np.ndarray, y: np.ndarray) -> float:
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def final_loop_area(traj: Trajectory, p: ModelParams, points: int = 4001) -> float:
    """Area enclosed by the orbit between the last two maxima of x (zero if none)."""
    t, s = _window(traj, 0.25, 20_001)
    dxdt = np.array([rhs_xy(p, a, b)[0] for a, b in s])
    peaks = find_peaks(t, s[:, 0], dxdt)
    if len(peaks.max_t) < 2:
        return 0.0
    loop_t = np.linspace(peaks.max_t[-2], peaks.max_t[-1], points)
    loop = traj.sample(loop_t)
    return shoelace_area(loop[:, 0], loop[:, 1])
