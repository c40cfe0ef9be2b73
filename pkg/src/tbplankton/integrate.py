"""Reference integrator: Dormand-Prince 5(4) with event handling.

Failures are encoded in :attr:`Trajectory.terminal` rather than raised, so
that sweeps can treat them as outcomes.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentDomainError, EvaluationError, ValidationError
from .model import ModelParams, State, rhs_xy

EXTINCTION_FLOOR = 1e-12
UNDERFLOW_FACTOR = 1e-14

# Dormand & Prince (1980) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
# fifth-order minus embedded fourth-order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


class Terminal(str, enum.Enum):
    COMPLETED = "Completed"
    EXTINCT = "Extinct"
    DOMAIN_VIOLATION = "DomainViolation"
    SOLVER_FAILURE = "SolverFailure"


@dataclass
class Trajectory:
    """Accepted steps plus derivatives, enough for cubic Hermite dense output."""

    times: np.ndarray
    states: np.ndarray  # shape (n, 2)
    derivs: np.ndarray  # shape (n, 2)
    terminal: Terminal
    events: list[tuple[float, str]] = field(default_factory=list)
    t_end: float = 0.0
    rel_tol: float = 0.0
    abs_tol: float = 0.0
    rejected: int = 0

    @property
    def x(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def final(self) -> State:
        return State(float(self.states[-1, 0]), float(self.states[-1, 1]))

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    def sample(self, t) -> np.ndarray:
        """Cubic Hermite interpolation of the accepted steps at times ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if t.size and (t.min() < self.times[0] - 1e-12 or t.max() > self.times[-1] + 1e-12):
            raise ValidationError("sample times outside the integrated interval")
        if len(self.times) == 1:
            return np.repeat(self.states[:1], len(t), axis=0)
        i = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 2)
        t0, t1 = self.times[i], self.times[i + 1]
        h = (t1 - t0)[:, None]
        s = ((t - t0) / (t1 - t0))[:, None]
        y0, y1 = self.states[i], self.states[i + 1]
        f0, f1 = self.derivs[i], self.derivs[i + 1]
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def _hermite_scalar(t0, t1, y0, y1, f0, f1, t):
    h = t1 - t0
    s = (t - t0) / h
    return ((2 * s**3 - 3 * s**2 + 1) * y0 + (s**3 - 2 * s**2 + s) * h * f0
            + (-2 * s**3 + 3 * s**2) * y1 + (s**3 - s**2) * h * f1)


def _locate_crossing(t0, t1, y0, y1, f0, f1, level):
    lo, hi = t0, t1
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _hermite_scalar(t0, t1, y0, y1, f0, f1, mid) > level:
            lo = mid
        else:
            hi = mid
    return hi


def integrate(p: ModelParams, s0: State, t_end: float, rel_tol: float = 1e-9,
              abs_tol: float = 1e-12, floor: float = EXTINCTION_FLOOR,
              max_steps: int = 2_000_000, first_step: float | None = None) -> Trajectory:
    """Integrate from ``s0`` over [0, t_end].

    Terminal events: a population falling through ``floor`` (Extinct), any
    evaluation at x < 0 with fractional mu (DomainViolation), step size
    below 1e-14 t_end, a non-finite evaluation, or ``max_steps`` exhausted
    (SolverFailure).
    """
    if not (t_end > 0 and math.isfinite(t_end)):
        raise ValidationError(f"t_end must be positive, got {t_end!r}")
    if not (0 < rel_tol < 1 and 0 < abs_tol < 1):
        raise ValidationError("tolerances must lie in (0, 1)")
    if not (math.isfinite(s0.x) and math.isfinite(s0.y)):
        raise ValidationError("initial state must be finite")
    if s0.x < 0 or s0.y < 0:
        raise ValidationError(f"initial state must be non-negative, got {s0}")

    f = lambda x, y: rhs_xy(p, x, y)  # noqa: E731
    t, x, y = 0.0, float(s0.x), float(s0.y)
    times, xs, ys, fxs, fys = [t], [x], [y], [], []
    events: list[tuple[float, str]] = []
    rejected = 0
    h_min = UNDERFLOW_FACTOR * t_end

    def finish(terminal):
        n = len(times)
        derivs = np.column_stack([fxs[:n], fys[:n]]) if fxs else np.zeros((n, 2))
        if len(derivs) < n:
            pad = np.repeat(derivs[-1:] if len(derivs) else np.zeros((1, 2)), n - len(derivs), axis=0)
            derivs = np.vstack([derivs, pad])
        return Trajectory(np.array(times), np.column_stack([xs, ys]), derivs, terminal,
                          events, t_end, rel_tol, abs_tol, rejected)

    try:
        k1 = f(x, y)
    except ArgumentDomainError:
        events.append((t, "domain"))
        return finish(Terminal.DOMAIN_VIOLATION)
    except EvaluationError:
        events.append((t, "non-finite"))
        return finish(Terminal.SOLVER_FAILURE)
    fxs.append(k1[0]); fys.append(k1[1])

    if first_step is None:
        scale = abs_tol + rel_tol * max(abs(x), abs(y))
        d1 = max(abs(k1[0]), abs(k1[1]))
        h = min(t_end, 0.01 * scale ** 0.2 / d1 if d1 > 0 else 0.01 * t_end)
    else:
        h = first_step
    h = max(h, 10 * h_min)

    steps = 0
    while t < t_end:
        if steps >= max_steps:
            events.append((t, "max-steps"))
            return finish(Terminal.SOLVER_FAILURE)
        h = min(h, t_end - t)
        if h < h_min and t + h < t_end:
            events.append((t, "step-underflow"))
            return finish(Terminal.SOLVER_FAILURE)
        ks = [k1]
        try:
            for stage in range(1, 7):
                a = _A[stage]
                sx = x + h * sum(a[j] * ks[j][0] for j in range(stage))
                sy = y + h * sum(a[j] * ks[j][1] for j in range(stage))
                ks.append(f(sx, sy))
        except ArgumentDomainError:
            events.append((t, "domain"))
            return finish(Terminal.DOMAIN_VIOLATION)
        except EvaluationError:
            ks = None
        if ks is None:
            # non-finite stage: shrink and retry, give up only on underflow
            rejected += 1
            h *= 0.25
            if h < h_min:
                events.append((t, "non-finite"))
                return finish(Terminal.SOLVER_FAILURE)
            continue
        x_new, y_new = sx, sy  # FSAL: stage 7 is the fifth-order solution
        ex = h * sum(_E[j] * ks[j][0] for j in range(7))
        ey = h * sum(_E[j] * ks[j][1] for j in range(7))
        sc_x = abs_tol + rel_tol * max(abs(x), abs(x_new))
        sc_y = abs_tol + rel_tol * max(abs(y), abs(y_new))
        err = math.sqrt(0.5 * ((ex / sc_x) ** 2 + (ey / sc_y) ** 2))
        if err <= 1.0:
            steps += 1
            k_new = ks[6]
            t_new = t + h if t_end - (t + h) > 1e-12 * t_end else t_end
            crossing = None
            for comp, (old, new, d_old, d_new) in enumerate(
                    ((x, x_new, k1[0], k_new[0]), (y, y_new, k1[1], k_new[1]))):
                if old >= floor and new < floor and d_new < 0:
                    tc = _locate_crossing(t, t_new, old, new, d_old, d_new, floor)
                    if crossing is None or tc < crossing[0]:
                        crossing = (tc, comp)
            if crossing is not None:
                tc, comp = crossing
                sx_c = _hermite_scalar(t, t_new, x, x_new, k1[0], k_new[0], tc)
                sy_c = _hermite_scalar(t, t_new, y, y_new, k1[1], k_new[1], tc)
                times.append(tc); xs.append(sx_c); ys.append(sy_c)
                try:
                    fc = f(sx_c, sy_c)
                except (ArgumentDomainError, EvaluationError):
                    fc = k_new
                fxs.append(fc[0]); fys.append(fc[1])
                events.append((tc, "x-floor" if comp == 0 else "y-floor"))
                return finish(Terminal.EXTINCT)
            t, x, y, k1 = t_new, x_new, y_new, k_new
            times.append(t); xs.append(x); ys.append(y)
            fxs.append(k1[0]); fys.append(k1[1])
            factor = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        else:
            rejected += 1
            factor = max(0.2, 0.9 * err ** -0.2)
        h *= factor
    return finish(Terminal.COMPLETED)
