"""Local and global stability of the model's equilibria.

Local verdicts come from the trace and determinant of the analytic
variational matrix. The closed-form inequalities for E1 and E* are evaluated
verbatim alongside and cross-reported; the numeric verdict is the one used
downstream.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UnsupportedExponent, ValidationError
from .model import (Equilibrium, EquilibriumKind, ModelParams, State, equilibria,
                    is_integer_exponent, predation, predation_slope, rhs_xy)

HYPERBOLIC_TOL = 1e-10
BOUNDARY_TOL = 1e-12
DEFAULT_SAMPLES = 10_001


class VerdictKind(str, enum.Enum):
    SADDLE = "Saddle"
    STABLE_NODE = "StableNode"
    STABLE_FOCUS = "StableFocus"
    UNSTABLE_NODE = "UnstableNode"
    UNSTABLE_FOCUS = "UnstableFocus"
    NON_HYPERBOLIC = "NonHyperbolic"

    @property
    def is_stable(self) -> bool:
        return self in (VerdictKind.STABLE_NODE, VerdictKind.STABLE_FOCUS)


@dataclass(frozen=True)
class JacobianMatrix:
    j11: float
    j12: float
    j21: float
    j22: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.j11, self.j12], [self.j21, self.j22]])

    @property
    def trace(self) -> float:
        return self.j11 + self.j22

    @property
    def determinant(self) -> float:
        return self.j11 * self.j22 - self.j12 * self.j21


@dataclass(frozen=True)
class LocalVerdict:
    kind: VerdictKind
    trace: float
    determinant: float
    eigenvalues: tuple[complex, complex]
    unstable_direction: tuple[float, float] | None = None
    stable_direction: tuple[float, float] | None = None


@dataclass(frozen=True)
class InequalityReport:
    """One printed stability inequality ``lhs < rhs`` evaluated verbatim."""

    lhs: float | None
    rhs: float | None
    predicts_stable: bool | None
    agrees: bool | None

    @property
    def defined(self) -> bool:
        return self.predicts_stable is not None


@dataclass(frozen=True)
class SeriesValues:
    m_val: float
    n_val: float
    p_val: float
    q_val: float


@dataclass(frozen=True)
class GlobalReport:
    holds: bool
    worst_margin: float
    worst_x: float
    samples: int
    domain: tuple[float, float]
    c1: float = 0.5
    c2: float = 0.5


def jacobian(p: ModelParams, s: State) -> JacobianMatrix:
    h = predation(p, s.x)
    dh = predation_slope(p, s.x)
    return JacobianMatrix(
        j11=p.alpha * (1.0 - 2.0 * s.x) - dh * s.y,
        j12=-h,
        j21=p.beta * dh * s.y,
        j22=p.beta * h - p.gamma,
    )


def classify_matrix(jac: JacobianMatrix, tol: float = HYPERBOLIC_TOL) -> LocalVerdict:
    tr, det = jac.trace, jac.determinant
    disc = tr * tr - 4.0 * det
    root = cmath.sqrt(disc)
    eig = ((tr + root) / 2.0, (tr - root) / 2.0)
    if disc >= 0:
        eig = (complex(eig[0].real, 0.0), complex(eig[1].real, 0.0))
    scale = max(1.0, float(np.abs(jac.as_array()).max()))
    if abs(det) < tol * scale * scale or abs(tr) < tol * scale and det > 0:
        kind = VerdictKind.NON_HYPERBOLIC
    elif det < 0:
        kind = VerdictKind.SADDLE
    elif tr < 0:
        kind = VerdictKind.STABLE_NODE if disc >= 0 else VerdictKind.STABLE_FOCUS
    else:
        kind = VerdictKind.UNSTABLE_NODE if disc >= 0 else VerdictKind.UNSTABLE_FOCUS
    return LocalVerdict(kind, tr, det, eig)


def classify_origin(p: ModelParams) -> LocalVerdict:
    """E0 = (0, 0): eigenvalues alpha along x and -gamma along y."""
    v = classify_matrix(jacobian(p, State(0.0, 0.0)))
    return LocalVerdict(v.kind, v.trace, v.determinant,
                        (complex(p.alpha, 0.0), complex(-p.gamma, 0.0)),
                        unstable_direction=(1.0, 0.0), stable_direction=(0.0, 1.0))


def _agreement(predicts_stable: bool | None, verdict: LocalVerdict) -> bool | None:
    if predicts_stable is None or verdict.kind is VerdictKind.NON_HYPERBOLIC:
        return None
    return predicts_stable == verdict.kind.is_stable


def classify_phyto_only(p: ModelParams) -> tuple[LocalVerdict, InequalityReport]:
    """E1 = (1, 0) against the printed test 1^(1+mu) / (1 + lambda^2) < gamma / beta."""
    lhs = 1.0 ** (1.0 + p.mu) / (1.0 + p.lam * p.lam)
    rhs = p.gamma / p.beta
    verdict = classify_matrix(jacobian(p, State(1.0, 0.0)))
    if abs(lhs - rhs) <= BOUNDARY_TOL:
        verdict = LocalVerdict(VerdictKind.NON_HYPERBOLIC, verdict.trace,
                               verdict.determinant, verdict.eigenvalues)
        return verdict, InequalityReport(lhs, rhs, None, None)
    predicts = lhs < rhs
    return verdict, InequalityReport(lhs, rhs, predicts, _agreement(predicts, verdict))


def classify_interior(p: ModelParams, e: Equilibrium) -> tuple[LocalVerdict, InequalityReport]:
    """E* against (x*-1)/(lam^2+x*^2) < x*/((mu+1) lam^2 + (mu-1) x*^2)."""
    if e.kind is not EquilibriumKind.INTERIOR:
        raise ValidationError(f"expected an interior equilibrium, got {e.kind.value}")
    xs = e.state.x
    lam2 = p.lam * p.lam
    verdict = classify_matrix(jacobian(p, e.state))
    denom = (p.mu + 1.0) * lam2 + (p.mu - 1.0) * xs * xs
    lhs = (xs - 1.0) / (lam2 + xs * xs)
    if abs(denom) < BOUNDARY_TOL * max(lam2, xs * xs):
        return verdict, InequalityReport(lhs, None, None, None)
    rhs = xs / denom
    predicts = lhs < rhs
    return verdict, InequalityReport(lhs, rhs, predicts, _agreement(predicts, verdict))


def _integer_mu(mu: float) -> int:
    if not is_integer_exponent(mu):
        raise UnsupportedExponent(f"series M, N, P, Q need integer mu, got {mu!r}")
    return int(round(mu))


def _geometric(x: float, x_star: float, top: int) -> float:
    # sum_{k=0..top} x^(top-k) x_star^k; empty when top < 0
    return math.fsum(x ** (top - k) * x_star ** k for k in range(top + 1))


def series_values(x: float, x_star: float, mu: float) -> SeriesValues:
    n = _integer_mu(mu)
    if not (x > 0 and x_star > 0):
        raise DomainError("series are defined for x > 0 and x* > 0")
    return SeriesValues(m_val=_geometric(x, x_star, n - 2), n_val=_geometric(x, x_star, n),
                        p_val=_geometric(x, x_star, n + 1), q_val=_geometric(x, x_star, n - 1))


def global_margin(p: ModelParams, x_star: float, x: np.ndarray) -> np.ndarray:
    """RHS - LHS of the global condition at each x (positive where it holds).

    beta (lam^2 P + x^2 x*^2 Q) < x^(1+mu) (x*^2 + lam^2)
    """
    n = _integer_mu(p.mu)
    x = np.asarray(x, dtype=float)
    p_vals = sum(x ** (n + 1 - k) * x_star ** k for k in range(n + 2))
    q_vals = sum((x ** (n - 1 - k) * x_star ** k for k in range(n)), np.zeros_like(x))
    lam2 = p.lam * p.lam
    lhs = p.beta * (lam2 * p_vals + x * x * x_star * x_star * q_vals)
    return x ** (1 + n) * (x_star * x_star + lam2) - lhs


def global_condition(p: ModelParams, e: Equilibrium, x_domain: tuple[float, float] = (0.0, 1.0),
                     samples: int = DEFAULT_SAMPLES, c1: float = 0.5, c2: float = 0.5) -> GlobalReport:
    """Sample the global condition at ``samples`` uniform points of (lo, hi]."""
    if e.kind is not EquilibriumKind.INTERIOR:
        raise ValidationError("global condition applies to the interior equilibrium")
    lo, hi = x_domain
    if not (0.0 <= lo < hi) or samples < 1:
        raise ValidationError(f"bad sampling domain {x_domain!r} / samples {samples!r}")
    xs = np.linspace(lo, hi, samples + 1)[1:] if lo == 0.0 else np.linspace(lo, hi, samples)
    margin = global_margin(p, e.state.x, xs)
    i = int(np.argmin(margin))
    return GlobalReport(holds=bool(margin[i] > 0), worst_margin=float(margin[i]),
                        worst_x=float(xs[i]), samples=samples, domain=(lo, hi), c1=c1, c2=c2)


def _check_positive(e: Equilibrium, s: State) -> None:
    if e.kind is not EquilibriumKind.INTERIOR:
        raise ValidationError("Lyapunov function is centred on the interior equilibrium")
    if not (s.x > 0 and s.y > 0):
        raise DomainError(f"Lyapunov function needs x, y > 0, got ({s.x!r}, {s.y!r})")


def _entropy_term(u: float, u_star: float) -> float:
    # u - u* - u* ln(u/u*) computed without cancellation near u = u*
    r = (u - u_star) / u_star
    return u_star * (r - math.log1p(r))


def lyapunov_value(e: Equilibrium, s: State, c1: float = 0.5, c2: float = 0.5) -> float:
    _check_positive(e, s)
    return (c1 * _entropy_term(s.x, e.state.x)
            + c2 * _entropy_term(s.y, e.state.y))


def lyapunov_derivative(p: ModelParams, e: Equilibrium, s: State,
                        c1: float = 0.5, c2: float = 0.5) -> float:
    """dV/dt along the flow, by the chain rule."""
    _check_positive(e, s)
    dx, dy = rhs_xy(p, s.x, s.y)
    return (c1 * (1.0 - e.state.x / s.x) * dx
            + c2 * (1.0 - e.state.y / s.y) * dy)


@dataclass
class EquilibriumReport:
    equilibrium: Equilibrium
    verdict: LocalVerdict
    inequality: InequalityReport | None = None
    global_report: GlobalReport | None = None
    notes: list[str] = field(default_factory=list)


def _complex_pair(eig) -> list[list[float]]:
    return [[z.real, z.imag] for z in eig]


def _report_dict(r: EquilibriumReport) -> dict:
    v = r.verdict
    out = {
        "kind": r.equilibrium.kind.value,
        "x": r.equilibrium.state.x,
        "y": r.equilibrium.state.y,
        "verdict": v.kind.value,
        "trace": v.trace,
        "determinant": v.determinant,
        "eigenvalues": _complex_pair(v.eigenvalues),
    }
    if v.unstable_direction is not None:
        out["unstable_direction"] = list(v.unstable_direction)
        out["stable_direction"] = list(v.stable_direction)
    if r.inequality is not None:
        out["printed_inequality"] = {
            "lhs": r.inequality.lhs, "rhs": r.inequality.rhs,
            "predicts_stable": r.inequality.predicts_stable, "agrees": r.inequality.agrees,
        }
    if r.global_report is not None:
        g = r.global_report
        out["global_condition"] = {
            "holds": g.holds, "worst_margin": g.worst_margin, "worst_x": g.worst_x,
            "samples": g.samples, "domain": list(g.domain), "c1": g.c1, "c2": g.c2,
        }
    elif r.equilibrium.kind is EquilibriumKind.INTERIOR:
        out["global_condition"] = "unsupported (non-integer mu)"
    if r.notes:
        out["notes"] = list(r.notes)
    return out


def stability_report(p: ModelParams, x_domain: tuple[float, float] = (0.0, 1.0),
                     samples: int = DEFAULT_SAMPLES) -> dict:
    """Everything the ``stability`` command prints, as a JSON-ready dict."""
    reports = []
    for e in equilibria(p):
        if e.kind is EquilibriumKind.ORIGIN:
            reports.append(EquilibriumReport(e, classify_origin(p)))
        elif e.kind is EquilibriumKind.PHYTO_ONLY:
            verdict, ineq = classify_phyto_only(p)
            reports.append(EquilibriumReport(e, verdict, ineq))
        else:
            verdict, ineq = classify_interior(p, e)
            rep = EquilibriumReport(e, verdict, ineq)
            if p.integer_mu:
                rep.global_report = global_condition(p, e, x_domain, samples)
            if ineq.agrees is False:
                rep.notes.append("printed inequality disagrees with the Jacobian verdict")
            reports.append(rep)
    return {"model": p.to_dict(), "equilibria": [_report_dict(r) for r in reports]}


__all__ = [
    "VerdictKind", "JacobianMatrix", "LocalVerdict", "InequalityReport", "SeriesValues",
    "GlobalReport", "jacobian", "classify_matrix", "classify_origin", "classify_phyto_only",
    "classify_interior", "series_values", "global_margin", "global_condition",
    "lyapunov_value", "lyapunov_derivative", "stability_report"
]
