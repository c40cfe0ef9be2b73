"""Boubaker polynomials expansion scheme (BPES) for the plankton system.

Both populations are expanded as

    x(t) = 1/(2 N0) sum_q xi_q  B_{4q}(v_q t / t_m)
    y(t) = 1/(2 N0) sum_q xi'_q B_{4q}(v_q t / t_m)

and the coefficients minimize the squared residual of the combined system
integrated over [0, t_m], subject to sum xi = -N0 x0 and sum xi' = -N0 y0.
Those two linear constraints are eliminated by solving for the last
coefficient of each set, so every iterate is feasible. The reduced problem
is solved with damped Gauss-Newton (minimum-norm steps, step halving).

Because v_q is a root of B_{4q}, every basis function vanishes at t = t_m;
the expansion therefore forces x(t_m) = y(t_m) = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import boubaker
from .boubaker import RootTable
from .errors import ArgumentDomainError, EvaluationError, ValidationError
from .integrate import integrate
from .model import ModelParams, State, is_integer_exponent

SCALINGS = ("printed", "uniform")


def characteristic_time(p: ModelParams) -> float:
    """t_m = 2 pi / sqrt(alpha gamma)."""
    return 2.0 * math.pi / math.sqrt(p.alpha * p.gamma)


@dataclass(frozen=True)
class BpesConfig:
    x0: float
    y0: float
    n0: int = 20
    t_m: float | None = None
    quadrature_nodes: int = 257
    max_iterations: int = 200
    step_tolerance: float = 1e-12
    residual_tolerance: float = 1e-20
    # "printed": residuals carry the 2*N0 factor of the expanded equations;
    # "uniform": 1/(2*N0) applied to every series, i.e. the raw ODE residual
    scaling: str = "printed"
    # relative SVD cut-off for Gauss-Newton steps; bounds coefficient growth
    # along the basis' near-null directions
    rcond: float = 1e-10

    def __post_init__(self):
        if not isinstance(self.n0, int) or self.n0 < 2:
            raise ValidationError(f"n0 must be an integer >= 2, got {self.n0!r}")
        if self.t_m is not None and not (self.t_m > 0 and math.isfinite(self.t_m)):
            raise ValidationError(f"t_m must be positive, got {self.t_m!r}")
        if self.quadrature_nodes < 4 * self.n0 + 1:
            raise ValidationError(f"quadrature_nodes must be >= 4*n0 + 1 = {4 * self.n0 + 1}")
        if self.quadrature_nodes % 2 == 0:
            raise ValidationError("composite Simpson needs an odd node count")
        if self.scaling not in SCALINGS:
            raise ValidationError(f"scaling must be one of {SCALINGS}")
        if not (math.isfinite(self.x0) and math.isfinite(self.y0)):
            raise ValidationError("initial populations must be finite")

    def resolved_t_m(self, p: ModelParams) -> float:
        return characteristic_time(p) if self.t_m is None else self.t_m

    def to_dict(self) -> dict:
        return {"x0": self.x0, "y0": self.y0, "n0": self.n0, "t_m": self.t_m,
                "quadrature_nodes": self.quadrature_nodes, "max_iterations": self.max_iterations,
                "step_tolerance": self.step_tolerance,
                "residual_tolerance": self.residual_tolerance, "scaling": self.scaling,
                "rcond": self.rcond}

    @classmethod
    def from_dict(cls, data: dict) -> "BpesConfig":
        try:
            return cls(**data)
        except TypeError as exc:
            raise ValidationError(f"malformed BPES config: {exc}") from None


@dataclass(frozen=True)
class CoefficientSet:
    xi: tuple[float, ...]
    xi_prime: tuple[float, ...]

    def constraint_residuals(self, x0: float, y0: float) -> tuple[float, float]:
        n0 = len(self.xi)
        return math.fsum(self.xi) + n0 * x0, math.fsum(self.xi_prime) + n0 * y0


def simpson_weights(n: int, length: float) -> np.ndarray:
    if n < 3 or n % 2 == 0:
        raise ValidationError("Simpson's rule needs an odd number (>= 3) of nodes")
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (length / (n - 1) / 3.0)


class ResidualTerms:
    """The per-index terms W_q, M_q, Z_q, P_q as functions of t.

    ``t*`` differs per index, t*_q = v_q t / t_m; each method returns an
    array of shape (len(t), N0).
    """

    def __init__(self, p: ModelParams, cfg: BpesConfig, roots: RootTable):
        missing = [q for q in range(1, cfg.n0 + 1) if q not in roots]
        if missing:
            raise RuntimeError(f"root table lacks q = {missing}")
        self.p, self.cfg = p, cfg
        self.n0 = cfg.n0
        self.t_m = cfg.resolved_t_m(p)
        self.v = np.array([roots[q] for q in range(1, cfg.n0 + 1)])
        self.polys = [boubaker.generate(4 * q) for q in range(1, cfg.n0 + 1)]

    def basis(self, t) -> np.ndarray:
        """B_{4q}(t*_q); exactly zero at t = t_m where t*_q = v_q is a root."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.column_stack([boubaker.eval_array(P, v * t / self.t_m)
                               for P, v in zip(self.polys, self.v)])
        out[t == self.t_m] = 0.0
        return out

    def p_q(self, t) -> np.ndarray:
        """(v_q / t_m) dB_{4q}/dt*, i.e. the time derivative of each basis function."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.column_stack([(v / self.t_m) * boubaker.eval_derivative_array(P, v * t / self.t_m)
                                for P, v in zip(self.polys, self.v)])

    def w_q(self, t) -> np.ndarray:
        p = self.p
        return p.beta * self.p_q(t) - p.beta * p.alpha * self.basis(t)

    def m_q(self, t) -> np.ndarray:
        p = self.p
        return math.sqrt(p.beta * p.alpha / (2 * self.n0)) * self.basis(t)

    def z_q(self, t) -> np.ndarray:
        return -self.p_q(t) - self.p.gamma * self.basis(t)


def build_residuals(p: ModelParams, cfg: BpesConfig, roots: RootTable | None = None) -> ResidualTerms:
    return ResidualTerms(p, cfg, roots if roots is not None else RootTable(cfg.n0))


def _fractional_power(x: np.ndarray, exponent: float) -> np.ndarray:
    if is_integer_exponent(exponent):
        return x ** int(round(exponent))
    if np.any(x < 0):
        raise ArgumentDomainError(
            f"prey series dips to {x.min():.3g} < 0 under fractional exponent {exponent:g}")
    return x ** exponent


class _Problem:
    """Stacked, quadrature-weighted residual vector and its Jacobian."""

    def __init__(self, p: ModelParams, cfg: BpesConfig, terms: ResidualTerms,
                 nodes: int | None = None):
        self.p, self.cfg, self.terms = p, cfg, terms
        n = nodes or cfg.quadrature_nodes
        self.t = np.linspace(0.0, terms.t_m, n)
        self.sqrt_w = np.sqrt(simpson_weights(n, terms.t_m))
        self.B = terms.basis(self.t)
        self.D = terms.p_q(self.t)
        self.W = terms.w_q(self.t)
        self.M = terms.m_q(self.t)
        self.Z = terms.z_q(self.t)
        self.scale = 1.0 if cfg.scaling == "printed" else 1.0 / (2 * cfg.n0)

    def expand(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        n0, cfg = self.cfg.n0, self.cfg
        xi = np.append(z[: n0 - 1], -n0 * cfg.x0 - math.fsum(z[: n0 - 1]))
        xip = np.append(z[n0 - 1:], -n0 * cfg.y0 - math.fsum(z[n0 - 1:]))
        return xi, xip

    def raw(self, xi: np.ndarray, xip: np.ndarray):
        p, n0 = self.p, self.cfg.n0
        mx = self.M @ xi
        r1 = self.W @ xi + mx * mx - self.Z @ xip
        x = (self.B @ xi) / (2 * n0)
        by = self.B @ xip
        lam2 = p.lam * p.lam
        h = _fractional_power(x, 2.0 + p.mu) / (lam2 + x * x)
        r2 = self.D @ xip - p.beta * h * by + p.gamma * by
        if not (np.all(np.isfinite(r1)) and np.all(np.isfinite(r2))):
            raise EvaluationError("non-finite BPES residual")
        return r1, r2, x, h, by, mx

    def functionals(self, xi, xip) -> tuple[float, float]:
        r1, r2, *_ = self.raw(xi, xip)
        s2 = self.scale ** 2
        w = self.sqrt_w ** 2
        return s2 * float(w @ (r1 * r1)), s2 * float(w @ (r2 * r2))

    def residual(self, z: np.ndarray) -> np.ndarray:
        r1, r2, *_ = self.raw(*self.expand(z))
        return self.scale * np.concatenate([self.sqrt_w * r1, self.sqrt_w * r2])

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        p, n0 = self.p, self.cfg.n0
        xi, xip = self.expand(z)
        r1, r2, x, h, by, mx = self.raw(xi, xip)
        lam2 = p.lam * p.lam
        dh = _fractional_power(x, 1.0 + p.mu) * ((2 + p.mu) * lam2 + p.mu * x * x) / (lam2 + x * x) ** 2
        j1_xi = self.W + 2.0 * mx[:, None] * self.M
        j1_xip = -self.Z
        j2_xi = (-p.beta * dh * by / (2 * n0))[:, None] * self.B
        j2_xip = self.D + ((p.gamma - p.beta * h))[:, None] * self.B
        top = np.hstack([_reduce(j1_xi), _reduce(j1_xip)])
        bottom = np.hstack([_reduce(j2_xi), _reduce(j2_xip)])
        full = np.vstack([self.sqrt_w[:, None] * top, self.sqrt_w[:, None] * bottom])
        return self.scale * full


def _dot_rows(B: np.ndarray, c) -> np.ndarray:
    # compensated sums: coefficients are large and cancel heavily
    return np.array([math.fsum(row * c) for row in B])


def _reduce(j: np.ndarray) -> np.ndarray:
    # d/dz_k with the last coefficient eliminated through the sum constraint
    return j[:, :-1] - j[:, -1:]


def lambda_functional(coeffs: CoefficientSet, p: ModelParams, cfg: BpesConfig,
                      terms: ResidualTerms | None = None) -> float:
    """Squared residual of the first combined equation, integrated over [0, t_m]."""
    prob = _Problem(p, cfg, terms or build_residuals(p, cfg))
    r1 = _first_residual(prob, np.asarray(coeffs.xi), np.asarray(coeffs.xi_prime))
    return prob.scale ** 2 * float(prob.sqrt_w ** 2 @ (r1 * r1))


def _first_residual(prob: _Problem, xi, xip) -> np.ndarray:
    mx = prob.M @ xi
    r1 = prob.W @ xi + mx * mx - prob.Z @ xip
    if not np.all(np.isfinite(r1)):
        raise EvaluationError("non-finite BPES residual")
    return r1


def lambda_prime_functional(coeffs: CoefficientSet, p: ModelParams, cfg: BpesConfig,
                            terms: ResidualTerms | None = None) -> float:
    """Squared residual of the zooplankton equation, integrated over [0, t_m]."""
    prob = _Problem(p, cfg, terms or build_residuals(p, cfg))
    _, lam_prime = prob.functionals(np.asarray(coeffs.xi), np.asarray(coeffs.xi_prime))
    return lam_prime


@dataclass
class BpesSolution:
    coeffs: CoefficientSet
    objective_value: float
    params: ModelParams
    config: BpesConfig
    terms: ResidualTerms = field(repr=False)
    diagnostics: dict = field(default_factory=dict)

    @property
    def t_m(self) -> float:
        return self.terms.t_m

    def series(self, t) -> tuple[np.ndarray, np.ndarray]:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if t.size and (t.min() < 0 or t.max() > self.t_m * (1 + 1e-12)):
            raise ValidationError("BPES solution is defined on [0, t_m] only")
        B = self.terms.basis(t)
        n2 = 2 * self.config.n0
        return _dot_rows(B, self.coeffs.xi) / n2, _dot_rows(B, self.coeffs.xi_prime) / n2

    def evaluate(self, t: float) -> State:
        x, y = self.series([t])
        return State(float(x[0]), float(y[0]))

    def objective_with_nodes(self, nodes: int) -> float:
        prob = _Problem(self.params, self.config, self.terms, nodes=nodes)
        return sum(prob.functionals(np.asarray(self.coeffs.xi), np.asarray(self.coeffs.xi_prime)))

    def to_dict(self) -> dict:
        return {"model": self.params.to_dict(), "bpes": self.config.to_dict(),
                "t_m": self.t_m, "roots": list(map(float, self.terms.v)),
                "xi": list(self.coeffs.xi), "xi_prime": list(self.coeffs.xi_prime),
                "objective_value": self.objective_value, "diagnostics": self.diagnostics}


def solve(p: ModelParams, cfg: BpesConfig, roots: RootTable | None = None) -> BpesSolution:
    """Minimize Lambda + Lambda' over the feasible coefficient sets."""
    terms = build_residuals(p, cfg, roots)
    prob = _Problem(p, cfg, terms)
    n0 = cfg.n0
    z = np.concatenate([np.full(n0 - 1, -cfg.x0), np.full(n0 - 1, -cfg.y0)])
    r = prob.residual(z)
    f = float(r @ r)
    history = [f]
    lambda_history = [prob.functionals(*prob.expand(z))[0]]
    steps = []
    reason = "max-iterations"
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        if f < cfg.residual_tolerance:
            reason = "residual-tolerance"
            iterations -= 1
            break
        J = prob.jacobian(z)
        delta = np.linalg.lstsq(J, -r, rcond=cfg.rcond)[0]
        step, accepted = 1.0, False
        domain_failures = 0
        for _ in range(60):
            trial = z + step * delta
            try:
                r_trial = prob.residual(trial)
            except ArgumentDomainError:
                domain_failures += 1
                step *= 0.5
                continue
            f_trial = float(r_trial @ r_trial)
            if f_trial < f:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            if domain_failures and domain_failures == 60:
                raise ArgumentDomainError("every Gauss-Newton trial step leaves the prey domain")
            reason = "no-descent"
            iterations -= 1
            break
        step_norm = float(np.linalg.norm(step * delta))
        z, r, f = trial, r_trial, f_trial
        history.append(f)
        lambda_history.append(prob.functionals(*prob.expand(z))[0])
        steps.append(step_norm)
        if step_norm < cfg.step_tolerance * (1.0 + float(np.linalg.norm(z))):
            reason = "step-tolerance"
            break
        if f < cfg.residual_tolerance:
            reason = "residual-tolerance"
            break
    xi, xip = prob.expand(z)
    lam, lam_prime = prob.functionals(xi, xip)
    factor = 1.0 if cfg.scaling == "uniform" else 1.0 / (2 * n0) ** 2
    diagnostics = {
        "iterations": iterations,
        "termination": reason,
        "converged": reason in ("step-tolerance", "residual-tolerance", "no-descent"),
        "objective_history": history,
        "lambda_history": lambda_history,
        "step_norms": steps,
        "lambda": lam,
        "lambda_prime": lam_prime,
        # the same objective with 1/(2 N0) on every series; the two scalings
        # differ by the constant (2 N0)^2 and share their minimizers
        "uniform_objective": (lam + lam_prime) * factor,
        "printed_objective": (lam + lam_prime) * factor * (2 * n0) ** 2,
        "t_m": terms.t_m,
    }
    coeffs = CoefficientSet(tuple(map(float, xi)), tuple(map(float, xip)))
    return BpesSolution(coeffs, lam + lam_prime, p, cfg, terms, diagnostics)


def compare_with_reference(sol: BpesSolution, rel_tol: float = 1e-10, abs_tol: float = 1e-13,
                           points: int = 2001) -> dict:
    """Max-abs deviation of the BPES series from the reference integrator on [0, t_m]."""
    traj = integrate(sol.params, State(sol.config.x0, sol.config.y0), sol.t_m,
                     rel_tol=rel_tol, abs_tol=abs_tol)
    t = np.linspace(0.0, min(sol.t_m, traj.times[-1]), points)
    ref = traj.sample(t)
    bx, by = sol.series(t)
    ex, ey = np.abs(bx - ref[:, 0]), np.abs(by - ref[:, 1])
    return {"max_abs_error_x": float(ex.max()), "max_abs_error_y": float(ey.max()),
            "max_abs_error": float(max(ex.max(), ey.max())),
            "t_worst": float(t[int(np.argmax(np.maximum(ex, ey)))]),
            "reference_terminal": traj.terminal.value, "points": points,
            "t": t, "reference": ref, "bpes": np.column_stack([bx, by])}
