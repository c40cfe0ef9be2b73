"""Phytoplankton-zooplankton model with a generalized type III predation term.

Nondimensional form::

    dx/dt = alpha x (1 - x) - x^(2+mu) y / (lambda^2 + x^2)
    dy/dt = beta x^(2+mu) y / (lambda^2 + x^2) - gamma y

``mu = 0`` recovers the classical Holling type III system.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import ArgumentDomainError, EvaluationError, ValidationError

INTEGER_TOL = 1e-12
INTERIOR_GRID = 10_000


def is_integer_exponent(mu: float) -> bool:
    return abs(mu - round(mu)) < INTEGER_TOL


@dataclass(frozen=True)
class DimensionalParams:
    r: float
    K: float
    omega: float
    a: float
    eta: float
    beta: float

    def __post_init__(self):
        for name in ("r", "K", "omega", "a", "eta", "beta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class ModelParams:
    """Nondimensional parameters. ``lam`` is lambda = a / K."""

    alpha: float
    lam: float
    beta: float
    gamma: float
    mu: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "lam", "beta", "gamma"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                label = "lambda" if name == "lam" else name
                raise ValidationError(f"{label} must be positive and finite, got {value!r}")
        if not (math.isfinite(self.mu) and self.mu >= 0):
            raise ValidationError(f"mu must be non-negative and finite, got {self.mu!r}")

    @property
    def integer_mu(self) -> bool:
        return is_integer_exponent(self.mu)

    def replace(self, **changes) -> "ModelParams":
        if "lambda" in changes:
            changes["lam"] = changes.pop("lambda")
        values = self.to_dict()
        values.update({("lambda" if k == "lam" else k): v for k, v in changes.items()})
        return ModelParams.from_dict(values)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "lambda": self.lam, "beta": self.beta,
                "gamma": self.gamma, "mu": self.mu}

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        unknown = set(data) - {"alpha", "lambda", "beta", "gamma", "mu"}
        if unknown:
            raise ValidationError(f"unknown model keys: {sorted(unknown)}")
        try:
            return cls(alpha=float(data["alpha"]), lam=float(data["lambda"]),
                       beta=float(data["beta"]), gamma=float(data["gamma"]),
                       mu=float(data.get("mu", 0.0)))
        except KeyError as exc:
            raise ValidationError(f"missing model key {exc.args[0]!r}") from None


@dataclass(frozen=True)
class State:
    x: float
    y: float

    @property
    def is_physical(self) -> bool:
        return self.x >= 0 and self.y >= 0

    def dimensional(self, dim: DimensionalParams) -> tuple[float, float]:
        """(X, Y) = (K x, K y)."""
        return dim.K * self.x, dim.K * self.y


@dataclass(frozen=True)
class Derivative:
    dx_dt: float
    dy_dt: float


class EquilibriumKind(str, enum.Enum):
    ORIGIN = "Origin"
    PHYTO_ONLY = "PhytoOnly"
    INTERIOR = "Interior"


@dataclass(frozen=True)
class Equilibrium:
    kind: EquilibriumKind
    state: State = field(default_factory=lambda: State(0.0, 0.0))


def nondimensionalize(dim: DimensionalParams, mu: float = 0.0) -> ModelParams:
    return ModelParams(alpha=dim.r / dim.omega, lam=dim.a / dim.K, beta=dim.beta,
                       gamma=dim.eta / dim.omega, mu=mu)


def dimensional_time(t: float, dim: DimensionalParams) -> float:
    """Convert nondimensional time t to dimensional T = t / omega."""
    return t / dim.omega


def prey_power(x: float, exponent: float) -> float:
    """x**exponent, real-valued; negative x only for integer exponents."""
    if is_integer_exponent(exponent):
        return x ** int(round(exponent))
    if x < 0:
        raise ArgumentDomainError(f"x = {x!r} < 0 raised to fractional power {exponent!r}")
    return x ** exponent


def predation(p: ModelParams, x: float) -> float:
    """Generalized functional response x^(2+mu) / (lambda^2 + x^2)."""
    return prey_power(x, 2.0 + p.mu) / (p.lam * p.lam + x * x)


def predation_slope(p: ModelParams, x: float) -> float:
    """d/dx of the functional response: x^(1+mu) ((2+mu) lam^2 + mu x^2) / (lam^2 + x^2)^2."""
    lam2 = p.lam * p.lam
    denom = lam2 + x * x
    return prey_power(x, 1.0 + p.mu) * ((2.0 + p.mu) * lam2 + p.mu * x * x) / (denom * denom)


def rhs(p: ModelParams, s: State) -> Derivative:
    dx, dy = rhs_xy(p, s.x, s.y)
    return Derivative(dx, dy)


def rhs_xy(p: ModelParams, x: float, y: float) -> tuple[float, float]:
    """Float-tuple form of :func:`rhs` used in the integrator's inner loop."""
    h = predation(p, x)
    dx = p.alpha * x * (1.0 - x) - h * y
    dy = p.beta * h * y - p.gamma * y
    if not (math.isfinite(dx) and math.isfinite(dy)):
        raise EvaluationError(f"non-finite vector field at (x, y) = ({x!r}, {y!r})")
    return dx, dy


def interior_function(p: ModelParams, x: float) -> float:
    """g(x) = beta x^(2+mu) - gamma (lambda^2 + x^2); interior roots satisfy g = 0."""
    return p.beta * prey_power(x, 2.0 + p.mu) - p.gamma * (p.lam * p.lam + x * x)


def _bisect(f, lo: float, hi: float, flo: float) -> float:
    # run to float resolution; stops well past the 1e-12 relative target
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid < 0) == (flo < 0):
            lo, flo = mid, fmid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


def interior_roots(p: ModelParams, grid: int = INTERIOR_GRID) -> list[float]:
    """Roots of g on (0, 1] by sign-change scan plus bisection.

    The scan starts from the limit g(0+) = -gamma lambda^2 < 0 so that roots
    below the first grid node are still bracketed.
    """
    g = lambda x: interior_function(p, x)  # noqa: E731
    roots = []
    x_prev, g_prev = 0.0, -p.gamma * p.lam * p.lam
    for i in range(1, grid + 1):
        x_i = i / grid
        g_i = g(x_i)
        if g_i == 0.0:
            roots.append(x_i)
        elif g_prev != 0.0 and (g_i < 0) != (g_prev < 0):
            roots.append(_bisect(g, x_prev, x_i, g_prev))
        x_prev, g_prev = x_i, g_i
    return roots


def interior_zooplankton(p: ModelParams, x_star: float) -> float:
    return p.alpha * p.beta / p.gamma * x_star * (1.0 - x_star)


def equilibria(p: ModelParams) -> list[Equilibrium]:
    """E0, E1 and every interior equilibrium with 0 < x* <= 1."""
    found = [Equilibrium(EquilibriumKind.ORIGIN, State(0.0, 0.0)),
             Equilibrium(EquilibriumKind.PHYTO_ONLY, State(1.0, 0.0))]
    for x_star in interior_roots(p):
        found.append(Equilibrium(EquilibriumKind.INTERIOR,
                                 State(x_star, interior_zooplankton(p, x_star))))
    return found


def interior_equilibria(p: ModelParams) -> list[Equilibrium]:
    return [e for e in equilibria(p) if e.kind is EquilibriumKind.INTERIOR]
