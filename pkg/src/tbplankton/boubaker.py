"""Boubaker polynomials and the minimal positive roots of B_{4q}.

B_0 = 1, B_1 = x, B_2 = x^2 + 2 and B_m = x B_{m-1} - B_{m-2} for m > 2.
The family itself is taken from the BPES literature; the properties this
package depends on (B_{4q}(0) = -2, a positive real root) are checked in
the test-suite rather than assumed.

Coefficients are Python integers, so they never overflow. Scalar
evaluation is exact (rational arithmetic on the binary value of ``t``)
and rounded once; :func:`eval_array` is the fast float path used where the
argument stays inside [0, v_q].
"""
from __future__ import annotations

import functools
import math
import threading
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import RootSearchError, ValidationError

SCAN_STEP = 1e-4
BRACKET_WIDTH = 1e-13


@dataclass(frozen=True)
class BoubakerPolynomial:
    order: int
    coeffs: tuple[int, ...]  # ascending powers

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def derivative_coeffs(self) -> tuple[int, ...]:
        return tuple(k * c for k, c in enumerate(self.coeffs))[1:] or (0,)


@functools.lru_cache(maxsize=None)
def _coeffs(m: int) -> tuple[int, ...]:
    if m == 0:
        return (1,)
    if m == 1:
        return (0, 1)
    if m == 2:
        return (2, 0, 1)
    prev2, prev1 = _coeffs(m - 2), _coeffs(m - 1)
    out = [0] + list(prev1)
    for k, c in enumerate(prev2):
        out[k] -= c
    return tuple(out)


def generate(m: int) -> BoubakerPolynomial:
    if not isinstance(m, int) or m < 0:
        raise ValidationError(f"order must be a non-negative integer, got {m!r}")
    for k in range(3, m):  # fill the cache bottom-up, avoiding deep recursion
        _coeffs(k)
    return BoubakerPolynomial(m, _coeffs(m))


def _exact_horner(coeffs: tuple[int, ...], t: float) -> float:
    # t = num / den exactly; accumulate c_k num^k den^(deg-k) in integers
    num, den = t.as_integer_ratio()
    deg = len(coeffs) - 1
    acc = coeffs[deg]
    den_power = 1
    for c in reversed(coeffs[:deg]):
        den_power *= den
        acc = acc * num + c * den_power
    return acc / den_power


def eval(poly: BoubakerPolynomial, t: float) -> float:  # noqa: A001
    """B_m(t), exactly evaluated then rounded once to float."""
    return _exact_horner(poly.coeffs, t)


def eval_derivative(poly: BoubakerPolynomial, t: float) -> float:
    return _exact_horner(poly.derivative_coeffs(), t)


def eval_array(poly: BoubakerPolynomial, t: np.ndarray) -> np.ndarray:
    """Float Horner evaluation; accurate for |t| well inside the unit interval."""
    t = np.asarray(t, dtype=float)
    acc = np.zeros_like(t)
    for c in reversed(poly.coeffs):
        acc = acc * t + float(c)
    return acc


def eval_derivative_array(poly: BoubakerPolynomial, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    acc = np.zeros_like(t)
    for c in reversed(poly.derivative_coeffs()):
        acc = acc * t + float(c)
    return acc


def _sign(poly: BoubakerPolynomial, t: float) -> int:
    v = eval(poly, t)
    return (v > 0) - (v < 0)


@functools.lru_cache(maxsize=None)
def minimal_positive_root(q: int) -> float:
    """Smallest t > 0 with B_{4q}(t) = 0.

    Scans (0, 2 sqrt(4q)] with step 1e-4 for the first sign change, then
    bisects the bracket to width 1e-13.
    """
    if not isinstance(q, int) or q < 1:
        raise ValidationError(f"q must be a positive integer, got {q!r}")
    poly = generate(4 * q)
    upper = 2.0 * math.sqrt(4 * q)
    lo, s_lo = 0.0, _sign(poly, 0.0)
    k = 1
    while True:
        hi = k * SCAN_STEP
        if hi > upper:
            raise RootSearchError(f"no sign change of B_{4 * q} on (0, {upper}]")
        s_hi = _sign(poly, hi)
        if s_hi == 0:
            return hi
        if s_hi != s_lo:
            break
        lo, k = hi, k + 1
    while hi - lo > BRACKET_WIDTH:
        mid = 0.5 * (lo + hi)
        s_mid = _sign(poly, mid)
        if s_mid == 0:
            return mid
        if s_mid == s_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class RootTable(Mapping[int, float]):
    """Write-once cache of v_q for q = 1..n, filled eagerly on construction."""

    _lock = threading.Lock()

    def __init__(self, n: int):
        if n < 1:
            raise ValidationError(f"root table size must be >= 1, got {n!r}")
        with self._lock:
            self._entries = {q: minimal_positive_root(q) for q in range(1, n + 1)}

    def __getitem__(self, q: int) -> float:
        return self._entries[q]

    def __iter__(self):
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def values_array(self) -> np.ndarray:
        return np.array([self._entries[q] for q in sorted(self._entries)])
