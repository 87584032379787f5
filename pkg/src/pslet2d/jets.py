"""Truncated power-series (Taylor jet) arithmetic.

A jet stores the coefficients a_0..a_K of the expansion

    f(rho0 + h) = a_0 + a_1 h + ... + a_K h^K,   a_k = f^(k)(rho0) / k!

Propagating jets through a potential's expression tree yields every
derivative d^n V / d rho^n at the expansion point in one pass, exact to
floating-point rounding -- no finite differencing, no symbolic algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .expressions import BoundPotential, PotentialEvalError, evaluate

__all__ = ["Jet", "jet_lift", "derivative"]


class _Series:
    """Internal truncated-series scalar used while traversing the tree."""

    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)

    @property
    def order(self) -> int:
        return len(self.c) - 1

    # -- ring operations ----------------------------------------------------

    def _coerce(self, other) -> "_Series":
        if isinstance(other, _Series):
            return other
        out = np.zeros_like(self.c)
        out[0] = float(other)
        return _Series(out)

    def __add__(self, other):
        o = self._coerce(other)
        return _Series(self.c + o.c)

    __radd__ = __add__

    def __neg__(self):
        return _Series(-self.c)

    def __sub__(self, other):
        o = self._coerce(other)
        return _Series(self.c - o.c)

    def __rsub__(self, other):
        o = self._coerce(other)
        return _Series(o.c - self.c)

    def __mul__(self, other):
        o = self._coerce(other)
        n = len(self.c)
        return _Series(np.convolve(self.c, o.c)[:n])

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        return _series_div(self, o)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        return _series_div(o, self)

    def __pow__(self, p: float):
        return _series_pow(self, float(p))


def _series_div(num: _Series, den: _Series) -> _Series:
    if den.c[0] == 0.0:
        raise PotentialEvalError("division by a series with zero constant term (pole)")
    n = len(num.c)
    out = np.empty(n)
    for k in range(n):
        acc = num.c[k]
        for j in range(1, k + 1):
            acc -= den.c[j] * out[k - j]
        out[k] = acc / den.c[0]
    return _Series(out)


def _series_pow(base: _Series, p: float) -> _Series:
    """Real power of a series via the standard logarithmic-derivative recurrence.

    g = f^p satisfies f g' = p f' g, giving
        k f_0 g_k = sum_{j=1..k} (j p - (k - j)) f_j g_{k-j}.
    """
    f = base.c
    if f[0] <= 0.0:
        raise PotentialEvalError(
            f"real power of a series with non-positive constant term {f[0]}"
        )
    n = len(f)
    g = np.zeros(n)
    g[0] = f[0] ** p
    for k in range(1, n):
        acc = 0.0
        for j in range(1, k + 1):
            acc += (j * p - (k - j)) * f[j] * g[k - j]
        g[k] = acc / (k * f[0])
    return _Series(g)


@dataclass(frozen=True)
class Jet:
    """Taylor coefficients of V about ``center``: coeffs[k] = V^(k)(center)/k!."""

    center: float
    coeffs: np.ndarray
    order: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        object.__setattr__(self, "order", len(self.coeffs) - 1)

    def __len__(self) -> int:
        return len(self.coeffs)


def jet_lift(bound: BoundPotential, center: float, order: int) -> Jet:
    """Expand ``bound`` about ``center`` to the given truncation order."""
    if center <= 0:
        raise PotentialEvalError(f"expansion center must be positive, got {center}")
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    seed = np.zeros(order + 1)
    seed[0] = center
    if order >= 1:
        seed[1] = 1.0
    result = evaluate(bound.spec.tree, _Series(seed), bound.values)
    if isinstance(result, _Series):
        coeffs = result.c
    else:  # tree degenerated to a constant in rho (cannot happen post-parse)
        coeffs = np.zeros(order + 1)
        coeffs[0] = float(result)
    if not np.all(np.isfinite(coeffs)):
        raise PotentialEvalError(
            f"non-finite jet coefficients when expanding about rho={center}"
        )
    return Jet(center=float(center), coeffs=coeffs)


def derivative(jet: Jet, k: int) -> float:
    """k-th derivative of V at the jet's center, i.e. k! * coeffs[k]."""
    if not 0 <= k <= jet.order:
        raise IndexError(f"derivative order {k} outside jet range 0..{jet.order}")
    return math.factorial(k) * float(jet.coeffs[k])
