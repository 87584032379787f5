"""Shifted-l expansion engine for nodeless 2D radial states.

Pipeline for a bound potential V and magnetic quantum number m (l = |m|):

  1. solve_geometry   -- find the expansion point rho0 minimizing the leading
                         energy term, together with the oscillator frequency w,
                         the shift beta and the shifted quantum number lbar.
  2. build_v_series   -- perturbation polynomials v^(n)(x) in the scaled
                         coordinate x = sqrt(lbar) (rho - rho0) / rho0.
  3. solve_hierarchy  -- order-by-order coefficient matching producing the odd
                         U-polynomials, even G-polynomials and the eigenvalue
                         corrections lambda^(k).
  4. assemble_energy  -- corrections E^(-2), E^(0), E^(1), ... and cumulative
                         partial sums EN_0..EN_K.

All quantities are in effective Rydberg units (hbar = 2m = 1).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .expressions import BoundPotential
from .jets import Jet, jet_lift

__all__ = [
    "SolverError",
    "NoStableFrameError",
    "FrequencyUndefinedError",
    "NotAMinimumError",
    "HierarchyInconsistencyError",
    "ProblemInput",
    "Geometry",
    "VSeries",
    "CoefficientTable",
    "EnergyBreakdown",
    "solve_geometry",
    "build_v_series",
    "solve_hierarchy",
    "assemble_energy",
    "solve",
]


class SolverError(RuntimeError):
    """Base class for engine failures."""


class NoStableFrameError(SolverError):
    """No expansion point with an attractive-centrifugal balance was found."""


class FrequencyUndefinedError(SolverError):
    """The radicand of the harmonic frequency is non-positive at the candidate."""


class NotAMinimumError(SolverError):
    """The candidate expansion point is not a minimum of the leading energy."""


class HierarchyInconsistencyError(SolverError):
    """Residual after an order solve exceeded tolerance (degree bookkeeping bug)."""


RESIDUAL_TOL = 1e-9
FRAME_TOL = 1e-12


@dataclass(frozen=True)
class ProblemInput:
    """A potential plus quantum numbers; only nodeless states are supported."""

    bound: BoundPotential
    m: int
    n_rho: int = 0

    def __post_init__(self):
        if self.n_rho != 0:
            raise ValueError("only nodeless states (n_rho = 0) are supported")

    @property
    def l(self) -> int:
        return abs(self.m)


@dataclass(frozen=True)
class Geometry:
    """Solved expansion frame for a (potential, l) pair.

    The scaled coordinate convention is x = sqrt(lbar) (rho - rho0) / rho0.
    """

    rho0: float
    w: float
    beta: float
    lbar: float
    l: int
    n_rho: int = 0

    @property
    def Q(self) -> float:
        return self.lbar ** 2

    def x_of_rho(self, rho):
        return math.sqrt(self.lbar) * (np.asarray(rho) - self.rho0) / self.rho0


@dataclass(frozen=True)
class VSeries:
    """Perturbation polynomials v^(0)..v^(N), dense coefficient vectors in x."""

    polys: tuple[np.ndarray, ...]

    def __len__(self) -> int:
        return len(self.polys)

    def __getitem__(self, n: int) -> np.ndarray:
        return self.polys[n]

    @property
    def B1(self) -> float:
        """x^3 coefficient of v^(1)."""
        return float(self.polys[1][3])

    @property
    def B2(self) -> float:
        """x^4 coefficient of v^(2)."""
        return float(self.polys[2][4])


@dataclass(frozen=True)
class CoefficientTable:
    """Hierarchy outputs: U^(s) (odd), G^(s) (even), lambda^(k), residuals."""

    U: tuple[np.ndarray, ...]
    G: tuple[np.ndarray, ...]
    lambdas: tuple[float, ...]
    residuals: tuple[float, ...]

    def D(self, j: int, n: int) -> float:
        """Coefficient of x^(2j-1) in U^(n)."""
        poly = self.U[n]
        k = 2 * j - 1
        return float(poly[k]) if 0 <= k < len(poly) else 0.0

    def C(self, j: int, n: int) -> float:
        """Coefficient of x^(2j) in G^(n)."""
        poly = self.G[n]
        k = 2 * j
        return float(poly[k]) if 0 <= k < len(poly) else 0.0


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy corrections and cumulative partial sums.

    ``e_minus2`` multiplies lbar^2; ``corrections[n]`` is E^(n) for n >= 0.
    ``partial_sums[k]`` is EN_k:

        EN_0 = lbar^2 E^(-2)
        EN_1 = EN_0 + E^(0)
        EN_k = EN_{k-1} + E^(k-1) / lbar^(k-1)   (k >= 2)
    """

    e_minus2: float
    corrections: tuple[float, ...]
    partial_sums: tuple[float, ...]
    e_minus1: float  # identically ~0 by the choice of beta; kept as a self-check

    @property
    def energy(self) -> float:
        return self.partial_sums[-1]


# ---------------------------------------------------------------------------
# Geometry

class _D2:
    """Batched (value, V', V'') over an array of radii; used only to make the
    bracketing scan a handful of array operations instead of one jet per point.
    Root refinement and all frame invariants still use exact jets."""

    __slots__ = ("v", "d1", "d2")

    def __init__(self, v, d1, d2):
        self.v, self.d1, self.d2 = v, d1, d2

    def _coerce(self, other):
        if isinstance(other, _D2):
            return other
        z = np.zeros_like(self.v)
        return _D2(np.full_like(self.v, float(other)), z, z)

    def __add__(self, o):
        o = self._coerce(o)
        return _D2(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2)

    __radd__ = __add__

    def __neg__(self):
        return _D2(-self.v, -self.d1, -self.d2)

    def __sub__(self, o):
        o = self._coerce(o)
        return _D2(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        o = self._coerce(o)
        return _D2(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        )

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._coerce(o)
        q = self.v / o.v
        q1 = (self.d1 - q * o.d1) / o.v
        q2 = (self.d2 - 2.0 * q1 * o.d1 - q * o.d2) / o.v
        return _D2(q, q1, q2)

    def __rtruediv__(self, o):
        return self._coerce(o) / self

    def __pow__(self, p):
        p = float(p)
        f, f1, f2 = self.v, self.d1, self.d2
        g = f ** p
        gp = p * f ** (p - 1.0)
        return _D2(g, gp * f1, p * (p - 1.0) * f ** (p - 2.0) * f1 * f1 + gp * f2)


def _scan_residuals(bound: BoundPotential, grid: np.ndarray, l: int, n_rho: int):
    """F(rho) on the whole scan grid at once; NaN where the frame is undefined."""
    from .expressions import evaluate

    trip = _D2(grid, np.ones_like(grid), np.zeros_like(grid))
    with np.errstate(all="ignore"):
        out = evaluate(bound.spec.tree, trip, bound.values)
        if not isinstance(out, _D2):  # constant in rho (cannot happen post-parse)
            return np.full_like(grid, np.nan)
        v1, v2 = out.d1, out.d2
        s = grid ** 3 * v1 / 2.0
        rad = 3.0 + grid * v2 / v1
        ok = (
            np.isfinite(v1) & np.isfinite(v2) & (v1 > 0.0) & (s > 0.0) & (rad > 0.0)
        )
        safe_s = np.where(ok, s, 1.0)
        safe_rad = np.where(ok, rad, 1.0)
        return np.where(
            ok,
            np.sqrt(safe_s) - l - (n_rho + 0.5) * np.sqrt(safe_rad),
            np.nan,
        )


def _frame_quantities(bound: BoundPotential, rho: float, n_rho: int):
    """Return (s, rad) with s = rho^3 V' / 2 and rad = 3 + rho V''/V'.

    Either may be None when undefined (V' <= 0 or non-finite data).
    """
    try:
        jet = jet_lift(bound, rho, 2)
    except ArithmeticError:
        return None, None
    v1 = jet.coeffs[1]
    v2 = 2.0 * jet.coeffs[2]
    if not (math.isfinite(v1) and math.isfinite(v2)) or v1 <= 0.0:
        return None, None
    s = rho ** 3 * v1 / 2.0
    rad = 3.0 + rho * v2 / v1
    return s, rad


def _frame_residual(bound: BoundPotential, rho: float, l: int, n_rho: int):
    """F(rho) = sqrt(rho^3 V'/2) - l - (n_rho + 1/2) w / 2, or None if undefined."""
    s, rad = _frame_quantities(bound, rho, n_rho)
    if s is None or s <= 0.0 or rad is None or rad <= 0.0:
        return None
    w = 2.0 * math.sqrt(rad)
    return math.sqrt(s) - l - (n_rho + 0.5) * w / 2.0


def solve_geometry(
    problem: ProblemInput,
    rho_lo: float = 1e-4,
    rho_hi: float = 1e4,
    scan_points: int = 400,
) -> Geometry:
    """Locate the expansion point rho0 and the derived frame quantities.

    rho0 solves sqrt(rho^3 V'(rho)/2) = l - beta with beta = -(n_rho+1/2) w/2,
    which simultaneously makes the leading energy term stationary and kills
    the next-to-leading correction.  The scan is logarithmic over
    [rho_lo, rho_hi]; every bracketed root is refined and, if several stable
    frames exist, the one with the lowest leading energy wins (with a warning).
    """
    bound, l, n_rho = problem.bound, problem.l, problem.n_rho
    grid = np.logspace(math.log10(rho_lo), math.log10(rho_hi), scan_points)
    try:
        scan = _scan_residuals(bound, grid, l, n_rho)
    except ArithmeticError:
        scan = np.array([_frame_residual(bound, r, l, n_rho) for r in grid],
                        dtype=object)
    values = [
        (None if f is None or not np.isfinite(f) else float(f), float(r))
        for f, r in zip(scan, grid)
    ]

    roots: list[float] = []
    for (f0, r0), (f1, r1) in zip(values, values[1:]):
        if f0 is None or f1 is None:
            continue
        if f0 == 0.0:
            roots.append(r0)
        elif f0 * f1 < 0.0:
            try:
                root = brentq(
                    lambda r: _frame_residual(bound, r, l, n_rho),
                    r0,
                    r1,
                    xtol=1e-15,
                    rtol=8.9e-16,
                )
            except (TypeError, ValueError):
                continue  # frame equation undefined somewhere inside the bracket
            roots.append(root)
    if values[-1][0] == 0.0:
        roots.append(values[-1][1])
    if not roots:
        raise NoStableFrameError(
            "no stable frame: the frame equation has no root in "
            f"[{rho_lo}, {rho_hi}] for l={l}"
        )

    candidates: list[Geometry] = []
    for root in roots:
        geom = _finish_frame(bound, root, l, n_rho)
        if geom is not None:
            candidates.append(geom)
    if not candidates:
        raise FrequencyUndefinedError(
            "frequency undefined or unstable at every candidate expansion point"
        )
    if len(candidates) > 1:
        candidates.sort(key=lambda g: _leading_energy(bound, g))
        warnings.warn(
            f"{len(candidates)} stable frames found; choosing the one with the "
            "lowest leading-order energy",
            stacklevel=2,
        )
    return candidates[0]


def _finish_frame(bound: BoundPotential, rho0: float, l: int, n_rho: int):
    """Newton-polish rho0, then validate the frame invariants."""
    for _ in range(3):
        f = _frame_residual(bound, rho0, l, n_rho)
        if f is None:
            return None
        h = 1e-7 * rho0
        fp = _frame_residual(bound, rho0 + h, l, n_rho)
        fm = _frame_residual(bound, rho0 - h, l, n_rho)
        if fp is None or fm is None:
            break
        dF = (fp - fm) / (2.0 * h)
        if dF == 0.0:
            break
        step = f / dF
        if not math.isfinite(step) or abs(step) > 0.5 * rho0:
            break
        rho0 -= step
    f = _frame_residual(bound, rho0, l, n_rho)
    if f is None or abs(f) > FRAME_TOL * max(1.0, l):
        return None

    s, rad = _frame_quantities(bound, rho0, n_rho)
    if rad is None or rad <= 0.0:
        raise FrequencyUndefinedError(
            f"frequency undefined: 3 + rho V''/V' = {rad} at rho0 = {rho0}"
        )
    w = 2.0 * math.sqrt(rad)
    beta = -(n_rho + 0.5) * w / 2.0
    lbar = l - beta
    Q = lbar ** 2
    # second-derivative test on E^(-2)(rho) = 1/rho^2 + V(rho)/Q at fixed Q
    jet = jet_lift(bound, rho0, 2)
    v2 = 2.0 * jet.coeffs[2]
    curvature = 6.0 / rho0 ** 4 + v2 / Q
    if curvature <= 0.0:
        raise NotAMinimumError(
            f"expansion point rho0 = {rho0} is not a minimum of the leading energy"
        )
    return Geometry(rho0=float(rho0), w=w, beta=beta, lbar=lbar, l=l, n_rho=n_rho)


def _leading_energy(bound: BoundPotential, geom: Geometry) -> float:
    v0 = float(bound(geom.rho0))
    return geom.Q * (1.0 / geom.rho0 ** 2 + v0 / geom.Q)


# ---------------------------------------------------------------------------
# Perturbation polynomials

def build_v_series(bound: BoundPotential, geom: Geometry, max_order: int) -> VSeries:
    """Build v^(0)..v^(max_order) as dense coefficient vectors in x.

    v^(n) needs the (n+2)-th derivative of V at rho0; a single jet of order
    max_order + 2 supplies all of them.
    """
    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    rho0, w, beta, Q = geom.rho0, geom.w, geom.beta, geom.Q
    jet = jet_lift(bound, rho0, max_order + 2)
    a = jet.coeffs  # a[k] = V^(k)(rho0) / k!

    polys: list[np.ndarray] = []
    v0 = np.zeros(3)
    v0[0] = 2.0 * beta
    v0[2] = w * w / 4.0
    polys.append(v0)
    for n in range(1, max_order + 1):
        v = np.zeros(n + 3)
        # the x^(n+2) term: (-1)^n (n+3) + rho0^(n+4) V^(n+2)(rho0) / (Q (n+2)!)
        sign = -1.0 if n % 2 else 1.0
        v[n + 2] = sign * (n + 3) + rho0 ** (n + 4) * a[n + 2] / Q
        if n == 1:
            v[1] = -4.0 * beta
        elif n == 2:
            v[0] = beta * beta - 0.25
            v[2] = 6.0 * beta
        else:
            v[n] = sign * 2.0 * beta * (n + 1)
            v[n - 2] = sign * (beta * beta - 0.25) * (n - 1)
        polys.append(v)
    return VSeries(polys=tuple(polys))


# ---------------------------------------------------------------------------
# Coefficient hierarchy

def _polymul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)


def _padded_sum(terms: list[np.ndarray], length: int) -> np.ndarray:
    out = np.zeros(length)
    for t in terms:
        out[: len(t)] += t[:length] if len(t) > length else t
    return out


def _apply_L(poly: np.ndarray, w: float) -> np.ndarray:
    """L[P] = P' - w x P, the linearized operator of the order-s balance."""
    out = np.zeros(len(poly) + 1)
    for k in range(1, len(poly)):
        out[k - 1] += k * poly[k]
    out[1:] -= w * poly
    return out


def solve_hierarchy(v: VSeries, geom: Geometry, max_order: int) -> CoefficientTable:
    """Run the order-by-order coefficient matching through order 2*max_order.

    Writing the log-derivative of the nodeless state as
        W(x) = sum_s W_s(x) lbar^(-s/2),   W_s = U^(s) + G^(s-1),
    the order-s balance reads
        W_s' - w x W_s = v^(s) - sum_{p+q=s, p,q>=1} W_p W_q - RHS_s,
    with RHS_2 = beta^2 - 1/4 + lambda^(0), RHS_{2k} = lambda^(k-1) for k >= 2
    and RHS_s = 0 at odd s.  The even-parity part is triangular in the odd
    polynomial U^(s) (solved top coefficient downward), the odd-parity part in
    the even polynomial G^(s-1); at even s the leftover constant equation
    yields the lambda.  After each order the full residual is verified.
    """
    n_orders = 2 * max_order
    if len(v) < n_orders + 1:
        raise ValueError(
            f"v-series covers orders 0..{len(v) - 1}, need 0..{n_orders}"
        )
    w, beta = geom.w, geom.beta

    W: list[np.ndarray] = [np.array([0.0, -w / 2.0])]  # W_0 = U^(0) = -(w/2) x
    U: list[np.ndarray] = [W[0]]
    G: list[np.ndarray] = []
    lambdas: list[float] = []
    residuals: list[float] = []

    for s in range(1, n_orders + 1):
        cross = [
            _polymul(W[p], W[s - p]) for p in range(1, s) if p < len(W) and s - p < len(W)
        ]
        length = s + 3  # deg v^(s) = s+2
        K = _padded_sum([np.asarray(v[s])] + [-c for c in cross], length)

        # even-parity part -> odd polynomial U^(s)
        J = (length - 1) // 2  # highest even power present is 2J
        D = np.zeros(J + 2)  # D[j] multiplies x^(2j-1); D[0] unused (= 0)
        for j in range(J, 0, -1):
            t = K[2 * j] if 2 * j < length else 0.0
            D[j] = ((2 * j + 1) * D[j + 1] - t) / w
        u_poly = np.zeros(2 * J + 2)
        for j in range(1, J + 2):
            if 2 * j - 1 < len(u_poly):
                u_poly[2 * j - 1] = D[j]

        rhs_const = 0.0
        if s % 2 == 0:
            lam = K[0] - D[1]
            if s == 2:
                lam -= beta * beta - 0.25
            lambdas.append(lam)
            rhs_const = K[0] - D[1]

        # odd-parity part -> even polynomial G^(s-1)
        M = (length - 2) // 2  # highest odd power present is 2M+1
        C = np.zeros(M + 2)
        for j in range(M, -1, -1):
            t = K[2 * j + 1] if 2 * j + 1 < length else 0.0
            C[j] = ((2 * j + 2) * C[j + 1] - t) / w
        g_poly = C[: M + 1].copy()
        g_dense = np.zeros(2 * M + 1 if M >= 0 else 1)
        for j in range(M + 1):
            g_dense[2 * j] = g_poly[j]

        w_s = _padded_sum([u_poly, g_dense], max(len(u_poly), len(g_dense)))
        W.append(np.trim_zeros(w_s, "b") if np.any(w_s) else np.zeros(1))
        U.append(np.trim_zeros(u_poly, "b") if np.any(u_poly) else np.zeros(1))
        G.append(np.trim_zeros(g_dense, "b") if np.any(g_dense) else np.zeros(1))

        # full residual of the order-s balance
        target = K.copy()
        target[0] -= rhs_const
        res_poly = _apply_L(W[s], w)
        res = _padded_sum([res_poly, -target], max(len(res_poly), len(target)))
        res_max = float(np.max(np.abs(res))) if len(res) else 0.0
        residuals.append(res_max)
        if res_max > RESIDUAL_TOL:
            raise HierarchyInconsistencyError(
                f"hierarchy inconsistency at order {s}: residual {res_max:.3e}"
            )

    return CoefficientTable(
        U=tuple(U), G=tuple(G), lambdas=tuple(lambdas), residuals=tuple(residuals)
    )


# ---------------------------------------------------------------------------
# Energy assembly

def assemble_energy(
    geom: Geometry,
    table: CoefficientTable,
    bound: BoundPotential,
    max_order: int,
) -> EnergyBreakdown:
    """Corrections E^(-2), E^(0)..E^(max_order-1) and partial sums EN_0..EN_max_order."""
    if len(table.lambdas) < max_order:
        raise ValueError(
            f"table holds lambda^(0..{len(table.lambdas) - 1}), need {max_order}"
        )
    rho0, beta, lbar, Q = geom.rho0, geom.beta, geom.lbar, geom.Q
    v_at_rho0 = float(bound(rho0))

    e_minus2 = 1.0 / rho0 ** 2 + v_at_rho0 / Q
    e_minus1 = (2.0 * beta + (geom.n_rho + 0.5) * geom.w) / rho0 ** 2
    corrections = [(beta * beta - 0.25 + table.lambdas[0]) / rho0 ** 2]
    for n in range(1, max_order):
        corrections.append(table.lambdas[n] / rho0 ** 2)

    sums = [lbar ** 2 * e_minus2]
    sums.append(sums[0] + corrections[0])
    for k in range(2, max_order + 1):
        sums.append(sums[k - 1] + corrections[k - 1] / lbar ** (k - 1))

    return EnergyBreakdown(
        e_minus2=e_minus2,
        corrections=tuple(corrections),
        partial_sums=tuple(sums),
        e_minus1=e_minus1,
    )


def solve(
    bound: BoundPotential,
    m: int,
    max_order: int = 3,
) -> tuple[Geometry, CoefficientTable, EnergyBreakdown]:
    """End-to-end solve: frame, hierarchy and energy for a nodeless state."""
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    problem = ProblemInput(bound=bound, m=m)
    geom = solve_geometry(problem)
    v = build_v_series(bound, geom, 2 * max_order)
    table = solve_hierarchy(v, geom, max_order)
    breakdown = assemble_energy(geom, table, bound, max_order)
    return geom, table, breakdown
