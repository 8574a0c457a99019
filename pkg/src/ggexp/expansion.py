"""Forward/inverse generalized Gegenbauer transforms and weighted norms."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from numpy.polynomial import chebyshev as cheb

from . import _kernels
from .errors import ConvergenceError, DomainError
from .quadrature import (
    _evaluate,
    gauss_jacobi_rule,
    gen_gegenbauer_rule,
    gen_rule_for_exactness,
    integrate,
    integrate_converged,
)
from .special_poly import (
    BasisParams,
    JacobiParams,
    _as_grid,
    _shape_like,
    orthonormal_coefficients,
    orthonormal_gg_eval,
    orthonormal_gg_table,
)

__all__ = [
    "CoefficientVector",
    "TestFunction",
    "forward_transform",
    "partial_sum_eval",
    "lp_norm",
    "parseval_check",
    "sup_norm_estimate",
    "sup_abs",
    "polynomial_lp_integral",
]

GOLDEN_WIDTH = 1e-12
# Grid maxima below this fraction of the best grid value are not refined. On a
# Chebyshev-Lobatto grid with >= 32 points per degree the grid misses a local
# maximum by a relative 1 - cos(pi/64) ~ 1.2e-3 at most, so the cut is safe.
_REFINE_FRACTION = 0.9


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    """Coefficients ``c_0..c_N`` against the orthonormal basis ``C~_n``."""

    params: BasisParams
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if not np.all(np.isfinite(c)):
            raise DomainError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return max(self.coeffs.size - 1, 0)

    def __len__(self) -> int:
        return self.coeffs.size

    def padded(self, length: int) -> "CoefficientVector":
        out = np.zeros(max(length, self.coeffs.size))
        out[: self.coeffs.size] = self.coeffs
        return CoefficientVector(self.params, out)

    def truncated(self, degree: int) -> "CoefficientVector":
        return CoefficientVector(self.params, self.coeffs[: degree + 1])

    def scaled(self, factor: float) -> "CoefficientVector":
        return CoefficientVector(self.params, factor * self.coeffs)

    def to_csv(self) -> str:
        rows = ["n,coefficient"] + [f"{n},{c:.17g}" for n, c in enumerate(self.coeffs)]
        return "\n".join(rows) + "\n"

    def to_dict(self) -> dict:
        return {"lambda": self.params.lam, "mu": self.params.mu, "coeffs": self.coeffs.tolist()}

    def to_json(self) -> str:
        from ._io import dumps

        return dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "CoefficientVector":
        return cls(BasisParams(float(data["lambda"]), float(data["mu"])), data["coeffs"])

    @classmethod
    def from_json(cls, text: str) -> "CoefficientVector":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A function on [-1, 1]: either a C~-series or a vectorized callable.

    ``degree`` is the polynomial degree when known (always set for series);
    ``None`` marks a general function, integrated by refinement.
    """

    __test__ = False  # keep pytest from collecting this class

    series: Optional[CoefficientVector] = None
    func: Optional[Callable] = None
    degree: Optional[int] = None
    label: str = field(default="")

    def __post_init__(self):
        if (self.series is None) == (self.func is None):
            raise ValueError("give exactly one of series or func")
        if self.series is not None:
            object.__setattr__(self, "degree", self.series.degree)

    @classmethod
    def from_coefficients(cls, cv: CoefficientVector, label: str = "") -> "TestFunction":
        return cls(series=cv, label=label)

    @classmethod
    def from_callable(cls, func: Callable, degree: Optional[int] = None, label: str = "") -> "TestFunction":
        return cls(func=func, degree=degree, label=label)

    @property
    def is_polynomial(self) -> bool:
        return self.degree is not None

    def __call__(self, t):
        if self.series is not None:
            return partial_sum_eval(self.series, t)
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.asarray(self.func(t), dtype=float), t.shape)

    def scaled(self, factor: float) -> "TestFunction":
        if self.series is not None:
            return TestFunction.from_coefficients(self.series.scaled(factor), self.label)
        func = self.func
        return TestFunction.from_callable(lambda t: factor * func(t), self.degree, self.label)


def _series_parts(cv: CoefficientVector) -> tuple[np.ndarray, np.ndarray]:
    c = cv.coeffs
    scaled = c * orthonormal_coefficients(cv.params, max(c.size - 1, 0))[: c.size]
    return np.ascontiguousarray(scaled[0::2]), np.ascontiguousarray(scaled[1::2])


def partial_sum_eval(cv: CoefficientVector, t):
    """``sum_n c_n C~_n(t)``, one recurrence pass per parity."""
    flat, scalar = _as_grid(t)
    bp = cv.params
    ce, co = _series_parts(cv)
    ev, od = bp.even_jacobi, bp.odd_jacobi
    vals = _kernels.gg_series(ev.alpha, ev.beta, od.beta, ce, co, flat)
    return _shape_like(vals, t, scalar)


def forward_transform(
    bp: BasisParams, f: TestFunction, degree: int, rel_tol: float = 1e-11
) -> CoefficientVector:
    """Coefficients ``f^_n = int f C~_n v`` for ``n <= degree``.

    Polynomials use one rule exact for every integrand ``f C~_n``. General
    functions go through N, 2N, ... point rules until the whole coefficient
    vector agrees between successive sizes.
    """
    if int(degree) != degree or degree < 0:
        raise DomainError(f"degree must be a non-negative integer, got {degree}")
    degree = int(degree)
    if f.is_polynomial:
        full = max(degree, f.degree)
        rule = gen_rule_for_exactness(bp, 2 * full + 1)
        return CoefficientVector(bp, _fit(bp, rule, f, full)[: degree + 1])

    n = max(64, -(-(2 * degree + 2) // 4))
    prev = _project(bp, gen_gegenbauer_rule(bp, n), f, degree)
    while 2 * n <= 2**16:
        n *= 2
        cur = _project(bp, gen_gegenbauer_rule(bp, n), f, degree)
        scale = float(np.max(np.abs(cur))) if cur.size else 0.0
        if float(np.max(np.abs(cur - prev))) <= max(rel_tol * scale, 1e-14):
            return CoefficientVector(bp, cur)
        prev = cur
    raise ConvergenceError(prev, cur, n)


def _fit(bp: BasisParams, rule, f: TestFunction, degree: int) -> np.ndarray:
    """Weighted least squares of f on ``C~_0..C~_degree`` over the rule nodes.

    For f in that span this returns its expansion however the nodes were
    rounded; the Gram matrix differs from I only by the node rounding, which
    plain projection would otherwise pass on amplified by the size of the
    integrand derivative near +-1.
    """
    values = _evaluate(f, rule.nodes)
    table = orthonormal_gg_table(bp, degree, rule.nodes)
    weighted = table * rule.weights
    gram = weighted @ table.T
    return cho_solve(cho_factor(gram), weighted @ values)


def _project(bp: BasisParams, rule, f: TestFunction, degree: int) -> np.ndarray:
    values = _evaluate(f, rule.nodes)
    table = orthonormal_gg_table(bp, degree, rule.nodes)
    return table @ (rule.weights * values)


def sup_abs(func: Callable, a: float, b: float, grid_size: int) -> float:
    """Estimate ``max |func|`` on [a, b]: Chebyshev-Lobatto grid, then golden-section.

    ``func`` takes an array. The result never exceeds the true maximum by more
    than rounding; it is a lower bound refined to bracket width 1e-12.
    """
    m = max(int(grid_size), 3)
    theta = np.pi * np.arange(m) / (m - 1)
    grid = 0.5 * (a + b) - 0.5 * (b - a) * np.cos(theta)
    grid[0], grid[-1] = a, b
    vals = np.abs(np.asarray(func(grid), dtype=float))
    best = float(vals.max())
    if best == 0.0:
        return 0.0

    padded = np.concatenate([[-np.inf], vals, [-np.inf]])
    is_peak = (padded[1:-1] >= padded[:-2]) & (padded[1:-1] >= padded[2:])
    idx = np.nonzero(is_peak & (vals >= _REFINE_FRACTION * best))[0]
    lo = grid[np.maximum(idx - 1, 0)]
    hi = grid[np.minimum(idx + 1, m - 1)]

    ratio = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - ratio * (hi - lo)
    x2 = lo + ratio * (hi - lo)
    f1 = np.abs(func(x1))
    f2 = np.abs(func(x2))
    while np.any(hi - lo > GOLDEN_WIDTH):
        left = f1 >= f2
        # maximize: keep [lo, x2] where f1 wins, else [x1, hi]
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        new_x1 = hi - ratio * (hi - lo)
        new_x2 = lo + ratio * (hi - lo)
        x2n = np.where(left, x1, new_x2)
        x1n = np.where(left, new_x1, x2)
        f2n = np.where(left, f1, np.nan)
        f1n = np.where(left, np.nan, f2)
        need1, need2 = np.isnan(f1n), np.isnan(f2n)
        if need1.any():
            f1n[need1] = np.abs(func(x1n[need1]))
        if need2.any():
            f2n[need2] = np.abs(func(x2n[need2]))
        x1, x2, f1, f2 = x1n, x2n, f1n, f2n
    refined = np.maximum(f1, f2)
    return max(best, float(refined.max()) if refined.size else best)


def sup_grid_size(degree: int) -> int:
    return max(4096, 32 * (degree + 1))


def sup_norm_estimate(bp: BasisParams, n: int, interval: tuple[float, float] = (-1.0, 1.0)) -> float:
    """Estimate ``max |C~_n(t)|`` over ``interval`` (default [-1, 1])."""
    a, b = interval
    return sup_abs(lambda t: orthonormal_gg_eval(bp, n, t), a, b, sup_grid_size(n))


def _real_roots(f: TestFunction) -> list[float]:
    """Real zeros of a polynomial TestFunction in [-1, 1], polished and clustered."""
    deg = f.degree
    if deg == 0:
        return []
    series = cheb.Chebyshev.interpolate(lambda x: f(np.clip(x, -1.0, 1.0)), deg)
    c = series.coef
    if not np.any(c):
        return []
    # drop a numerically vanishing leading tail so the companion matrix is sane
    tail = np.abs(c) > 1e-14 * np.abs(c).max()
    c = c[: np.nonzero(tail)[0][-1] + 1]
    if c.size <= 1:
        return []
    roots = cheb.chebroots(c)
    roots = roots[(np.abs(roots.imag) < 1e-6) & (np.abs(roots.real) <= 1.0 + 1e-8)].real
    dc = cheb.chebder(c)
    out = []
    for r in roots:
        x = float(np.clip(r, -1.0, 1.0))
        for _ in range(3):
            d = cheb.chebval(x, dc)
            if d == 0.0:
                break
            step = cheb.chebval(x, c) / d
            if not abs(step) < 1e-6:
                break
            x = float(np.clip(x - step, -1.0, 1.0))
        out.append(x)
    return sorted(out)


def polynomial_lp_integral(
    bp: BasisParams,
    f: TestFunction,
    p: float,
    rel_tol: float = 1e-11,
    n_start: int = 16,
    max_points: int = 2**12,
) -> float:
    """``int |f|^p v`` for polynomial ``f`` and any real ``p >= 1``.

    [-1, 1] is split at the real zeros of ``f`` and at 0 and +-1, where ``v``
    is singular. On every piece the endpoint factors ``|t - c|^e`` become the
    weight of a Gauss-Jacobi rule, so what is left is smooth and the rules
    converge quickly. Rule sizes double until two successive totals agree.
    """
    clump = 1e-12
    # (point, weight exponent, zero multiplicity)
    points: list[list] = [[-1.0, bp.lam - 0.5, 0], [0.0, 2.0 * bp.mu, 0], [1.0, bp.lam - 0.5, 0]]
    for r in _real_roots(f):
        for pt in points:
            if abs(pt[0] - r) <= clump:
                pt[2] += 1
                break
        else:
            points.append([r, 0.0, 1])
    points.sort(key=lambda q: q[0])
    weight_pts = [(c, e) for c, e, _ in points if e != 0.0]

    pieces = []
    for (a, ea, ma), (b, eb, mb) in zip(points[:-1], points[1:]):
        pieces.append((a, b, ea + p * ma, eb + p * mb, ma, mb))

    def piece_sum(n: int) -> float:
        rules = [gauss_jacobi_rule(JacobiParams(eb, ea), n) for _, _, ea, eb, _, _ in pieces]
        halves = [0.5 * (b - a) for a, b, *_ in pieces]
        lefts = [h * (1.0 + r.nodes) for h, r in zip(halves, rules)]   # t - a
        rights = [h * (1.0 - r.nodes) for h, r in zip(halves, rules)]  # b - t
        ts = [pc[0] + left for pc, left in zip(pieces, lefts)]
        values = np.split(np.asarray(f(np.concatenate(ts)), dtype=float), len(pieces))[: len(pieces)]
        total = []
        for (a, b, ea, eb, ma, mb), rule, half, left, right, t, vals in zip(
            pieces, rules, halves, lefts, rights, ts, values
        ):
            if ma:
                vals = vals / left**ma
            if mb:
                vals = vals / (-right) ** mb
            g = np.abs(vals) ** p
            for c, e in weight_pts:
                if c == a or c == b:
                    continue
                g = g * np.abs(t - c) ** e
            total.append(half ** (1.0 + ea + eb) * float(np.dot(rule.weights, g)))
        return math.fsum(total)

    n = n_start
    prev = piece_sum(n)
    while 2 * n <= max_points:
        n *= 2
        cur = piece_sum(n)
        if abs(cur - prev) <= max(rel_tol * abs(cur), 1e-300):
            return cur
        prev = cur
    raise ConvergenceError(prev, cur, n)


def _is_even_integer(p: float) -> bool:
    return float(p).is_integer() and int(p) % 2 == 0


def lp_norm(
    bp: BasisParams,
    f: TestFunction,
    p: float,
    rel_tol: float = 1e-11,
    resolution: Optional[int] = None,
) -> float:
    """``||f||_{L_p(v)}`` for ``1 <= p <= inf``.

    ``p = inf`` is a sampled estimate (see ``sup_abs``); ``resolution`` sets
    the grid for non-polynomial ``f`` and defaults to 4096 points.
    """
    if not p >= 1:
        raise DomainError(f"p must be >= 1 or inf, got {p}")
    if math.isinf(p):
        size = sup_grid_size(f.degree) if f.is_polynomial else (resolution or 4096)
        return sup_abs(f, -1.0, 1.0, size)
    if f.is_polynomial and _is_even_integer(p):
        # f^p is a polynomial: one exact rule, no refinement
        k = int(p)
        value = integrate(gen_rule_for_exactness(bp, k * f.degree), lambda t: f(t) ** k)
    elif f.is_polynomial:
        value = polynomial_lp_integral(bp, f, p, rel_tol)
    else:
        value, _ = integrate_converged(bp, lambda t: np.abs(f(t)) ** p, rel_tol)
    return value ** (1.0 / p)


def parseval_check(bp: BasisParams, f: TestFunction, degree: int) -> tuple[float, float]:
    """``(||f||_{L_2(v)}, ||f^||_2)`` for a polynomial ``f`` of degree <= ``degree``."""
    if not f.is_polynomial or f.degree > degree:
        raise DomainError("parseval_check needs a polynomial of degree <= degree")
    lhs = lp_norm(bp, f, 2.0)
    rhs = float(np.linalg.norm(forward_transform(bp, f, degree).coeffs))
    return lhs, rhs
